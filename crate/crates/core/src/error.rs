use thiserror::Error;

/// Errors raised by the detectors and their supporting statistics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SrsdError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("series too short: need at least {required} observations, got {actual}")]
    TooShort { required: usize, actual: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("labels must be strictly increasing (violated at index {index})")]
    UnorderedLabels { index: usize },

    #[error("series has zero variance")]
    ZeroVariance,

    #[error("correlation of magnitude 1 has no finite Fisher z")]
    PerfectCorrelation,

    #[error("regimes do not partition 1..={length}: {reason}")]
    BadPartition { length: usize, reason: String },

    #[error("invalid regime specification: {0}")]
    InvalidSpec(String),

    #[error("monitor has not been initialized with enough history")]
    Uninitialized,
}

pub type Result<T> = std::result::Result<T, SrsdError>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> SrsdError {
    SrsdError::InvalidParam {
        field,
        reason: reason.into(),
    }
}
