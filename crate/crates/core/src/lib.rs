//! Sequential detection of regime shifts in the mean, the variance and the
//! correlation coefficient of time series.
//!
//! The mean detector is a sequential t-test (STARS-style) scan, the variance
//! detector a sequential F-test on centered residuals, and the correlation
//! detector applies the variance test to the sum and difference of two
//! series after their mean and variance regimes have been removed.
//!
//! ```
//! use srsd_core::{detect_mean, DetectionParams, TimeSeries};
//!
//! let mut values = vec![0.0; 30];
//! values.extend(vec![5.0; 30]);
//! let series = TimeSeries::new(values).unwrap();
//! let result = detect_mean(&series, &DetectionParams::new(0.05, 10)).unwrap();
//! assert_eq!(result.change_indices(), vec![31]);
//! ```

pub mod correlation;
pub mod error;
pub mod fixture;
pub mod mean_shift;
pub mod model;
pub mod monitor;
pub mod prewhiten;
pub mod sequential;
pub mod stats;
pub mod synth;
pub mod variance_shift;

pub use correlation::{
    channel_implied_r, detect_correlation, detect_correlation_with, run_srsd, run_srsd_with,
    step_skipping_mode, sum_diff_channels, CandidateRecord, Channel, CorrelationResult,
    SrsdOptions, SrsdResult, Step,
};
pub use error::{Result, SrsdError};
pub use fixture::{canonical_fixture, ExpectedChangePoints};
pub use mean_shift::{detect_mean, mean_monitor, monitor_mean, threshold_delta, MeanShiftResult};
pub use model::{
    check_partition, regimes_to_stepwise, validate_params, ChangePoint, DetectionParams,
    Prewhitening, Regime, StatKind, TimeSeries,
};
pub use monitor::{MonitorState, MonitorStatus};
pub use prewhiten::{estimate_ar1, prewhiten, Ar1Estimate, Ar1Method};
pub use synth::{generate_pair, RegimeSpec, Segment};
pub use variance_shift::{
    critical_variances, detect_variance, monitor_variance, variance_monitor, VarianceShiftResult,
};

/// Crate version, echoed in result files.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
