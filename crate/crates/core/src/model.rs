//! Shared data model: series, detection parameters, regimes and change-points.
//!
//! Public indices are 1-based: the first observation has index 1, and a
//! change-point is the index of the first observation of the new regime.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SrsdError};

/// An ordered sequence of finite observations with optional time labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SrsdError::NonFinite { index: index + 1 });
        }
        Ok(Self {
            values,
            labels: None,
            name: None,
        })
    }

    pub fn with_labels(values: Vec<f64>, labels: Vec<f64>) -> Result<Self> {
        Self::new(values)?.labelled(labels)
    }

    /// Attaches time labels, which must match in length and strictly increase.
    pub fn labelled(mut self, labels: Vec<f64>) -> Result<Self> {
        if labels.len() != self.values.len() {
            return Err(SrsdError::LengthMismatch {
                left: self.values.len(),
                right: labels.len(),
            });
        }
        if let Some(index) = labels.iter().position(|v| !v.is_finite()) {
            return Err(SrsdError::NonFinite { index: index + 1 });
        }
        if let Some(k) = labels.windows(2).position(|w| w[1] <= w[0]) {
            return Err(SrsdError::UnorderedLabels { index: k + 2 });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[f64]> {
        self.labels.as_deref()
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Label of the 1-based `index`, falling back to the index itself.
    pub fn label_at(&self, index: usize) -> f64 {
        match &self.labels {
            Some(labels) => labels[index - 1],
            None => index as f64,
        }
    }

    /// Builds a series of new values that keeps this series' labels and name.
    pub(crate) fn derive(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            values,
            labels: self.labels.clone(),
            name: self.name.clone(),
        }
    }

    /// Like [`derive`](Self::derive) for outputs that drop the first observation.
    pub(crate) fn derive_tail(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len() + 1, self.values.len());
        Self {
            values,
            labels: self.labels.as_ref().map(|l| l[1..].to_vec()),
            name: self.name.clone(),
        }
    }
}

impl From<TimeSeries> for Vec<f64> {
    fn from(ts: TimeSeries) -> Self {
        ts.values
    }
}

/// Lag-1 autocorrelation removal applied before detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Prewhitening {
    #[default]
    None,
    Mpk,
    Ip4,
}

impl std::str::FromStr for Prewhitening {
    type Err = SrsdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Self::None),
            "mpk" => Ok(Self::Mpk),
            "ip4" => Ok(Self::Ip4),
            other => Err(invalid("prewhiten", format!("unknown mode `{other}`"))),
        }
    }
}

/// Target significance level, cut-off length and prewhitening settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionParams {
    /// Target significance level, in (0, 1).
    pub p: f64,
    /// Cut-off length: the shortest regime the test is calibrated for.
    pub l: usize,
    pub prewhiten: Prewhitening,
    /// Subsample size for the AR(1) estimate; only checked when prewhitening.
    pub m: usize,
}

impl DetectionParams {
    /// Parameters without prewhitening. `m` defaults to `max(5, (l + 1) / 3)`.
    pub fn new(p: f64, l: usize) -> Self {
        Self {
            p,
            l,
            prewhiten: Prewhitening::None,
            m: ((l + 1) / 3).max(5),
        }
    }

    pub fn with_prewhitening(mut self, mode: Prewhitening, m: usize) -> Self {
        self.prewhiten = mode;
        self.m = m;
        self
    }

    pub fn validate(self) -> Result<Self> {
        validate_params(self)
    }
}

/// Returns `params` unchanged when every field is in range.
pub fn validate_params(params: DetectionParams) -> Result<DetectionParams> {
    if !(params.p > 0.0 && params.p < 1.0) {
        return Err(invalid(
            "p",
            format!("must lie in (0, 1), got {}", params.p),
        ));
    }
    if params.l < 3 {
        return Err(invalid(
            "l",
            format!("must be at least 3, got {}", params.l),
        ));
    }
    if params.prewhiten != Prewhitening::None && !(5..params.l).contains(&params.m) {
        return Err(invalid(
            "m",
            format!("must satisfy 5 <= m < l = {}, got {}", params.l, params.m),
        ));
    }
    Ok(params)
}

/// Which statistic a regime holds constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatKind {
    Mean,
    Variance,
    Correlation,
}

/// A contiguous span `start..=end` (1-based) over which one statistic is constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub start: usize,
    pub end: usize,
    pub kind: StatKind,
    /// Regime mean, mean square, or Pearson r depending on `kind`.
    pub value: f64,
    /// p-value of the shift into this regime; absent for the first regime and
    /// whenever either side of the shift has fewer than four points.
    pub shift_p_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci_low: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci_high: Option<f64>,
}

impl Regime {
    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    pub fn contains(&self, index: usize) -> bool {
        (self.start..=self.end).contains(&index)
    }
}

/// First index of a new regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangePoint {
    pub index: usize,
    /// Final RSI (mean) or RSSI (variance) value that confirmed the shift.
    pub index_value: f64,
    pub p_value: Option<f64>,
    /// Set when the series ended before the full `l`-point test window.
    pub provisional: bool,
}

/// Minimum regime length for which a shift p-value is reported.
pub(crate) const MIN_POINTS_FOR_P_VALUE: usize = 4;

/// Checks that `regimes` tile `1..=length` in order without gaps or overlaps.
pub fn check_partition(length: usize, regimes: &[Regime]) -> Result<()> {
    let bad = |reason: String| SrsdError::BadPartition { length, reason };
    let mut next = 1;
    for r in regimes {
        if r.start != next {
            return Err(bad(format!(
                "expected a regime starting at {next}, found {}",
                r.start
            )));
        }
        if r.end < r.start {
            return Err(bad(format!("regime {}..={} is empty", r.start, r.end)));
        }
        next = r.end + 1;
    }
    if next != length + 1 {
        return Err(bad(format!("coverage ends at {}", next - 1)));
    }
    Ok(())
}

/// Expands a regime partition into the stepwise series of regime values.
pub fn regimes_to_stepwise(series_length: usize, regimes: &[Regime]) -> Result<TimeSeries> {
    check_partition(series_length, regimes)?;
    let mut out = Vec::with_capacity(series_length);
    for r in regimes {
        out.extend(std::iter::repeat_n(r.value, r.len()));
    }
    TimeSeries::new(out)
}

/// Change-points implied by a regime partition (every start but the first).
pub fn change_indices(regimes: &[Regime]) -> Vec<usize> {
    regimes.iter().skip(1).map(|r| r.start).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regime(start: usize, end: usize, value: f64) -> Regime {
        Regime {
            start,
            end,
            kind: StatKind::Mean,
            value,
            shift_p_value: None,
            ci_low: None,
            ci_high: None,
        }
    }

    #[test]
    fn accepts_reference_parameter_sets() {
        assert!(validate_params(DetectionParams::new(0.05, 20)).is_ok());
        assert!(validate_params(DetectionParams::new(0.1, 15)).is_ok());
    }

    #[test]
    fn rejection_names_the_field() {
        let field_of = |p: DetectionParams| match validate_params(p) {
            Err(SrsdError::InvalidParam { field, .. }) => field,
            other => panic!("expected InvalidParam, got {other:?}"),
        };
        assert_eq!(field_of(DetectionParams::new(1.5, 20)), "p");
        assert_eq!(field_of(DetectionParams::new(0.0, 20)), "p");
        assert_eq!(field_of(DetectionParams::new(0.05, 2)), "l");
        let bad_m = DetectionParams::new(0.05, 20).with_prewhitening(Prewhitening::Ip4, 20);
        assert_eq!(field_of(bad_m), "m");
        let small_m = DetectionParams::new(0.05, 20).with_prewhitening(Prewhitening::Mpk, 4);
        assert_eq!(field_of(small_m), "m");
        // m is ignored without prewhitening
        let mut unused = DetectionParams::new(0.05, 20);
        unused.m = 0;
        assert!(validate_params(unused).is_ok());
    }

    #[test]
    fn stepwise_expansion() {
        let one = regimes_to_stepwise(4, &[regime(1, 4, 2.0)]).unwrap();
        assert_eq!(one.values(), &[2.0; 4]);
        let two = regimes_to_stepwise(4, &[regime(1, 2, 0.0), regime(3, 4, 5.0)]).unwrap();
        assert_eq!(two.values(), &[0.0, 0.0, 5.0, 5.0]);
    }

    #[test]
    fn stepwise_rejects_gaps_and_overlaps() {
        assert!(matches!(
            regimes_to_stepwise(3, &[regime(1, 2, 0.0)]),
            Err(SrsdError::BadPartition { .. })
        ));
        assert!(regimes_to_stepwise(4, &[regime(1, 2, 0.0), regime(2, 4, 1.0)]).is_err());
        assert!(regimes_to_stepwise(4, &[regime(1, 1, 0.0), regime(3, 4, 1.0)]).is_err());
    }

    #[test]
    fn series_validation() {
        assert!(matches!(
            TimeSeries::new(vec![1.0, f64::NAN]),
            Err(SrsdError::NonFinite { index: 2 })
        ));
        assert!(TimeSeries::with_labels(vec![1.0, 2.0], vec![1921.0, 1922.0]).is_ok());
        assert!(matches!(
            TimeSeries::with_labels(vec![1.0, 2.0, 3.0], vec![1.0, 3.0, 3.0]),
            Err(SrsdError::UnorderedLabels { index: 3 })
        ));
        assert!(TimeSeries::with_labels(vec![1.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn prewhitening_mode_parses() {
        assert_eq!("IP4".parse::<Prewhitening>().unwrap(), Prewhitening::Ip4);
        assert!("ar2".parse::<Prewhitening>().is_err());
    }
}
