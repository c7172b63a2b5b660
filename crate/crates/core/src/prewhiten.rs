//! Red-noise (AR(1)) estimation on short subsamples and its removal.
//!
//! The lag-1 coefficient is estimated by OLS on every sliding subsample of
//! length `m`, bias-corrected, and summarized by the median. Short subsamples
//! keep the estimate away from the regime shifts the detectors look for, at
//! the price of a strong negative small-sample bias that the corrections
//! remove.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SrsdError};
use crate::model::{Prewhitening, TimeSeries};

/// Bias correction applied to each subsample estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ar1Method {
    Ols,
    Mpk,
    Ip4,
}

impl Ar1Method {
    pub fn from_mode(mode: Prewhitening) -> Option<Self> {
        match mode {
            Prewhitening::None => None,
            Prewhitening::Mpk => Some(Self::Mpk),
            Prewhitening::Ip4 => Some(Self::Ip4),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ar1Estimate {
    pub alpha: f64,
    pub method: Ar1Method,
    pub m: usize,
    pub n_subsamples: usize,
    /// Set when the median fell outside (-0.99, 0.99) and was clamped.
    pub clamped: bool,
}

pub(crate) const ALPHA_LIMIT: f64 = 0.99;

/// OLS slope of `x[t+1]` on `x[t]` (with intercept); `None` for constant input.
pub fn ols_lag1(sample: &[f64]) -> Option<f64> {
    if sample.len() < 3 {
        return None;
    }
    let (lead, lag) = (&sample[..sample.len() - 1], &sample[1..]);
    let k = lead.len() as f64;
    let m_lead = lead.iter().sum::<f64>() / k;
    let m_lag = lag.iter().sum::<f64>() / k;
    let denom: f64 = lead.iter().map(|v| (v - m_lead) * (v - m_lead)).sum();
    if denom == 0.0 {
        return None;
    }
    let num: f64 = lead
        .iter()
        .zip(lag)
        .map(|(a, b)| (a - m_lead) * (b - m_lag))
        .sum();
    Some(num / denom)
}

/// Marriott–Pope/Kendall correction: inverts `E[a] ≈ α - (1 + 4α) / m`.
pub fn mpk_correct(alpha_ols: f64, m: usize) -> f64 {
    let m = m as f64;
    (m * alpha_ols + 1.0) / (m - 4.0)
}

/// Inverse-proportionality correction applied four times: a first `1/m`
/// shift for the bias of a white-noise sample, then three `|α|/m` steps for
/// the residual bias proportional to the coefficient itself.
pub fn ip4_correct(alpha_ols: f64, m: usize) -> f64 {
    let m = m as f64;
    let mut alpha = alpha_ols + 1.0 / m;
    for _ in 0..3 {
        alpha += alpha.abs() / m;
    }
    alpha
}

pub fn estimate_ar1(series: &TimeSeries, m: usize, method: Ar1Method) -> Result<Ar1Estimate> {
    ar1_from_values(series.values(), m, method)
}

pub(crate) fn ar1_from_values(x: &[f64], m: usize, method: Ar1Method) -> Result<Ar1Estimate> {
    if m < 5 {
        return Err(invalid(
            "m",
            format!("subsample size must be at least 5, got {m}"),
        ));
    }
    if x.len() < m {
        return Err(SrsdError::TooShort {
            required: m,
            actual: x.len(),
        });
    }
    let mut estimates: Vec<f64> = x
        .windows(m)
        .filter_map(ols_lag1)
        .map(|a| match method {
            Ar1Method::Ols => a,
            Ar1Method::Mpk => mpk_correct(a, m),
            Ar1Method::Ip4 => ip4_correct(a, m),
        })
        .collect();
    if estimates.is_empty() {
        return Err(SrsdError::ZeroVariance);
    }
    estimates.sort_by(f64::total_cmp);
    let k = estimates.len();
    let median = if k % 2 == 1 {
        estimates[k / 2]
    } else {
        0.5 * (estimates[k / 2 - 1] + estimates[k / 2])
    };
    let alpha = median.clamp(-ALPHA_LIMIT, ALPHA_LIMIT);
    Ok(Ar1Estimate {
        alpha,
        method,
        m,
        n_subsamples: k,
        clamped: alpha != median,
    })
}

/// `x[i+1] - alpha · x[i]`; the output is one observation shorter.
pub fn prewhiten(series: &TimeSeries, alpha: f64) -> Result<TimeSeries> {
    if !alpha.is_finite() || alpha.abs() >= 1.0 {
        return Err(invalid(
            "alpha",
            format!("must satisfy |alpha| < 1, got {alpha}"),
        ));
    }
    let v = series.values();
    if v.len() < 2 {
        return Err(SrsdError::TooShort {
            required: 2,
            actual: v.len(),
        });
    }
    let out = v.windows(2).map(|w| w[1] - alpha * w[0]).collect();
    Ok(series.derive_tail(out))
}
