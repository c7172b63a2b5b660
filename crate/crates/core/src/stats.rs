//! Distribution functions and correlation statistics used by the detectors.
//!
//! The incomplete beta and complementary error functions come from `statrs`;
//! quantiles are obtained here by bracketing and bisecting the matching tail
//! probability, which keeps the relative accuracy near 1e-15 even far out in
//! the tails.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc;

use crate::error::{invalid, Result, SrsdError};
use crate::model::TimeSeries;

fn check_prob(prob: f64) -> Result<()> {
    if prob > 0.0 && prob < 1.0 {
        Ok(())
    } else {
        Err(invalid("prob", format!("must lie in (0, 1), got {prob}")))
    }
}

fn check_df(field: &'static str, df: usize) -> Result<()> {
    if df >= 1 {
        Ok(())
    } else {
        Err(invalid(field, "degrees of freedom must be at least 1"))
    }
}

/// Solves `tail(q) = target` for `q > 0`, where `tail` decreases from 1 at 0.
fn invert_decreasing(target: f64, tail: impl Fn(f64) -> f64) -> f64 {
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    while tail(hi) > target {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return f64::MAX;
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if tail(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Upper tail P(Z > z) of the standard normal.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

pub fn normal_cdf(z: f64) -> f64 {
    normal_sf(-z)
}

/// Two-sided tail P(|Z| > |z|).
pub fn normal_two_sided(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

pub fn normal_quantile(prob: f64) -> Result<f64> {
    check_prob(prob)?;
    Ok(if prob == 0.5 {
        0.0
    } else if prob > 0.5 {
        invert_decreasing(1.0 - prob, normal_sf)
    } else {
        -invert_decreasing(prob, normal_sf)
    })
}

/// Upper tail of Student's t for `t >= 0`.
fn t_upper(t: f64, df: f64) -> f64 {
    0.5 * beta_reg(0.5 * df, 0.5, df / (df + t * t))
}

pub fn student_t_cdf(t: f64, df: usize) -> Result<f64> {
    check_df("df", df)?;
    let upper = t_upper(t.abs(), df as f64);
    Ok(if t >= 0.0 { 1.0 - upper } else { upper })
}

/// Two-sided tail probability P(|T| > |t|).
pub fn student_t_two_sided(t: f64, df: usize) -> Result<f64> {
    check_df("df", df)?;
    Ok((2.0 * t_upper(t.abs(), df as f64)).min(1.0))
}

/// Inverse CDF of Student's t distribution.
pub fn student_t_quantile(prob: f64, df: usize) -> Result<f64> {
    check_prob(prob)?;
    check_df("df", df)?;
    let df = df as f64;
    Ok(if prob == 0.5 {
        0.0
    } else if prob > 0.5 {
        invert_decreasing(1.0 - prob, |t| t_upper(t, df))
    } else {
        -invert_decreasing(prob, |t| t_upper(t, df))
    })
}

fn f_lower(x: f64, d1: f64, d2: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        beta_reg(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2))
    }
}

fn f_upper(x: f64, d1: f64, d2: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        beta_reg(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * x))
    }
}

pub fn f_cdf(x: f64, df1: usize, df2: usize) -> Result<f64> {
    check_df("df1", df1)?;
    check_df("df2", df2)?;
    Ok(f_lower(x, df1 as f64, df2 as f64))
}

pub fn f_sf(x: f64, df1: usize, df2: usize) -> Result<f64> {
    check_df("df1", df1)?;
    check_df("df2", df2)?;
    Ok(f_upper(x, df1 as f64, df2 as f64))
}

/// Inverse CDF of the F distribution.
pub fn f_quantile(prob: f64, df1: usize, df2: usize) -> Result<f64> {
    check_prob(prob)?;
    check_df("df1", df1)?;
    check_df("df2", df2)?;
    let (d1, d2) = (df1 as f64, df2 as f64);
    if prob > 0.5 {
        Ok(invert_decreasing(1.0 - prob, |x| f_upper(x, d1, d2)))
    } else {
        // The lower quantile of F(d1, d2) is the reciprocal of the upper one of F(d2, d1).
        Ok(1.0 / invert_decreasing(prob, |x| f_upper(x, d2, d1)))
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample variance with denominator `n - 1`.
pub fn sample_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() as f64 - 1.0)
}

pub fn mean_square(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64
}

/// Mean of the sample variances of every contiguous `l`-point window.
pub fn running_avg_variance(series: &TimeSeries, l: usize) -> Result<f64> {
    avg_window_variance(series.values(), l)
}

pub(crate) fn avg_window_variance(values: &[f64], l: usize) -> Result<f64> {
    if l < 2 {
        return Err(invalid("l", "window must hold at least 2 points"));
    }
    if values.len() < l {
        return Err(SrsdError::TooShort {
            required: l,
            actual: values.len(),
        });
    }
    let windows = values.windows(l);
    let count = windows.len() as f64;
    Ok(windows.map(sample_variance).sum::<f64>() / count)
}

/// Pearson product-moment correlation.
pub fn pearson_r(x: &TimeSeries, y: &TimeSeries) -> Result<f64> {
    pearson(x.values(), y.values())
}

pub(crate) fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(SrsdError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(SrsdError::TooShort {
            required: 2,
            actual: x.len(),
        });
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(SrsdError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Outcome of a two-sample Fisher r-to-z comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationComparison {
    pub r1: f64,
    pub n1: usize,
    pub r2: f64,
    pub n2: usize,
    pub z_statistic: f64,
    /// Two-sided normal tail probability of `z_statistic`.
    pub p_value: f64,
}

fn fisher_z(r: f64) -> Result<f64> {
    if !r.is_finite() || r.abs() > 1.0 {
        return Err(invalid(
            "r",
            format!("correlation must lie in [-1, 1], got {r}"),
        ));
    }
    if r.abs() == 1.0 {
        return Err(SrsdError::PerfectCorrelation);
    }
    Ok(r.atanh())
}

fn check_fisher_n(n: usize) -> Result<()> {
    if n < 4 {
        Err(SrsdError::TooShort {
            required: 4,
            actual: n,
        })
    } else {
        Ok(())
    }
}

/// Tests whether two independent sample correlations differ.
pub fn fisher_compare(r1: f64, n1: usize, r2: f64, n2: usize) -> Result<CorrelationComparison> {
    check_fisher_n(n1)?;
    check_fisher_n(n2)?;
    let (z1, z2) = (fisher_z(r1)?, fisher_z(r2)?);
    let se = (1.0 / (n1 as f64 - 3.0) + 1.0 / (n2 as f64 - 3.0)).sqrt();
    let z_statistic = (z1 - z2) / se;
    let p_value = normal_two_sided(z_statistic).clamp(f64::MIN_POSITIVE, 1.0);
    Ok(CorrelationComparison {
        r1,
        n1,
        r2,
        n2,
        z_statistic,
        p_value,
    })
}

/// Confidence interval for a correlation via the Fisher transform.
pub fn fisher_ci(r: f64, n: usize, confidence: f64) -> Result<(f64, f64)> {
    check_fisher_n(n)?;
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(invalid("confidence", "must lie in (0, 1)"));
    }
    let z = fisher_z(r)?;
    let half = normal_quantile(0.5 * (1.0 + confidence))? / (n as f64 - 3.0).sqrt();
    Ok(((z - half).tanh(), (z + half).tanh()))
}

/// `x[i+1] - x[i]` for every consecutive pair.
pub fn first_differences(series: &TimeSeries) -> Result<TimeSeries> {
    let v = series.values();
    if v.len() < 2 {
        return Err(SrsdError::TooShort {
            required: 2,
            actual: v.len(),
        });
    }
    let diffs = v.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(series.derive_tail(diffs))
}

/// Pearson r over every `window`-point span; `None` where a window is constant.
pub fn running_correlation(
    x: &TimeSeries,
    y: &TimeSeries,
    window: usize,
) -> Result<Vec<Option<f64>>> {
    if x.len() != y.len() {
        return Err(SrsdError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if window < 2 {
        return Err(invalid("window", "must be at least 2"));
    }
    if x.len() < window {
        return Err(SrsdError::TooShort {
            required: window,
            actual: x.len(),
        });
    }
    Ok(x.values()
        .windows(window)
        .zip(y.values().windows(window))
        .map(|(a, b)| pearson(a, b).ok())
        .collect())
}

/// Pooled-variance two-sample t-test on means; returns the two-sided p-value.
pub fn two_sample_t_p_value(a: &[f64], b: &[f64]) -> Option<f64> {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    if a.len() < 2 || b.len() < 2 {
        return None;
    }
    let pooled =
        ((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / (na + nb - 2.0);
    let diff = mean(a) - mean(b);
    if pooled == 0.0 {
        return Some(if diff == 0.0 { 1.0 } else { f64::MIN_POSITIVE });
    }
    let t = diff / (pooled * (1.0 / na + 1.0 / nb)).sqrt();
    student_t_two_sided(t, a.len() + b.len() - 2)
        .ok()
        .map(|p| p.max(f64::MIN_POSITIVE))
}

/// Two-sided F-test on the ratio of two variance estimates.
pub fn f_ratio_p_value(var_a: f64, df_a: usize, var_b: f64, df_b: usize) -> Option<f64> {
    if df_a < 1 || df_b < 1 || var_a <= 0.0 || var_b <= 0.0 {
        return None;
    }
    let (d1, d2) = (df_a as f64, df_b as f64);
    let ratio = var_a / var_b;
    let tail = f_lower(ratio, d1, d2).min(f_upper(ratio, d1, d2));
    Some((2.0 * tail).clamp(f64::MIN_POSITIVE, 1.0))
}
