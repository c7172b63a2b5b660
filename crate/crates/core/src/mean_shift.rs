//! Sequential t-test detection of regime shifts in the mean.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SrsdError};
use crate::model::{validate_params, ChangePoint, DetectionParams, Regime, StatKind, TimeSeries};
use crate::monitor::{MonitorState, MonitorStatus};
use crate::sequential::{build_regimes, scan, ShiftRule};
use crate::stats::{avg_window_variance, student_t_quantile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanShiftResult {
    pub regimes: Vec<Regime>,
    pub change_points: Vec<ChangePoint>,
    /// Input minus the stepwise regime means.
    pub residuals: TimeSeries,
    /// Partial RSI per index (zero where no test ran).
    pub rsi_trace: Vec<f64>,
    /// Average variance of running `l`-point windows.
    pub avg_variance: f64,
    /// Half-width of the critical band around the regime mean.
    pub delta: f64,
}

impl MeanShiftResult {
    pub fn change_indices(&self) -> Vec<usize> {
        self.change_points.iter().map(|c| c.index).collect()
    }

    /// Indices of change-points whose test window completed.
    pub fn confirmed_indices(&self) -> Vec<usize> {
        self.change_points
            .iter()
            .filter(|c| !c.provisional)
            .map(|c| c.index)
            .collect()
    }
}

/// Critical difference between regime means: `t · sqrt(2 s̄² / l)`, with `t`
/// the two-sided Student quantile on `2l - 2` degrees of freedom.
pub fn threshold_delta(params: &DetectionParams, avg_var: f64) -> Result<f64> {
    let params = validate_params(*params)?;
    if !avg_var.is_finite() || avg_var < 0.0 {
        return Err(invalid("avg_var", "must be finite and non-negative"));
    }
    let t = student_t_quantile(1.0 - params.p / 2.0, 2 * params.l - 2)?;
    Ok(t * (2.0 * avg_var / params.l as f64).sqrt())
}

/// Decision rule for a series whose running-window variance is `avg_var`.
pub fn mean_rule(params: &DetectionParams, avg_var: f64) -> Result<ShiftRule> {
    let delta = threshold_delta(params, avg_var)?;
    let sd = avg_var.sqrt();
    let denom = if sd > 0.0 {
        params.l as f64 * sd
    } else {
        params.l as f64
    };
    Ok(ShiftRule::Mean {
        delta,
        scale: 1.0 / denom,
    })
}

pub fn detect_mean(series: &TimeSeries, params: &DetectionParams) -> Result<MeanShiftResult> {
    let params = validate_params(*params)?;
    let x = series.values();
    if x.len() < params.l {
        return Err(SrsdError::TooShort {
            required: params.l,
            actual: x.len(),
        });
    }
    let avg_variance = avg_window_variance(x, params.l)?;
    let rule = mean_rule(&params, avg_variance)?;
    let outcome = scan(&rule, x, params.l);
    let mut change_points = outcome.change_points;
    let regimes = build_regimes(StatKind::Mean, x, &mut change_points);
    let residuals = residuals_from(x, &regimes);
    Ok(MeanShiftResult {
        regimes,
        change_points,
        residuals: series.derive(residuals),
        rsi_trace: outcome.trace,
        avg_variance,
        delta: match rule {
            ShiftRule::Mean { delta, .. } => delta,
            ShiftRule::Variance { .. } => unreachable!(),
        },
    })
}

fn residuals_from(x: &[f64], regimes: &[Regime]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    for r in regimes {
        out.extend(x[r.start - 1..r.end].iter().map(|v| v - r.value));
    }
    out
}

/// Starts a mean monitor from historical observations. `avg_var` fixes the
/// band width; pass the running-window variance of the history (or of a
/// longer reference period).
pub fn mean_monitor(
    history: &[f64],
    avg_var: f64,
    params: &DetectionParams,
) -> Result<MonitorState> {
    let params = validate_params(*params)?;
    MonitorState::new(mean_rule(&params, avg_var)?, params.l, history)
}

/// Feeds one observation to a mean monitor.
pub fn monitor_mean(state: &mut MonitorState, new_value: f64) -> Result<MonitorStatus> {
    if !matches!(state.rule(), ShiftRule::Mean { .. }) {
        return Err(invalid("state", "not a mean monitor"));
    }
    state.advance(new_value)
}
