//! Sequential F-test detection of regime shifts in the variance of residuals.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SrsdError};
use crate::model::{validate_params, ChangePoint, DetectionParams, Regime, StatKind, TimeSeries};
use crate::monitor::{MonitorState, MonitorStatus};
use crate::sequential::{build_regimes, scan, ShiftRule};
use crate::stats::f_quantile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceShiftResult {
    /// Regimes whose value is the mean square of the residuals.
    pub regimes: Vec<Regime>,
    pub change_points: Vec<ChangePoint>,
    /// Residuals divided by their regime's standard deviation.
    pub normalized: TimeSeries,
    /// Partial RSSI per index (zero where no test ran).
    pub rssi_trace: Vec<f64>,
    pub f_crit: f64,
}

impl VarianceShiftResult {
    pub fn change_indices(&self) -> Vec<usize> {
        self.change_points.iter().map(|c| c.index).collect()
    }

    pub fn confirmed_indices(&self) -> Vec<usize> {
        self.change_points
            .iter()
            .filter(|c| !c.provisional)
            .map(|c| c.index)
            .collect()
    }
}

/// Upper critical value of the two-sided F-test with `l - 1` and `l - 1`
/// degrees of freedom.
pub fn critical_f(params: &DetectionParams) -> Result<f64> {
    let params = validate_params(*params)?;
    f_quantile(1.0 - params.p / 2.0, params.l - 1, params.l - 1)
}

/// `(up, down)` critical variances around `current_var`.
pub fn critical_variances(current_var: f64, params: &DetectionParams) -> Result<(f64, f64)> {
    if !current_var.is_finite() || current_var <= 0.0 {
        return Err(invalid("current_var", "must be finite and positive"));
    }
    let f = critical_f(params)?;
    Ok((current_var * f, current_var / f))
}

pub fn variance_rule(params: &DetectionParams) -> Result<ShiftRule> {
    Ok(ShiftRule::Variance {
        f_crit: critical_f(params)?,
        scale: 1.0 / params.l as f64,
    })
}

/// Detects variance regimes in zero-mean residuals and normalizes each regime
/// to unit mean square.
pub fn detect_variance(
    residuals: &TimeSeries,
    params: &DetectionParams,
) -> Result<VarianceShiftResult> {
    let params = validate_params(*params)?;
    let x = residuals.values();
    if x.len() < params.l {
        return Err(SrsdError::TooShort {
            required: params.l,
            actual: x.len(),
        });
    }
    if x.iter().all(|&v| v == 0.0) {
        return Err(SrsdError::ZeroVariance);
    }
    let rule = variance_rule(&params)?;
    let squares: Vec<f64> = x.iter().map(|v| v * v).collect();
    let outcome = scan(&rule, &squares, params.l);
    let mut change_points = outcome.change_points;
    let regimes = build_regimes(StatKind::Variance, x, &mut change_points);
    let normalized = normalize_by_regime(x, &regimes);
    let f_crit = match rule {
        ShiftRule::Variance { f_crit, .. } => f_crit,
        ShiftRule::Mean { .. } => unreachable!(),
    };
    Ok(VarianceShiftResult {
        regimes,
        change_points,
        normalized: residuals.derive(normalized),
        rssi_trace: outcome.trace,
        f_crit,
    })
}

/// An all-zero regime (e.g. a one-point tail left by the mean step) stays zero.
fn normalize_by_regime(x: &[f64], regimes: &[Regime]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    for r in regimes {
        let span = &x[r.start - 1..r.end];
        if r.value > 0.0 {
            let sd = r.value.sqrt();
            out.extend(span.iter().map(|v| v / sd));
        } else {
            out.extend(span);
        }
    }
    out
}

pub fn variance_monitor(history: &[f64], params: &DetectionParams) -> Result<MonitorState> {
    let params = validate_params(*params)?;
    MonitorState::new(variance_rule(&params)?, params.l, history)
}

/// Feeds one residual to a variance monitor.
pub fn monitor_variance(state: &mut MonitorState, new_value: f64) -> Result<MonitorStatus> {
    if !matches!(state.rule(), ShiftRule::Variance { .. }) {
        return Err(invalid("state", "not a variance monitor"));
    }
    state.advance(new_value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_variance_values() {
        let p = DetectionParams::new(0.05, 20);
        let (up, down) = critical_variances(1.0, &p).unwrap();
        assert!((up - 2.526).abs() < 1e-3, "{up}");
        assert!((down - 0.3959).abs() < 1e-4, "{down}");
        let (up4, _) = critical_variances(4.0, &p).unwrap();
        assert!((up4 - 4.0 * up).abs() < 1e-12);
        assert!((up4 - 10.105).abs() < 5e-3);
        assert!(critical_variances(0.0, &p).is_err());
        assert!(critical_variances(-1.0, &p).is_err());
    }

    #[test]
    fn weak_significance_collapses_band() {
        let p = DetectionParams::new(0.999_999, 20);
        let (up, down) = critical_variances(3.0, &p).unwrap();
        assert!((up - 3.0).abs() < 1e-4 && (down - 3.0).abs() < 1e-4);
        assert!(up > 3.0 && down < 3.0);
    }

    #[test]
    fn all_zero_input_is_an_error() {
        let r = detect_variance(
            &TimeSeries::new(vec![0.0; 30]).unwrap(),
            &DetectionParams::new(0.05, 10),
        );
        assert_eq!(r, Err(SrsdError::ZeroVariance));
    }

    #[test]
    fn zero_tail_regime_is_left_at_zero() {
        let regimes = [
            Regime {
                start: 1,
                end: 2,
                kind: StatKind::Variance,
                value: 4.0,
                shift_p_value: None,
                ci_low: None,
                ci_high: None,
            },
            Regime {
                start: 3,
                end: 3,
                kind: StatKind::Variance,
                value: 0.0,
                shift_p_value: None,
                ci_low: None,
                ci_high: None,
            },
        ];
        assert_eq!(
            normalize_by_regime(&[2.0, -2.0, 0.0], &regimes),
            vec![1.0, -1.0, 0.0]
        );
    }

    #[test]
    fn alternating_signs_single_regime() {
        let v: Vec<f64> = (0..40)
            .map(|i| if i % 2 == 0 { 2.0 } else { -2.0 })
            .collect();
        let r = detect_variance(
            &TimeSeries::new(v).unwrap(),
            &DetectionParams::new(0.05, 10),
        )
        .unwrap();
        assert!(r.change_points.is_empty());
        assert!((r.regimes[0].value - 4.0).abs() < 1e-15);
        assert!(r
            .normalized
            .values()
            .iter()
            .all(|v| (v.abs() - 1.0).abs() < 1e-15));
    }
}
