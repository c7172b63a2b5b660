//! Sequential regime-shift scan shared by the mean and variance detectors.
//!
//! Both detectors follow the same scheme on a transformed sequence `v`
//! (the raw values for the mean, their squares for the variance):
//!
//! 1. The current regime level is the average of `v` over the last `l`
//!    points of the regime. The first regime is bootstrapped from the first
//!    `l` points, and that estimate is used until the scan passes index `l`.
//! 2. A point outside the critical band `[down, up]` around the level opens a
//!    candidate change-point. Points exactly on a bound are inside.
//! 3. The shift index accumulates `scale * (v_k - critical)` over the
//!    candidate and up to `l - 1` following points. A sign reversal rejects
//!    the candidate: it joins the current regime and the scan resumes at the
//!    next point. Keeping the sign over all `l` points confirms it.
//! 4. After a confirmation the scan resumes `l` points after the change-point,
//!    so the new level is estimated from exactly the points that confirmed it.
//!
//! A candidate whose test window runs past the end of the series is confirmed
//! as provisional when its index keeps the sign up to the last observation.

use serde::{Deserialize, Serialize};

use crate::model::{ChangePoint, Regime, StatKind, MIN_POINTS_FOR_P_VALUE};
use crate::stats::{f_ratio_p_value, mean, two_sample_t_p_value};

/// Direction of a candidate shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub(crate) fn sign(self) -> f64 {
        match self {
            Direction::Up => 1.0,
            Direction::Down => -1.0,
        }
    }
}

/// Critical band and index normalization for one kind of statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ShiftRule {
    /// Shifts in the mean: band `level ± delta`, index scaled by `1 / (l s̄_l)`.
    Mean { delta: f64, scale: f64 },
    /// Shifts in the variance of centered data: band `level · F_cr^{±1}`,
    /// index scaled by `1 / l`.
    Variance { f_crit: f64, scale: f64 },
}

impl ShiftRule {
    pub fn kind(&self) -> StatKind {
        match self {
            ShiftRule::Mean { .. } => StatKind::Mean,
            ShiftRule::Variance { .. } => StatKind::Variance,
        }
    }

    pub(crate) fn transform(&self, x: f64) -> f64 {
        match self {
            ShiftRule::Mean { .. } => x,
            ShiftRule::Variance { .. } => x * x,
        }
    }

    /// `(down, up)` critical levels around the current regime level.
    pub(crate) fn band(&self, level: f64) -> (f64, f64) {
        match *self {
            ShiftRule::Mean { delta, .. } => (level - delta, level + delta),
            ShiftRule::Variance { f_crit, .. } => (level / f_crit, level * f_crit),
        }
    }

    pub(crate) fn scale(&self) -> f64 {
        match *self {
            ShiftRule::Mean { scale, .. } | ShiftRule::Variance { scale, .. } => scale,
        }
    }

    /// Classifies a transformed value against the band.
    pub(crate) fn classify(&self, level: f64, v: f64) -> Option<(Direction, f64)> {
        let (down, up) = self.band(level);
        if v > up {
            Some((Direction::Up, up))
        } else if v < down {
            Some((Direction::Down, down))
        } else {
            None
        }
    }
}

pub(crate) struct ScanOutcome {
    pub change_points: Vec<ChangePoint>,
    /// Partial index per position, from the last test that visited it.
    pub trace: Vec<f64>,
}

/// Batch scan over transformed values `v` (0-based internally).
pub(crate) fn scan(rule: &ShiftRule, v: &[f64], l: usize) -> ScanOutcome {
    let n = v.len();
    debug_assert!(n >= l);
    let scale = rule.scale();
    let bootstrap = mean(&v[..l]);
    let mut trace = vec![0.0; n];
    let mut change_points = Vec::new();
    let mut i = 1;
    while i < n {
        let level = if i < l { bootstrap } else { mean(&v[i - l..i]) };
        let Some((dir, critical)) = rule.classify(level, v[i]) else {
            i += 1;
            continue;
        };
        let end = (i + l).min(n);
        let mut index = 0.0;
        let mut held = true;
        for k in i..end {
            index += (v[k] - critical) * scale;
            trace[k] = index;
            if index * dir.sign() < 0.0 {
                held = false;
                break;
            }
        }
        if held {
            change_points.push(ChangePoint {
                index: i + 1,
                index_value: index,
                p_value: None,
                provisional: end - i < l,
            });
            i += l;
        } else {
            i += 1;
        }
    }
    ScanOutcome {
        change_points,
        trace,
    }
}

/// Builds the regime partition for `change_points` over `raw` values, filling
/// regime values and shift p-values (also copied onto the change-points).
pub(crate) fn build_regimes(
    kind: StatKind,
    raw: &[f64],
    change_points: &mut [ChangePoint],
) -> Vec<Regime> {
    let n = raw.len();
    let mut bounds: Vec<usize> = vec![1];
    bounds.extend(change_points.iter().map(|c| c.index));
    let mut regimes: Vec<Regime> = Vec::with_capacity(bounds.len());
    for (k, &start) in bounds.iter().enumerate() {
        let end = bounds.get(k + 1).map_or(n, |next| next - 1);
        let span = &raw[start - 1..end];
        let value = regime_value(kind, span);
        let shift_p_value = if k == 0 {
            None
        } else {
            let prev = &regimes[k - 1];
            shift_p_value(kind, &raw[prev.start - 1..prev.end], span)
        };
        regimes.push(Regime {
            start,
            end,
            kind,
            value,
            shift_p_value,
            ci_low: None,
            ci_high: None,
        });
    }
    for (cp, regime) in change_points.iter_mut().zip(regimes.iter().skip(1)) {
        cp.p_value = regime.shift_p_value;
    }
    regimes
}

pub(crate) fn regime_value(kind: StatKind, span: &[f64]) -> f64 {
    match kind {
        StatKind::Variance => crate::stats::mean_square(span),
        _ => mean(span),
    }
}

pub(crate) fn shift_p_value(kind: StatKind, before: &[f64], after: &[f64]) -> Option<f64> {
    if before.len() < MIN_POINTS_FOR_P_VALUE || after.len() < MIN_POINTS_FOR_P_VALUE {
        return None;
    }
    match kind {
        StatKind::Mean => two_sample_t_p_value(before, after),
        StatKind::Variance => f_ratio_p_value(
            crate::stats::mean_square(after),
            after.len() - 1,
            crate::stats::mean_square(before),
            before.len() - 1,
        ),
        StatKind::Correlation => None,
    }
}
