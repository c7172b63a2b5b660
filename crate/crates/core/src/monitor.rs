//! Point-by-point monitoring with the same decision rules as the batch scan.
//!
//! Points that arrive while a candidate is under test are buffered. When the
//! candidate is rejected, the candidate point joins the current regime and the
//! buffered points are re-examined in order, exactly as the batch scan resumes
//! right after a rejected candidate.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SrsdError};
use crate::model::{ChangePoint, Regime, StatKind, MIN_POINTS_FOR_P_VALUE};
use crate::sequential::{Direction, ShiftRule};
use crate::stats::{f_ratio_p_value, student_t_two_sided};

/// Running count, mean and centered sum of squares (Welford).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningStats {
    pub count: usize,
    pub mean: f64,
    pub m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn sample_variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }
}

/// Candidate change-point under test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendingShift {
    /// 1-based index of the candidate.
    pub index: usize,
    pub direction: Direction,
    pub critical: f64,
    /// Partial RSI / RSSI accumulated so far.
    pub index_value: f64,
    /// Raw observations from the candidate onward; `len()` is the number of
    /// points tested so far and stays below `l`.
    pub buffer: Vec<f64>,
}

impl PendingShift {
    pub fn points_tested(&self) -> usize {
        self.buffer.len()
    }
}

/// Result of feeding one observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum MonitorStatus {
    Stable,
    Candidate { index: usize, partial_index: f64 },
    Confirmed(ChangePoint),
}

/// Resumable state of a mean or variance monitor for one stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorState {
    rule: ShiftRule,
    l: usize,
    /// Number of observations consumed.
    seen: usize,
    bootstrap_level: f64,
    /// Transformed values of the last `l` points of the current regime.
    window: VecDeque<f64>,
    current_start: usize,
    /// Stats of the raw values of the current regime.
    pub current_regime_stats: RunningStats,
    /// Mean of squared raw values of the current regime.
    current_mean_square: f64,
    previous: Option<(RunningStats, f64)>,
    pub regimes_so_far: Vec<Regime>,
    pub change_points: Vec<ChangePoint>,
    pub pending: Option<PendingShift>,
}

impl MonitorState {
    /// Starts a monitor whose first regime is bootstrapped from `history`
    /// (at least `l` observations), which is then scanned like any other data.
    pub fn new(rule: ShiftRule, l: usize, history: &[f64]) -> Result<Self> {
        if history.len() < l {
            return Err(SrsdError::TooShort {
                required: l,
                actual: history.len(),
            });
        }
        let bootstrap_level =
            history[..l].iter().map(|&x| rule.transform(x)).sum::<f64>() / l as f64;
        let mut state = Self {
            rule,
            l,
            seen: 0,
            bootstrap_level,
            window: VecDeque::with_capacity(l + 1),
            current_start: 1,
            current_regime_stats: RunningStats::default(),
            current_mean_square: 0.0,
            previous: None,
            regimes_so_far: Vec::new(),
            change_points: Vec::new(),
            pending: None,
        };
        for &x in history {
            state.advance(x)?;
        }
        Ok(state)
    }

    pub fn rule(&self) -> &ShiftRule {
        &self.rule
    }

    pub fn observations(&self) -> usize {
        self.seen
    }

    /// Feeds the next observation.
    pub fn advance(&mut self, x: f64) -> Result<MonitorStatus> {
        if !x.is_finite() {
            return Err(SrsdError::NonFinite {
                index: self.seen + 1,
            });
        }
        self.seen += 1;
        let mut status = MonitorStatus::Stable;
        let mut queue: VecDeque<(usize, f64)> = VecDeque::from([(self.seen, x)]);
        while let Some((index, x)) = queue.pop_front() {
            if let Some(confirmed) = self.step(index, x, &mut queue) {
                status = MonitorStatus::Confirmed(confirmed);
            }
        }
        if let Some(p) = &self.pending {
            status = MonitorStatus::Candidate {
                index: p.index,
                partial_index: p.index_value,
            };
        }
        Ok(status)
    }

    fn step(
        &mut self,
        index: usize,
        x: f64,
        queue: &mut VecDeque<(usize, f64)>,
    ) -> Option<ChangePoint> {
        let v = self.rule.transform(x);
        if let Some(mut pending) = self.pending.take() {
            pending.index_value += (v - pending.critical) * self.rule.scale();
            pending.buffer.push(x);
            if pending.index_value * pending.direction.sign() < 0.0 {
                let mut rest = pending.buffer.into_iter();
                let candidate = rest.next().expect("buffer holds the candidate");
                self.absorb(candidate);
                for (k, y) in rest.enumerate().rev() {
                    queue.push_front((pending.index + 1 + k, y));
                }
                return None;
            }
            if pending.buffer.len() == self.l {
                return Some(self.confirm(pending, false));
            }
            self.pending = Some(pending);
            return None;
        }
        if index == 1 {
            self.absorb(x);
            return None;
        }
        let level = if index <= self.l {
            self.bootstrap_level
        } else {
            self.window.iter().sum::<f64>() / self.window.len() as f64
        };
        match self.rule.classify(level, v) {
            None => self.absorb(x),
            Some((direction, critical)) => {
                self.pending = Some(PendingShift {
                    index,
                    direction,
                    critical,
                    index_value: (v - critical) * self.rule.scale(),
                    buffer: vec![x],
                });
            }
        }
        None
    }

    fn absorb(&mut self, x: f64) {
        self.window.push_back(self.rule.transform(x));
        if self.window.len() > self.l {
            self.window.pop_front();
        }
        self.current_regime_stats.push(x);
        let n = self.current_regime_stats.count as f64;
        self.current_mean_square += (x * x - self.current_mean_square) / n;
    }

    fn confirm(&mut self, pending: PendingShift, provisional: bool) -> ChangePoint {
        self.close_current(pending.index - 1);
        self.current_start = pending.index;
        self.current_regime_stats = RunningStats::default();
        self.current_mean_square = 0.0;
        self.window.clear();
        for &x in &pending.buffer {
            self.absorb(x);
        }
        let cp = ChangePoint {
            index: pending.index,
            index_value: pending.index_value,
            p_value: None,
            provisional,
        };
        self.change_points.push(cp.clone());
        cp
    }

    /// Closes the current regime at `end`, computing the p-value of the shift into it.
    fn close_current(&mut self, end: usize) {
        let kind = self.rule.kind();
        let stats = self.current_regime_stats;
        let ms = self.current_mean_square;
        let value = match kind {
            StatKind::Variance => ms,
            _ => stats.mean,
        };
        let shift_p_value = self
            .previous
            .and_then(|(prev, prev_ms)| running_shift_p_value(kind, &prev, prev_ms, &stats, ms));
        if let Some(last) = self.change_points.last_mut() {
            if last.index == self.current_start {
                last.p_value = shift_p_value;
            }
        }
        self.regimes_so_far.push(Regime {
            start: self.current_start,
            end,
            kind,
            value,
            shift_p_value,
            ci_low: None,
            ci_high: None,
        });
        self.previous = Some((stats, ms));
    }

    /// Ends the stream: a pending candidate that kept its sign becomes a
    /// provisional change-point, and the open regime is closed.
    pub fn finish(mut self) -> (Vec<Regime>, Vec<ChangePoint>) {
        if let Some(pending) = self.pending.take() {
            self.confirm(pending, true);
        }
        let end = self.seen;
        self.close_current(end);
        (self.regimes_so_far, self.change_points)
    }
}

fn running_shift_p_value(
    kind: StatKind,
    before: &RunningStats,
    before_ms: f64,
    after: &RunningStats,
    after_ms: f64,
) -> Option<f64> {
    if before.count < MIN_POINTS_FOR_P_VALUE || after.count < MIN_POINTS_FOR_P_VALUE {
        return None;
    }
    let (na, nb) = (before.count as f64, after.count as f64);
    match kind {
        StatKind::Mean => {
            let pooled = (before.m2 + after.m2) / (na + nb - 2.0);
            let diff = before.mean - after.mean;
            if pooled == 0.0 {
                return Some(if diff == 0.0 { 1.0 } else { f64::MIN_POSITIVE });
            }
            let t = diff / (pooled * (1.0 / na + 1.0 / nb)).sqrt();
            student_t_two_sided(t, before.count + after.count - 2)
                .ok()
                .map(|p| p.max(f64::MIN_POSITIVE))
        }
        StatKind::Variance => {
            f_ratio_p_value(after_ms, after.count - 1, before_ms, before.count - 1)
        }
        StatKind::Correlation => None,
    }
}
