//! Three-step detection of regime shifts in the correlation of two series.
//!
//! Step one removes regime shifts in the mean of each series, step two
//! normalizes each residual series by the standard deviation of its variance
//! regimes, and step three runs the variance detector on the sum and the
//! difference of the normalized series. For unit-variance inputs the variance
//! of `x + y` is `2(1 + r)` and that of `x - y` is `2(1 - r)`, so a shift in `r`
//! appears as opposite variance shifts in the two channels.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SrsdError};
use crate::mean_shift::{detect_mean, MeanShiftResult};
use crate::model::{validate_params, ChangePoint, DetectionParams, Regime, StatKind, TimeSeries};
use crate::prewhiten::{ar1_from_values, prewhiten, Ar1Estimate, Ar1Method};
use crate::stats::{fisher_ci, fisher_compare, mean_square, pearson};
use crate::variance_shift::{detect_variance, VarianceShiftResult};

/// Default confidence level of the reported correlation intervals.
pub const DEFAULT_CONFIDENCE: f64 = 0.90;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Sum,
    Diff,
}

/// One variance-channel change-point and what the merge did with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub source: Channel,
    pub index: usize,
    /// Fisher z-test p-value of the correlations on either side, when defined.
    pub p_value: Option<f64>,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub regimes: Vec<Regime>,
    pub change_points: Vec<ChangePoint>,
    pub candidates: Vec<CandidateRecord>,
    /// Variance detection on `x + y`; absent when the channel is identically zero.
    pub sum_channel: Option<VarianceShiftResult>,
    pub diff_channel: Option<VarianceShiftResult>,
}

impl CorrelationResult {
    pub fn change_indices(&self) -> Vec<usize> {
        self.change_points.iter().map(|c| c.index).collect()
    }
}

/// Pointwise sum and difference of two equally long series.
pub fn sum_diff_channels(
    x_norm: &TimeSeries,
    y_norm: &TimeSeries,
) -> Result<(TimeSeries, TimeSeries)> {
    check_lengths(x_norm, y_norm)?;
    let (x, y) = (x_norm.values(), y_norm.values());
    let sum = x.iter().zip(y).map(|(a, b)| a + b).collect();
    let diff = x.iter().zip(y).map(|(a, b)| a - b).collect();
    Ok((
        x_norm.derive(sum).named("sum"),
        x_norm.derive(diff).named("diff"),
    ))
}

/// Correlation implied by a sum-channel segment of unit-variance, zero-mean
/// inputs: `var(x + y) / 2 - 1`, with the variance taken as the mean square.
pub fn channel_implied_r(sum_segment: &[f64]) -> f64 {
    mean_square(sum_segment) / 2.0 - 1.0
}

fn check_lengths(x: &TimeSeries, y: &TimeSeries) -> Result<()> {
    if x.len() != y.len() {
        return Err(SrsdError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(())
}

pub fn detect_correlation(
    x_norm: &TimeSeries,
    y_norm: &TimeSeries,
    params: &DetectionParams,
) -> Result<CorrelationResult> {
    detect_correlation_with(x_norm, y_norm, params, DEFAULT_CONFIDENCE)
}

pub fn detect_correlation_with(
    x_norm: &TimeSeries,
    y_norm: &TimeSeries,
    params: &DetectionParams,
    confidence: f64,
) -> Result<CorrelationResult> {
    let params = validate_params(*params)?;
    let (sum, diff) = sum_diff_channels(x_norm, y_norm)?;
    let n = sum.len();
    if n < params.l {
        return Err(SrsdError::TooShort {
            required: params.l,
            actual: n,
        });
    }
    let degenerate = |s: &TimeSeries| s.values().iter().all(|&v| v == 0.0);
    if degenerate(&sum) || degenerate(&diff) {
        // r = ±1 throughout: one regime, no channel detection.
        let r = if degenerate(&diff) { 1.0 } else { -1.0 };
        return Ok(CorrelationResult {
            regimes: vec![Regime {
                start: 1,
                end: n,
                kind: StatKind::Correlation,
                value: r,
                shift_p_value: None,
                ci_low: Some(r),
                ci_high: Some(r),
            }],
            change_points: Vec::new(),
            candidates: Vec::new(),
            sum_channel: None,
            diff_channel: None,
        });
    }
    let sum_result = detect_variance(&sum, &params)?;
    let diff_result = detect_variance(&diff, &params)?;
    let (x, y) = (x_norm.values(), y_norm.values());
    let (accepted, candidates) = merge_candidates(
        x,
        y,
        &sum_result.change_points,
        &diff_result.change_points,
        params.l / 2,
    );
    let (regimes, change_points) = correlation_regimes(x, y, &accepted, confidence)?;
    Ok(CorrelationResult {
        regimes,
        change_points,
        candidates,
        sum_channel: Some(sum_result),
        diff_channel: Some(diff_result),
    })
}

struct Proposal {
    index: usize,
    index_value: f64,
    provisional: bool,
    sources: Vec<Channel>,
}

/// Fisher comparison of the correlations on `[left, c)` and `[c, right)`.
fn split_p_value(x: &[f64], y: &[f64], left: usize, c: usize, right: usize) -> Option<f64> {
    let a = (left - 1)..(c - 1);
    let b = (c - 1)..(right - 1);
    let r1 = pearson(&x[a.clone()], &y[a.clone()]).ok()?;
    let r2 = pearson(&x[b.clone()], &y[b.clone()]).ok()?;
    fisher_compare(r1, a.len(), r2, b.len())
        .ok()
        .map(|c| c.p_value)
}

/// Merges channel change-points into correlation change-points.
///
/// Candidates are clustered when consecutive ones lie within `window`
/// indices of each other. A cluster keeps the member with the lowest Fisher
/// p-value for the correlations between the previous accepted change-point
/// and the next cluster; members without a defined p-value lose to those with
/// one, and among undefined ones the earliest wins.
fn merge_candidates(
    x: &[f64],
    y: &[f64],
    sum_cps: &[ChangePoint],
    diff_cps: &[ChangePoint],
    window: usize,
) -> (Vec<ChangePoint>, Vec<CandidateRecord>) {
    let n = x.len();
    let mut proposals: Vec<Proposal> = Vec::new();
    let tagged = sum_cps
        .iter()
        .map(|c| (Channel::Sum, c))
        .chain(diff_cps.iter().map(|c| (Channel::Diff, c)));
    let mut sorted: Vec<(Channel, &ChangePoint)> = tagged.collect();
    sorted.sort_by_key(|(ch, c)| (c.index, *ch));
    for (channel, cp) in sorted {
        match proposals.last_mut() {
            Some(last) if last.index == cp.index => {
                last.sources.push(channel);
                last.provisional &= cp.provisional;
            }
            _ => proposals.push(Proposal {
                index: cp.index,
                index_value: cp.index_value,
                provisional: cp.provisional,
                sources: vec![channel],
            }),
        }
    }

    let mut clusters: Vec<Vec<Proposal>> = Vec::new();
    for p in proposals {
        match clusters.last_mut() {
            Some(cluster) if p.index - cluster.last().unwrap().index <= window => cluster.push(p),
            _ => clusters.push(vec![p]),
        }
    }

    let mut accepted: Vec<ChangePoint> = Vec::new();
    let mut records: Vec<CandidateRecord> = Vec::new();
    let mut left = 1;
    for k in 0..clusters.len() {
        let right = clusters.get(k + 1).map_or(n + 1, |next| next[0].index);
        let cluster = &clusters[k];
        let p_values: Vec<Option<f64>> = cluster
            .iter()
            .map(|p| split_p_value(x, y, left, p.index, right))
            .collect();
        let winner = p_values
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|p| (i, p)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map_or(0, |(i, _)| i);
        for (i, (p, pv)) in cluster.iter().zip(&p_values).enumerate() {
            for &source in &p.sources {
                records.push(CandidateRecord {
                    source,
                    index: p.index,
                    p_value: *pv,
                    accepted: i == winner,
                });
            }
        }
        let w = &cluster[winner];
        accepted.push(ChangePoint {
            index: w.index,
            index_value: w.index_value,
            p_value: None,
            provisional: w.provisional,
        });
        left = w.index;
    }
    (accepted, records)
}

/// Correlation regimes between accepted change-points, with Fisher p-values
/// for each shift and confidence intervals for each regime.
fn correlation_regimes(
    x: &[f64],
    y: &[f64],
    accepted: &[ChangePoint],
    confidence: f64,
) -> Result<(Vec<Regime>, Vec<ChangePoint>)> {
    let n = x.len();
    let mut starts = vec![1];
    starts.extend(accepted.iter().map(|c| c.index));
    let mut regimes: Vec<Regime> = Vec::with_capacity(starts.len());
    let mut defined = Vec::with_capacity(starts.len());
    for (k, &start) in starts.iter().enumerate() {
        let end = starts.get(k + 1).map_or(n, |s| s - 1);
        let span = (start - 1)..end;
        let r = pearson(&x[span.clone()], &y[span.clone()]).ok();
        let ci = match r {
            Some(r) => fisher_ci(r, span.len(), confidence).ok(),
            None => None,
        };
        let shift_p_value = match (k, r) {
            (0, _) | (_, None) => None,
            (_, Some(r)) => {
                let prev = &regimes[k - 1];
                if defined[k - 1] {
                    fisher_compare(prev.value, prev.len(), r, span.len())
                        .ok()
                        .map(|c| c.p_value)
                } else {
                    None
                }
            }
        };
        defined.push(r.is_some());
        regimes.push(Regime {
            start,
            end,
            kind: StatKind::Correlation,
            value: r.unwrap_or(0.0),
            shift_p_value,
            ci_low: ci.map(|c| c.0),
            ci_high: ci.map(|c| c.1),
        });
    }
    let change_points = accepted
        .iter()
        .zip(regimes.iter().skip(1))
        .map(|(c, r)| ChangePoint {
            p_value: r.shift_p_value,
            ..c.clone()
        })
        .collect();
    Ok((regimes, change_points))
}

/// Steps of the procedure that may be replaced by the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Step {
    Mean,
    Variance,
}

/// Options of a full three-step run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrsdOptions {
    /// Parameters of the mean and variance steps.
    pub params: DetectionParams,
    /// Overrides for the correlation step; defaults to `params`.
    pub correlation_params: Option<DetectionParams>,
    pub confidence: f64,
    pub skip: BTreeSet<Step>,
}

impl SrsdOptions {
    pub fn new(params: DetectionParams) -> Self {
        Self {
            params,
            correlation_params: None,
            confidence: DEFAULT_CONFIDENCE,
            skip: BTreeSet::new(),
        }
    }

    pub fn skipping(mut self, steps: impl IntoIterator<Item = Step>) -> Self {
        self.skip.extend(steps);
        self
    }
}

/// Everything the three-step procedure produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrsdResult {
    pub options: SrsdOptions,
    /// AR(1) estimates for x and y when prewhitening was applied.
    pub prewhitening: Option<[Ar1Estimate; 2]>,
    /// Series the detectors ran on (prewhitened when requested).
    pub x: TimeSeries,
    pub y: TimeSeries,
    pub mean_results: Option<[MeanShiftResult; 2]>,
    pub variance_results: Option<[VarianceShiftResult; 2]>,
    /// Inputs of the correlation step.
    pub x_normalized: TimeSeries,
    pub y_normalized: TimeSeries,
    pub correlation: CorrelationResult,
}

impl SrsdResult {
    pub fn correlation_regimes(&self) -> &[Regime] {
        &self.correlation.regimes
    }

    pub fn correlation_change_points(&self) -> &[ChangePoint] {
        &self.correlation.change_points
    }

    pub fn correlation_indices(&self) -> Vec<usize> {
        self.correlation.change_indices()
    }

    /// Offset to add to result indices to recover positions in the original
    /// input: prewhitening drops the first observation.
    pub fn index_offset(&self) -> usize {
        usize::from(self.prewhitening.is_some())
    }
}

pub fn run_srsd(x: &TimeSeries, y: &TimeSeries, params: &DetectionParams) -> Result<SrsdResult> {
    run_srsd_with(x, y, &SrsdOptions::new(*params))
}

/// Runs the procedure with the steps in `skip` replaced by the identity.
pub fn step_skipping_mode(
    x: &TimeSeries,
    y: &TimeSeries,
    params: &DetectionParams,
    skip: &[Step],
) -> Result<SrsdResult> {
    run_srsd_with(
        x,
        y,
        &SrsdOptions::new(*params).skipping(skip.iter().copied()),
    )
}

pub fn run_srsd_with(x: &TimeSeries, y: &TimeSeries, options: &SrsdOptions) -> Result<SrsdResult> {
    let params = validate_params(options.params)?;
    let corr_params = validate_params(options.correlation_params.unwrap_or(params))?;
    check_lengths(x, y)?;
    if x.len() < params.l {
        return Err(SrsdError::TooShort {
            required: params.l,
            actual: x.len(),
        });
    }

    let (x, y, prewhitening) = match Ar1Method::from_mode(params.prewhiten) {
        None => (x.clone(), y.clone(), None),
        Some(method) => {
            let ex = ar1_from_values(x.values(), params.m, method)?;
            let ey = ar1_from_values(y.values(), params.m, method)?;
            (
                prewhiten(x, ex.alpha)?,
                prewhiten(y, ey.alpha)?,
                Some([ex, ey]),
            )
        }
    };

    let mean_results = if options.skip.contains(&Step::Mean) {
        None
    } else {
        Some([detect_mean(&x, &params)?, detect_mean(&y, &params)?])
    };
    let (x_res, y_res) = match &mean_results {
        Some([mx, my]) => (mx.residuals.clone(), my.residuals.clone()),
        None => (x.clone(), y.clone()),
    };

    let variance_results = if options.skip.contains(&Step::Variance) {
        None
    } else {
        Some([
            detect_variance(&x_res, &params)?,
            detect_variance(&y_res, &params)?,
        ])
    };
    let (x_normalized, y_normalized) = match &variance_results {
        Some([vx, vy]) => (vx.normalized.clone(), vy.normalized.clone()),
        None => (x_res, y_res),
    };

    let correlation = detect_correlation_with(
        &x_normalized,
        &y_normalized,
        &corr_params,
        options.confidence,
    )?;
    Ok(SrsdResult {
        options: options.clone(),
        prewhitening,
        x,
        y,
        mean_results,
        variance_results,
        x_normalized,
        y_normalized,
        correlation,
    })
}
