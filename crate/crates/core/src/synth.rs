//! Seeded bivariate normal series with piecewise correlation, variance and mean.
//!
//! Random numbers come from ChaCha8 (`rand_chacha`) seeded with
//! `seed_from_u64`, and normal variates from `rand_distr::StandardNormal`
//! (ziggurat). Each index draws `z1` then `z2`; the pair is
//! `(z1, rho·z1 + sqrt(1 - rho²)·z2)`, which is then scaled by the segment
//! standard deviations and shifted by the segment means. Ensembles derive
//! the seed of run `k` as `base_seed + k` (wrapping).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SrsdError};
use crate::model::TimeSeries;

/// A value that holds from the 1-based `start` index until the next segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub value: f64,
}

impl Segment {
    pub fn new(start: usize, value: f64) -> Self {
        Self { start, value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub n: usize,
    pub correlation: Vec<Segment>,
    /// Variance (σ²) segments for x and y.
    pub x_variance: Vec<Segment>,
    pub y_variance: Vec<Segment>,
    pub x_mean: Vec<Segment>,
    pub y_mean: Vec<Segment>,
    pub seed: u64,
}

impl RegimeSpec {
    /// Stationary pair: constant correlation, unit variances, zero means.
    pub fn stationary(n: usize, rho: f64, seed: u64) -> Self {
        Self {
            n,
            correlation: vec![Segment::new(1, rho)],
            x_variance: vec![Segment::new(1, 1.0)],
            y_variance: vec![Segment::new(1, 1.0)],
            x_mean: vec![Segment::new(1, 0.0)],
            y_mean: vec![Segment::new(1, 0.0)],
            seed,
        }
    }

    /// The 70-point reference experiment: correlation -0.6 → 0.6 at 36;
    /// x variance 1 → 9 at 51 and mean -1 → 1 at 26; y variance 9 → 1 at 21
    /// and mean 1 → -1 at 41.
    pub fn reference(seed: u64) -> Self {
        Self {
            n: 70,
            correlation: vec![Segment::new(1, -0.6), Segment::new(36, 0.6)],
            x_variance: vec![Segment::new(1, 1.0), Segment::new(51, 9.0)],
            y_variance: vec![Segment::new(1, 9.0), Segment::new(21, 1.0)],
            x_mean: vec![Segment::new(1, -1.0), Segment::new(26, 1.0)],
            y_mean: vec![Segment::new(1, 1.0), Segment::new(41, -1.0)],
            seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SrsdError::InvalidSpec(m));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        let lists = [
            ("correlation", &self.correlation),
            ("x_variance", &self.x_variance),
            ("y_variance", &self.y_variance),
            ("x_mean", &self.x_mean),
            ("y_mean", &self.y_mean),
        ];
        for (name, segs) in lists {
            match segs.first() {
                Some(s) if s.start == 1 => {}
                _ => return bad(format!("{name}: first segment must start at 1")),
            }
            if segs.windows(2).any(|w| w[1].start <= w[0].start) {
                return bad(format!("{name}: segment starts must increase"));
            }
            if segs
                .iter()
                .any(|s| s.start > self.n || !s.value.is_finite())
            {
                return bad(format!("{name}: segment beyond n or non-finite value"));
            }
        }
        if self.correlation.iter().any(|s| s.value.abs() > 1.0) {
            return bad("correlation must lie in [-1, 1]".into());
        }
        if self
            .x_variance
            .iter()
            .chain(&self.y_variance)
            .any(|s| s.value <= 0.0)
        {
            return bad("variances must be positive".into());
        }
        Ok(())
    }
}

/// Value of the piecewise-constant `segments` at the 1-based `index`.
fn segment_value(segments: &[Segment], index: usize) -> f64 {
    segments
        .iter()
        .take_while(|s| s.start <= index)
        .last()
        .map(|s| s.value)
        .expect("validated: first segment starts at 1")
}

pub fn generate_pair(spec: &RegimeSpec) -> Result<(TimeSeries, TimeSeries)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut x = Vec::with_capacity(spec.n);
    let mut y = Vec::with_capacity(spec.n);
    for i in 1..=spec.n {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let rho = segment_value(&spec.correlation, i);
        let u = z1;
        let v = rho * z1 + (1.0 - rho * rho).sqrt() * z2;
        x.push(segment_value(&spec.x_mean, i) + segment_value(&spec.x_variance, i).sqrt() * u);
        y.push(segment_value(&spec.y_mean, i) + segment_value(&spec.y_variance, i).sqrt() * v);
    }
    Ok((
        TimeSeries::new(x)?.named("x"),
        TimeSeries::new(y)?.named("y"),
    ))
}

/// Seed of run `run` in an ensemble started from `base_seed`.
pub fn ensemble_seed(base_seed: u64, run: u64) -> u64 {
    base_seed.wrapping_add(run)
}

/// Seeded white noise, for Monte Carlo studies.
pub fn white_noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Seeded stationary AR(1) series `x[t] = alpha·x[t-1] + e[t]`, started from
/// its stationary distribution.
pub fn ar1_series(n: usize, alpha: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let first: f64 = rng.sample(StandardNormal);
    let mut prev = first / (1.0 - alpha * alpha).sqrt();
    out.push(prev);
    for _ in 1..n {
        let e: f64 = rng.sample(StandardNormal);
        prev = alpha * prev + e;
        out.push(prev);
    }
    out
}
