//! The frozen reference realization of the 70-point two-series experiment.
//!
//! The CSV was produced once by `examples/select_fixture.rs` (a seed search
//! over [`RegimeSpec::reference`](crate::synth::RegimeSpec::reference)) and is
//! the ground truth; it is never regenerated.

use serde::{Deserialize, Serialize};

use crate::model::TimeSeries;

const CANONICAL_CSV: &str = include_str!("../fixtures/canonical_pair.csv");

/// Seed of [`RegimeSpec::reference`](crate::synth::RegimeSpec::reference)
/// that produced the fixture.
pub const CANONICAL_SEED: u64 = 375;

/// Confirmed change-points the full procedure finds on the fixture with
/// p = 0.05, l = 20. Provisional tail candidates are not part of the set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedChangePoints {
    pub x_mean: Vec<usize>,
    pub y_mean: Vec<usize>,
    pub x_variance: Vec<usize>,
    pub y_variance: Vec<usize>,
    pub correlation: Vec<usize>,
    /// Correlation change-points when the mean and variance steps are skipped.
    pub correlation_unadjusted: Vec<usize>,
}

impl ExpectedChangePoints {
    pub fn reference() -> Self {
        Self {
            x_mean: vec![26],
            y_mean: vec![41],
            x_variance: vec![51],
            y_variance: vec![21],
            correlation: vec![36],
            correlation_unadjusted: vec![21],
        }
    }
}

/// Parses an `index,x,y` CSV with a header row.
pub fn parse_pair_csv(text: &str) -> Option<(Vec<f64>, Vec<f64>)> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let mut cells = line.split(',').skip(1);
        x.push(cells.next()?.trim().parse().ok()?);
        y.push(cells.next()?.trim().parse().ok()?);
    }
    Some((x, y))
}

pub fn canonical_fixture() -> (TimeSeries, TimeSeries, ExpectedChangePoints) {
    let (x, y) = parse_pair_csv(CANONICAL_CSV).expect("bundled fixture is well formed");
    (
        TimeSeries::new(x).expect("finite").named("x"),
        TimeSeries::new(y).expect("finite").named("y"),
        ExpectedChangePoints::reference(),
    )
}
