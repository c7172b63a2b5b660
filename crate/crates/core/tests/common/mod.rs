//! Independent reference implementations shared by the integration tests.
//!
//! Nothing here calls into the library's statistics: distribution functions
//! are integrated numerically and the sequential test is re-derived with
//! plain loops, so agreement is evidence rather than tautology.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Lanczos approximation (g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Composite Simpson rule with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

pub fn t_cdf(t: f64, df: f64) -> f64 {
    let c = (ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df)).exp() / (df * PI).sqrt();
    let pdf = |x: f64| c * (1.0 + x * x / df).powf(-0.5 * (df + 1.0));
    0.5 + simpson(pdf, 0.0, t, 20_000)
}

/// Regularized incomplete beta `I_u(a, b)` for `b >= 1`, integrated in
/// `s = sqrt(v)` so that `a = 1/2` has no endpoint singularity.
pub fn inc_beta(u: f64, a: f64, b: f64) -> f64 {
    let ln_b = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
    let g = |s: f64| 2.0 * s.powf(2.0 * a - 1.0) * (1.0 - s * s).powf(b - 1.0);
    simpson(g, 0.0, u.sqrt(), 20_000) / ln_b.exp()
}

pub fn f_cdf(x: f64, d1: f64, d2: f64) -> f64 {
    inc_beta(d1 * x / (d1 * x + d2), 0.5 * d1, 0.5 * d2)
}

/// Inverse of an increasing CDF by bisection on `[lo, hi]`.
pub fn bisect(cdf: impl Fn(f64) -> f64, prob: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < prob {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn t_quantile(prob: f64, df: f64) -> f64 {
    bisect(|t| t_cdf(t, df), prob, -50.0, 50.0)
}

pub fn f_quantile(prob: f64, d1: f64, d2: f64) -> f64 {
    bisect(|x| f_cdf(x, d1, d2), prob, 0.0, 100.0)
}

fn avg(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn var(v: &[f64]) -> f64 {
    let m = avg(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
}

/// Reference change-point found by [`brute_force_scan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleShift {
    /// 1-based index.
    pub index: usize,
    pub provisional: bool,
}

/// Direct re-derivation of the sequential test. `band(level)` gives the
/// `(down, up)` critical levels; the shift index at position `j` is
/// recomputed from scratch as the sum over the candidate's test window.
pub fn brute_force_scan(
    v: &[f64],
    l: usize,
    scale: f64,
    band: impl Fn(f64) -> (f64, f64),
) -> Vec<OracleShift> {
    let n = v.len();
    let mut found = Vec::new();
    let mut i = 1;
    while i < n {
        let level = if i < l {
            avg(&v[..l])
        } else {
            avg(&v[i - l..i])
        };
        let (down, up) = band(level);
        let (critical, sign) = if v[i] > up {
            (up, 1.0)
        } else if v[i] < down {
            (down, -1.0)
        } else {
            i += 1;
            continue;
        };
        let last = (i + l).min(n);
        let holds = (i..last).all(|j| {
            let index: f64 = v[i..=j].iter().map(|x| (x - critical) * scale).sum();
            index * sign >= 0.0
        });
        if holds {
            found.push(OracleShift {
                index: i + 1,
                provisional: last - i < l,
            });
            i += l;
        } else {
            i += 1;
        }
    }
    found
}

/// Reference mean detector: threshold from the quadrature t quantile and an
/// explicit average of windowed variances.
pub fn oracle_mean_shifts(x: &[f64], p: f64, l: usize) -> Vec<OracleShift> {
    let s2 = avg(&x.windows(l).map(var).collect::<Vec<_>>());
    let t = t_quantile(1.0 - p / 2.0, (2 * l - 2) as f64);
    mean_shifts_with_t(x, l, t, s2)
}

/// Reference mean detector with a precomputed t critical value.
pub fn oracle_mean_shifts_with(x: &[f64], l: usize, t_crit: f64) -> Vec<OracleShift> {
    let s2 = avg(&x.windows(l).map(var).collect::<Vec<_>>());
    mean_shifts_with_t(x, l, t_crit, s2)
}

fn mean_shifts_with_t(x: &[f64], l: usize, t_crit: f64, s2: f64) -> Vec<OracleShift> {
    let delta = t_crit * (2.0 * s2 / l as f64).sqrt();
    let scale = if s2 > 0.0 {
        1.0 / (l as f64 * s2.sqrt())
    } else {
        1.0 / l as f64
    };
    brute_force_scan(x, l, scale, |lv| (lv - delta, lv + delta))
}

/// Reference variance detector with a precomputed F critical value.
pub fn oracle_variance_shifts(x: &[f64], l: usize, f_crit: f64) -> Vec<OracleShift> {
    let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
    brute_force_scan(&sq, l, 1.0 / l as f64, |lv| (lv / f_crit, lv * f_crit))
}

pub fn confirmed(shifts: &[OracleShift]) -> Vec<usize> {
    shifts
        .iter()
        .filter(|s| !s.provisional)
        .map(|s| s.index)
        .collect()
}
