//! Tangent residuals, the decision index and its block-bootstrap interval.
//!
//! A pump fault moves the operating point along the system curve and a
//! system fault moves it along the pump curve. The residuals measure how far
//! the observed motion departs from each curve's tangent direction.

use super::{Class, DiagnosticsError};
use crate::hydraulics::{PumpCurve, SystemCurve};
use crate::rng::{indexed_stream, Stream};
use rand::Rng;

pub const DEFAULT_SMOOTHING_WINDOW: usize = 19;

/// Centered moving average; the window shrinks near the ends.
pub fn moving_average(x: &[f64], window: usize) -> Vec<f64> {
    let n = x.len();
    let half = window / 2;
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for v in x {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// dx/dt by central differences, one-sided at the ends.
pub fn gradient(x: &[f64], t: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1.min(n - 1)),
                _ if i == n - 1 => (n - 2, n - 1),
                _ => (i - 1, i + 1),
            };
            if a == b {
                0.0
            } else {
                (x[b] - x[a]) / (t[b] - t[a])
            }
        })
        .collect()
}

pub fn smoothed_derivative(x: &[f64], t: &[f64], window: usize) -> Vec<f64> {
    gradient(&moving_average(x, window), t)
}

/// `(Ψ_p, Ψ_s)` per sample from affinity-normalized samples `(t, q*, h*)`.
///
/// Velocities come from the smoothed derivative operator D. The curve
/// increments are taken through D as well (`D[q²]` rather than `2q·D[q]`), so
/// a trajectory that lies exactly on one curve yields an exactly zero
/// residual for that curve.
pub fn tangent_residuals(
    samples: &[(f64, f64, f64)],
    pump: &PumpCurve,
    system: &SystemCurve,
    window: usize,
) -> Result<(Vec<f64>, Vec<f64>), DiagnosticsError> {
    let window = window.max(1);
    if samples.len() < window + 2 {
        return Err(DiagnosticsError::TooFewSamples { needed: window + 2, got: samples.len() });
    }
    let t: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let q: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let h: Vec<f64> = samples.iter().map(|s| s.2).collect();
    let q2: Vec<f64> = q.iter().map(|v| v * v).collect();
    let dh = smoothed_derivative(&h, &t, window);
    let dq = smoothed_derivative(&q, &t, window);
    let dq2 = smoothed_derivative(&q2, &t, window);
    let psi_p = (0..t.len()).map(|i| dh[i] - pump.c1 * dq[i] - pump.c2 * dq2[i]).collect();
    let psi_s = (0..t.len()).map(|i| dh[i] - system.k * dq2[i]).collect();
    Ok((psi_p, psi_s))
}

/// Residuals of samples `(q*, h*)` integrated from the reference point
/// `(q0, h0)`: the head change not explained by moving along each curve.
pub fn displacement_residuals(
    samples: &[(f64, f64)],
    pump: &PumpCurve,
    system: &SystemCurve,
    reference: (f64, f64),
) -> (Vec<f64>, Vec<f64>) {
    let (q0, h0) = reference;
    samples
        .iter()
        .map(|&(q, h)| {
            let dh = h - h0;
            let dq2 = q * q - q0 * q0;
            (dh - pump.c1 * (q - q0) - pump.c2 * dq2, dh - system.k * dq2)
        })
        .unzip()
}

/// Per-step index |Ψ_p| / (|Ψ_p| + |Ψ_s|), 0.5 where both vanish.
pub fn instantaneous_index(psi_p: &[f64], psi_s: &[f64]) -> Vec<f64> {
    psi_p.iter().zip(psi_s).map(|(p, s)| ratio(p.abs(), s.abs())).collect()
}

fn ratio(a: f64, b: f64) -> f64 {
    if a + b == 0.0 {
        0.5
    } else {
        a / (a + b)
    }
}

/// I_W = mean|Ψ_p| / (mean|Ψ_p| + mean|Ψ_s|).
pub fn decision_index(psi_p: &[f64], psi_s: &[f64]) -> f64 {
    let n = psi_p.len().max(1) as f64;
    let a = psi_p.iter().map(|v| v.abs()).sum::<f64>() / n;
    let b = psi_s.iter().map(|v| v.abs()).sum::<f64>() / n;
    ratio(a, b)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    /// `None` selects max(5, ⌈n^(1/3)⌉).
    pub block_len: Option<usize>,
    pub replicates: usize,
    pub alpha: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig { block_len: None, replicates: 1000, alpha: 0.05 }
    }
}

pub fn default_block_len(n: usize) -> usize {
    ((n as f64).cbrt().ceil() as usize).max(5)
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Circular moving-block bootstrap interval for I_W. Replicate `b` draws
/// from sub-stream `b` of `seed`, so the result does not depend on
/// evaluation order. The interval is widened to contain the full-sample
/// index if the percentile bounds miss it.
pub fn bootstrap_index_ci(psi_p: &[f64], psi_s: &[f64], config: &BootstrapConfig, seed: u64) -> (f64, f64) {
    let n = psi_p.len();
    let point = decision_index(psi_p, psi_s);
    if n == 0 {
        return (point, point);
    }
    let ap: Vec<f64> = psi_p.iter().map(|v| v.abs()).collect();
    let as_: Vec<f64> = psi_s.iter().map(|v| v.abs()).collect();
    let block = config.block_len.unwrap_or_else(|| default_block_len(n)).clamp(1, n);
    let n_blocks = n.div_ceil(block);
    let mut reps = Vec::with_capacity(config.replicates);
    for b in 0..config.replicates {
        let mut rng = indexed_stream(seed, Stream::Bootstrap, b as u64);
        let (mut sp, mut ss, mut taken) = (0.0, 0.0, 0);
        'blocks: for _ in 0..n_blocks {
            let start = rng.gen_range(0..n);
            for k in 0..block {
                if taken == n {
                    break 'blocks;
                }
                let i = (start + k) % n;
                sp += ap[i];
                ss += as_[i];
                taken += 1;
            }
        }
        reps.push(ratio(sp, ss));
    }
    reps.sort_by(|a, b| a.total_cmp(b));
    let lo = quantile_sorted(&reps, config.alpha / 2.0);
    let hi = quantile_sorted(&reps, 1.0 - config.alpha / 2.0);
    (lo.min(point), hi.max(point))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangentVerdict {
    pub index: f64,
    pub ci: (f64, f64),
    pub label: Class,
    pub psi_p: Vec<f64>,
    pub psi_s: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hydraulics::solve_operating_point;

    #[test]
    fn moving_average_shrinks_at_edges() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(moving_average(&x, 3), vec![1.5, 2.0, 3.0, 4.0, 4.5]);
        assert_eq!(moving_average(&x, 1), x.to_vec());
    }

    #[test]
    fn gradient_of_line() {
        let t: Vec<f64> = (0..6).map(|i| i as f64 * 2.0).collect();
        let x: Vec<f64> = t.iter().map(|v| 3.0 * v + 1.0).collect();
        assert!(gradient(&x, &t).iter().all(|g| (g - 3.0).abs() < 1e-12));
    }

    fn pump() -> PumpCurve {
        PumpCurve { c0: 15.0, c1: -5e-4, c2: -9e-4, f_nominal: 50.0 }
    }

    fn system() -> SystemCurve {
        SystemCurve { h_static: 2.0, k: 6e-4 }
    }

    #[test]
    fn exact_tangency_pump_drift() {
        let s = system();
        let samples: Vec<_> = (0..50)
            .map(|i| {
                let t = i as f64;
                let p = PumpCurve { c0: 15.0 - 0.1 * t, c1: -5e-4 - 1e-6 * t, c2: -9e-4 - 5e-6 * t, f_nominal: 50.0 };
                let op = solve_operating_point(&p, &s, 1.0, 1e-12).unwrap();
                (t, op.q, op.h)
            })
            .collect();
        let (pp, ps) = tangent_residuals(&samples, &pump(), &s, 19).unwrap();
        assert!(ps.iter().all(|v| v.abs() < 1e-8));
        assert!(pp.iter().any(|v| v.abs() > 1e-3));
    }

    #[test]
    fn exact_tangency_clogging() {
        let p = pump();
        let samples: Vec<_> = (0..50)
            .map(|i| {
                let t = i as f64;
                let s = SystemCurve { h_static: 2.0 + 0.5 * t / 49.0, k: 6e-4 * (1.0 + t / 49.0) };
                let op = solve_operating_point(&p, &s, 1.0, 1e-12).unwrap();
                (t, op.q, op.h)
            })
            .collect();
        let (pp, ps) = tangent_residuals(&samples, &p, &system(), 19).unwrap();
        assert!(pp.iter().all(|v| v.abs() < 1e-8));
        assert!(ps.iter().any(|v| v.abs() > 1e-3));
    }

    #[test]
    fn too_few_samples() {
        let s = vec![(0.0, 1.0, 1.0); 6];
        assert!(matches!(tangent_residuals(&s, &pump(), &system(), 5), Err(DiagnosticsError::TooFewSamples { .. })));
    }

    #[test]
    fn index_extremes() {
        assert_eq!(decision_index(&[1.0, -2.0], &[0.0, 0.0]), 1.0);
        assert_eq!(decision_index(&[0.0, 0.0], &[1.0, 3.0]), 0.0);
        assert_eq!(decision_index(&[0.0], &[0.0]), 0.5);
    }

    #[test]
    fn displacement_residuals_vanish_on_curves() {
        let (p, s) = (pump(), system());
        let op = solve_operating_point(&p, &s, 1.0, 1e-12).unwrap();
        let on_pump: Vec<(f64, f64)> = [60.0, 80.0].iter().map(|&q| (q, p.head(q, 1.0))).collect();
        let (pp, _) = displacement_residuals(&on_pump, &p, &s, (op.q, op.h));
        assert!(pp.iter().all(|v| v.abs() < 1e-9));
        let on_sys: Vec<(f64, f64)> = [60.0, 80.0].iter().map(|&q| (q, s.head(q))).collect();
        let (_, ps) = displacement_residuals(&on_sys, &p, &s, (op.q, op.h));
        assert!(ps.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn constant_series_zero_width() {
        let (lo, hi) = bootstrap_index_ci(&[2.0; 30], &[1.0; 30], &BootstrapConfig::default(), 1);
        let point = 2.0 / 3.0;
        assert!((lo - point).abs() < 1e-15 && (hi - point).abs() < 1e-15);
    }

    #[test]
    fn wider_interval_for_shorter_segments() {
        let gen = |n: usize, seed: u64| {
            let mut rng = indexed_stream(seed, Stream::Fixture, 0);
            let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let s: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            (p, s)
        };
        let mut short = 0.0;
        let mut long = 0.0;
        for seed in 0..20 {
            let (p, s) = gen(25, seed);
            let (lo, hi) = bootstrap_index_ci(&p, &s, &BootstrapConfig::default(), seed);
            short += hi - lo;
            let (p, s) = gen(100, seed);
            let (lo, hi) = bootstrap_index_ci(&p, &s, &BootstrapConfig::default(), seed);
            long += hi - lo;
        }
        assert!(long < short);
    }

    mod props {
        use super::*;
        use proptest::collection::vec;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(100))]
            #[test]
            fn ci_brackets_point(p in vec(-5.0..5.0f64, 25..60), s in vec(-5.0..5.0f64, 60), seed in 0u64..1000) {
                let s = &s[..p.len()];
                let cfg = BootstrapConfig { replicates: 200, ..BootstrapConfig::default() };
                let point = decision_index(&p, s);
                let (lo, hi) = bootstrap_index_ci(&p, s, &cfg, seed);
                prop_assert!(lo <= point && point <= hi);
                prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
            }

            #[test]
            fn index_bounded_and_scale_free(p in vec(-5.0..5.0f64, 1..40), s in vec(-5.0..5.0f64, 40), c in 0.01..100.0f64) {
                let s = &s[..p.len()];
                let i = decision_index(&p, s);
                prop_assert!((0.0..=1.0).contains(&i));
                let ps: Vec<f64> = p.iter().map(|v| v * c).collect();
                let ss: Vec<f64> = s.iter().map(|v| v * c).collect();
                prop_assert!((decision_index(&ps, &ss) - i).abs() < 1e-12);
                prop_assert!(instantaneous_index(&p, s).iter().all(|v| (0.0..=1.0).contains(v)));
            }
        }
    }
}
