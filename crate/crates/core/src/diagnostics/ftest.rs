//! Nested-model F-test with AIC, and the per-cycle three-way classifier.

use super::regression::{ols, QuadraticFit};
use super::special::f_survival;
use super::{Class, DiagnosticsError};
use crate::hydraulics::{PumpCurve, SystemCurve};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FTestResult {
    pub f_stat: f64,
    pub df: (usize, usize),
    pub p_value: f64,
    pub aic_null: f64,
    pub aic_alt: f64,
    /// Set when the alternative fits exactly (SSR1 = 0).
    pub perfect_fit: bool,
}

pub fn aic(ssr: f64, m: usize, p: usize) -> f64 {
    m as f64 * (ssr / m as f64).ln() + 2.0 * p as f64
}

/// F-test between a restricted model (`ssr0`, `p0` parameters) and a
/// superset model (`ssr1`, `p1`) fitted to the same `m` samples.
pub fn nested_f_test_ssr(ssr0: f64, p0: usize, ssr1: f64, p1: usize, m: usize) -> Result<FTestResult, DiagnosticsError> {
    if p1 <= p0 || m <= p1 {
        return Err(DiagnosticsError::BadDegreesOfFreedom { p0, p1, m });
    }
    let df = (p1 - p0, m - p1);
    let (aic_null, aic_alt) = (aic(ssr0, m, p0), aic(ssr1, m, p1));
    if ssr1 <= 0.0 {
        let improved = ssr0 > 0.0;
        return Ok(FTestResult {
            f_stat: if improved { f64::INFINITY } else { 0.0 },
            df,
            p_value: if improved { 0.0 } else { 1.0 },
            aic_null,
            aic_alt,
            perfect_fit: true,
        });
    }
    // rounding can leave SSR0 a hair below SSR1
    let gain = (ssr0 - ssr1).max(0.0);
    let f_stat = (gain / df.0 as f64) / (ssr1 / df.1 as f64);
    Ok(FTestResult { f_stat, df, p_value: f_survival(f_stat, df.0 as f64, df.1 as f64), aic_null, aic_alt, perfect_fit: false })
}

pub fn nested_f_test(restricted: &QuadraticFit, full: &QuadraticFit) -> Result<FTestResult, DiagnosticsError> {
    if restricted.m != full.m {
        return Err(DiagnosticsError::LengthMismatch { left: restricted.m, right: full.m });
    }
    nested_f_test_ssr(restricted.ssr, restricted.n_params, full.ssr, full.n_params, full.m)
}

/// Outcome of the F-test classifier on one cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleTest {
    pub label: Class,
    pub pump: Option<FTestResult>,
    pub system: Option<FTestResult>,
}

impl CycleTest {
    /// Statistic of the test that decided the label (the larger F).
    pub fn deciding(&self) -> Option<FTestResult> {
        match (self.pump, self.system) {
            (Some(a), Some(b)) => Some(if b.f_stat > a.f_stat { b } else { a }),
            (a, b) => a.or(b),
        }
    }
}

/// Tests whether residuals against a nominal curve stay at zero (null,
/// no free parameters) or carry an offset and a linear drift in time.
pub fn residual_drift_test(t: &[f64], r: &[f64]) -> Result<FTestResult, DiagnosticsError> {
    let m = r.len();
    let t_mean = t.iter().sum::<f64>() / m as f64;
    let rows: Vec<Vec<f64>> = t.iter().map(|&ti| vec![1.0, ti - t_mean]).collect();
    let (_, ssr1) = ols(&rows, r)?;
    let ssr0: f64 = r.iter().map(|x| x * x).sum();
    nested_f_test_ssr(ssr0, 0, ssr1, 2, m)
}

/// Three-way label of one cycle from its affinity-normalized samples
/// `(t, q*, h*)`, tested against the nominal pump and system curves.
pub fn classify_by_ftest(
    samples: &[(f64, f64, f64)],
    pump: &PumpCurve,
    system: &SystemCurve,
    alpha_test: f64,
) -> Result<CycleTest, DiagnosticsError> {
    if samples.len() < 10 {
        return Err(DiagnosticsError::TooFewSamples { needed: 10, got: samples.len() });
    }
    let t: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let r_pump: Vec<f64> = samples.iter().map(|&(_, q, h)| h - pump.head(q, 1.0)).collect();
    let r_sys: Vec<f64> = samples.iter().map(|&(_, q, h)| h - system.head(q)).collect();
    let pump_test = residual_drift_test(&t, &r_pump).ok();
    let sys_test = residual_drift_test(&t, &r_sys).ok();
    let rejects = |x: &Option<FTestResult>| x.is_some_and(|r| r.p_value < alpha_test);
    let label = match (rejects(&pump_test), rejects(&sys_test)) {
        (true, false) => Class::PumpFault,
        (false, true) => Class::SystemFault,
        (false, false) => Class::Normal,
        (true, true) => {
            if sys_test.unwrap().f_stat > pump_test.unwrap().f_stat {
                Class::SystemFault
            } else {
                Class::PumpFault
            }
        }
    };
    Ok(CycleTest { label, pump: pump_test, system: sys_test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::regression::{fit_drift_quadratic, fit_static_quadratic};

    #[test]
    fn degrees_of_freedom() {
        let r = nested_f_test_ssr(10.0, 3, 5.0, 6, 50).unwrap();
        assert_eq!(r.df, (3, 44));
        assert!((r.f_stat - (5.0 / 3.0) / (5.0 / 44.0)).abs() < 1e-12);
    }

    #[test]
    fn no_improvement() {
        let r = nested_f_test_ssr(5.0, 3, 5.0, 6, 50).unwrap();
        assert_eq!(r.f_stat, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn perfect_fit_flagged() {
        let r = nested_f_test_ssr(5.0, 3, 0.0, 6, 50).unwrap();
        assert!(r.perfect_fit);
        assert_eq!(r.p_value, 0.0);
    }

    #[test]
    fn aic_formula() {
        assert!((aic(2.0, 50, 3) - (50.0 * (0.04f64).ln() + 6.0)).abs() < 1e-12);
    }

    #[test]
    fn static_vs_drift_on_exact_drift() {
        let pts: Vec<(f64, f64, f64)> = (0..40)
            .map(|i| {
                let t = i as f64;
                let q = 30.0 + 2.0 * t + 7.0 * (t * 1.3).sin();
                (t, q, 15.0 - 0.1 * t - 9e-4 * q * q + 0.01 * (t * 2.1).cos())
            })
            .collect();
        let s = fit_static_quadratic(&pts.iter().map(|p| (p.1, p.2)).collect::<Vec<_>>()).unwrap();
        let d = fit_drift_quadratic(&pts).unwrap();
        assert!(d.ssr <= s.ssr);
        let r = nested_f_test(&s, &d).unwrap();
        assert!(r.f_stat > 100.0 && r.p_value < 1e-10 && r.aic_alt < r.aic_null);
    }

    #[test]
    fn cycle_classifier() {
        let pump = PumpCurve { c0: 34.0, c1: -5e-4, c2: -2e-4, f_nominal: 50.0 };
        let system = SystemCurve { h_static: 2.0, k: 3e-4 };
        let q0 = 252.4827069188722;
        let wiggle = |i: usize| 0.05 * ((i as f64 * 12.9898).sin() * 43758.5453).fract();
        let healthy: Vec<_> = (0..200).map(|i| (i as f64, q0, system.head(q0) + wiggle(i))).collect();
        assert_eq!(classify_by_ftest(&healthy, &pump, &system, 0.01).unwrap().label, Class::Normal);
        // clogging: point slides up the pump curve, away from the system curve
        let clog: Vec<_> = (0..200)
            .map(|i| {
                let q = q0 - 5.0 - 0.01 * i as f64;
                (i as f64, q, pump.head(q, 1.0) + wiggle(i))
            })
            .collect();
        assert_eq!(classify_by_ftest(&clog, &pump, &system, 0.01).unwrap().label, Class::SystemFault);
        let block: Vec<_> = (0..200)
            .map(|i| {
                let q = q0 - 5.0 - 0.01 * i as f64;
                (i as f64, q, system.head(q) + wiggle(i))
            })
            .collect();
        assert_eq!(classify_by_ftest(&block, &pump, &system, 0.01).unwrap().label, Class::PumpFault);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn p_value_decreases_with_f(ssr1 in 0.1..10.0f64, g1 in 0.0..10.0f64, g2 in 0.0..10.0f64) {
                let (lo, hi) = if g1 < g2 { (g1, g2) } else { (g2, g1) };
                let a = nested_f_test_ssr(ssr1 + lo, 3, ssr1, 6, 50).unwrap();
                let b = nested_f_test_ssr(ssr1 + hi, 3, ssr1, 6, 50).unwrap();
                prop_assert!(a.f_stat >= 0.0 && b.f_stat >= a.f_stat);
                prop_assert!(b.p_value <= a.p_value);
                prop_assert!((0.0..=1.0).contains(&a.p_value));
            }
        }
    }
}
