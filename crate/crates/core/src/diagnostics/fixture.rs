//! Synthetic 50-step operating-point trajectories for single faults.

use crate::hydraulics::{solve_operating_point, PumpCurve, SystemCurve};
use crate::rng::{stream, Stream};
use rand_distr::{Distribution, Normal};

pub const FIXTURE_STEPS: usize = 50;
pub const FIXTURE_F_NOMINAL: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureNoise {
    pub sigma_q: f64,
    pub sigma_h: f64,
    pub sigma_f: f64,
}

impl FixtureNoise {
    pub const NONE: FixtureNoise = FixtureNoise { sigma_q: 0.0, sigma_h: 0.0, sigma_f: 0.0 };
}

impl Default for FixtureNoise {
    fn default() -> Self {
        FixtureNoise { sigma_q: 1.0, sigma_h: 0.5, sigma_f: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureSample {
    pub t: f64,
    pub q: f64,
    pub h: f64,
    pub f: f64,
}

impl FixtureSample {
    /// `(t, q*, h*)` at the nominal 50 Hz.
    pub fn normalized(&self) -> (f64, f64, f64) {
        let r = FIXTURE_F_NOMINAL / self.f;
        (self.t, self.q * r, self.h * r * r)
    }
}

/// Curves at the start of either fixture.
pub fn nominal_curves() -> (PumpCurve, SystemCurve) {
    (PumpCurve { c0: 15.0, c1: -5e-4, c2: -9e-4, f_nominal: 50.0 }, SystemCurve { h_static: 2.0, k: 6e-4 })
}

fn generate(seed: u64, noise: FixtureNoise, curves: impl Fn(f64) -> (PumpCurve, SystemCurve)) -> Vec<FixtureSample> {
    let mut rng = stream(seed, Stream::Fixture);
    let gauss = |s: f64| Normal::new(0.0, s).expect("finite sigma");
    let (nf, nq, nh) = (gauss(noise.sigma_f), gauss(noise.sigma_q), gauss(noise.sigma_h));
    (0..FIXTURE_STEPS)
        .map(|i| {
            let t = i as f64;
            let (pump, system) = curves(t);
            let f = 50.0 - 0.1 * t + nf.sample(&mut rng);
            let op = solve_operating_point(&pump, &system, f / FIXTURE_F_NOMINAL, 1e-12).expect("fixture curves intersect");
            let q = op.q + nq.sample(&mut rng);
            let h = op.h + nh.sample(&mut rng);
            FixtureSample { t, q, h, f }
        })
        .collect()
}

/// Pump wear: every pump coefficient drifts against a fixed system curve.
pub fn degradation_fixture(seed: u64, noise: FixtureNoise) -> Vec<FixtureSample> {
    generate(seed, noise, |t| {
        let pump = PumpCurve { c0: 15.0 - 0.1 * t, c1: -(5e-4 + 1e-6 * t), c2: -(9e-4 + 5e-6 * t), f_nominal: 50.0 };
        (pump, nominal_curves().1)
    })
}

pub fn gen_degradation_fixture(seed: u64) -> Vec<FixtureSample> {
    degradation_fixture(seed, FixtureNoise::default())
}

/// Clogging: friction doubles and static head rises 0.5 m over the run,
/// with the pump curve fixed.
pub fn clogging_fixture(seed: u64, noise: FixtureNoise) -> Vec<FixtureSample> {
    let last = (FIXTURE_STEPS - 1) as f64;
    generate(seed, noise, |t| {
        let system = SystemCurve { h_static: 2.0 + 0.5 * t / last, k: 6e-4 * (1.0 + t / last) };
        (nominal_curves().0, system)
    })
}

/// Healthy run: nominal curves throughout, only the drive frequency varies.
pub fn healthy_fixture(seed: u64, noise: FixtureNoise) -> Vec<FixtureSample> {
    generate(seed, noise, |_| nominal_curves())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_start_point() {
        let s = degradation_fixture(0, FixtureNoise::NONE);
        // 15 − 5e−4 q − 9e−4 q² = 2 + 6e−4 q²
        let a = 1.5e-3;
        let q = (-5e-4 + (2.5e-7 + 4.0 * a * 13.0f64).sqrt()) / (2.0 * a);
        assert!((s[0].q - q).abs() < 1e-9 && (q - 92.93).abs() < 0.01);
        assert!((s[0].h - 7.18).abs() < 0.01);
        assert_eq!(s[0].f, 50.0);
        assert!((s[49].f - 45.1).abs() < 1e-12);
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(gen_degradation_fixture(3), gen_degradation_fixture(3));
        assert_ne!(gen_degradation_fixture(3), gen_degradation_fixture(4));
    }

    #[test]
    fn noiseless_normalized_pump_fixture_lies_on_pump_curve() {
        let (pump, _) = nominal_curves();
        for s in healthy_fixture(0, FixtureNoise::NONE) {
            let (_, q, h) = s.normalized();
            assert!((h - pump.head(q, 1.0)).abs() < 1e-9);
        }
    }
}
