//! Hydraulic and three-phase electrical power, and the multiplicative
//! sensor-noise model shared by all sensed channels.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectricalSpec {
    /// Phase-to-phase voltage, V.
    pub voltage: f64,
    /// Nominal motor current, A.
    pub current_nominal: f64,
    pub cos_phi: f64,
    /// Current cap as a multiple of nominal current.
    pub inrush_cap: f64,
    /// Fluid density, kg/m³.
    pub rho: f64,
    pub g: f64,
    /// Pump efficiency, constant.
    pub efficiency: f64,
}

impl Default for ElectricalSpec {
    fn default() -> Self {
        ElectricalSpec { voltage: 400.0, current_nominal: 30.0, cos_phi: 0.9, inrush_cap: 5.0, rho: 1000.0, g: 9.81, efficiency: 0.9 }
    }
}

impl ElectricalSpec {
    pub fn validate(&self) -> Result<(), &'static str> {
        let positive = [self.voltage, self.current_nominal, self.inrush_cap, self.rho, self.g];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err("electrical and fluid constants must be positive");
        }
        if !(self.cos_phi > 0.0 && self.cos_phi <= 1.0) {
            return Err("cos_phi must lie in (0, 1]");
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err("efficiency must lie in (0, 1]");
        }
        Ok(())
    }

    /// Efficiency at an operating condition; constant for new pumps.
    pub fn efficiency_at(&self, _q: f64, _f: f64) -> f64 {
        self.efficiency
    }
}

/// `(P_output, P_input)` in W for flow `q` (m³/h) and head `h` (m).
pub fn hydraulic_power(q: f64, h: f64, spec: &ElectricalSpec) -> (f64, f64) {
    let out = spec.rho * spec.g * (q / 3600.0) * h;
    (out, out / spec.efficiency)
}

pub fn electrical_input_power(n: f64, spec: &ElectricalSpec) -> f64 {
    let current = (spec.current_nominal * n).min(spec.inrush_cap * spec.current_nominal);
    3f64.sqrt() * spec.voltage * current * spec.cos_phi
}

/// `x·(1 + ε)`, ε ~ N(0, σ²). With σ = 0 no random number is drawn.
pub fn apply_relative_noise<R: Rng + ?Sized>(x: f64, sigma_rel: f64, rng: &mut R) -> f64 {
    if sigma_rel == 0.0 {
        return x;
    }
    let eps: f64 = StandardNormal.sample(rng);
    x * (1.0 + sigma_rel * eps)
}
