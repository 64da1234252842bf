//! Pump and system characteristic curves and their intersection.
//!
//! Flows are in m³/h and heads in metres throughout. The pump curve is kept in
//! monomial form `H = c0·n² + c1·n·q + c2·q²`, so a datasheet written as
//! `H = a0 − a1·Q − a2·Q²` maps to `(c0, c1, c2) = (a0, −a1, −a2)`.

use thiserror::Error;

/// Default head tolerance of the operating-point bisection (m).
pub const DEFAULT_HEAD_TOL: f64 = 1e-8;
/// Iteration cap of the operating-point bisection.
pub const MAX_BISECTION_ITERS: usize = 200;
/// Default lower frequency bound for affinity normalization, as a fraction of nominal.
pub const DEFAULT_FLOOR_FRACTION: f64 = 0.2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HydraulicsError {
    #[error("pump shut-off head {shutoff} m does not exceed static head {h_static} m")]
    NoIntersection { shutoff: f64, h_static: f64 },
    #[error("frequency {f} Hz is at or below the normalization floor {floor} Hz")]
    BelowFrequencyFloor { f: f64, floor: f64 },
    #[error("invalid curve: {0}")]
    InvalidCurve(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpCurve {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub f_nominal: f64,
}

impl PumpCurve {
    pub fn new(c0: f64, c1: f64, c2: f64, f_nominal: f64) -> Result<Self, HydraulicsError> {
        let curve = PumpCurve { c0, c1, c2, f_nominal };
        curve.validate()?;
        Ok(curve)
    }

    pub fn validate(&self) -> Result<(), HydraulicsError> {
        if !(self.c0.is_finite() && self.c1.is_finite() && self.c2.is_finite()) {
            return Err(HydraulicsError::InvalidCurve("coefficients must be finite"));
        }
        if self.c0 <= 0.0 {
            return Err(HydraulicsError::InvalidCurve("shut-off head c0 must be positive"));
        }
        if self.c2 >= 0.0 {
            return Err(HydraulicsError::InvalidCurve("quadratic coefficient c2 must be negative"));
        }
        if self.c1 > 0.0 {
            // c1 > 0 would make the head rise near zero flow
            return Err(HydraulicsError::InvalidCurve("linear coefficient c1 must not be positive"));
        }
        if !(self.f_nominal > 0.0) {
            return Err(HydraulicsError::InvalidCurve("nominal frequency must be positive"));
        }
        Ok(())
    }

    /// Head at flow `q` and speed ratio `n`.
    pub fn head(&self, q: f64, n: f64) -> f64 {
        pump_head(self, q, n)
    }

    /// Positive root of the scaled curve, the end of the admissible flow range.
    pub fn q_zero(&self, n: f64) -> f64 {
        let a = self.c2;
        let b = self.c1 * n;
        let c = self.c0 * n * n;
        let disc = b * b - 4.0 * a * c;
        // a < 0 and c >= 0 so disc >= b²; the root below is the nonnegative one
        (-b - disc.sqrt()) / (2.0 * a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemCurve {
    pub h_static: f64,
    pub k: f64,
}

impl SystemCurve {
    pub fn new(h_static: f64, k: f64) -> Result<Self, HydraulicsError> {
        let curve = SystemCurve { h_static, k };
        curve.validate()?;
        Ok(curve)
    }

    pub fn validate(&self) -> Result<(), HydraulicsError> {
        if !(self.h_static.is_finite() && self.h_static >= 0.0) {
            return Err(HydraulicsError::InvalidCurve("static head must be finite and nonnegative"));
        }
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(HydraulicsError::InvalidCurve("friction coefficient k must be positive"));
        }
        Ok(())
    }

    pub fn head(&self, q: f64) -> f64 {
        system_head(self, q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub q: f64,
    pub h: f64,
}

pub fn pump_head(curve: &PumpCurve, q: f64, n: f64) -> f64 {
    curve.c0 * n * n + curve.c1 * n * q + curve.c2 * q * q
}

pub fn system_head(curve: &SystemCurve, q: f64) -> f64 {
    curve.h_static + curve.k * q * q
}

/// Intersection of the affinity-scaled pump curve with the system curve by bisection.
///
/// The bracket is `[0, Q_zero(n)]`: the head difference is positive at zero flow
/// and negative at the pump's zero-head flow, and strictly decreasing between.
pub fn solve_operating_point(pump: &PumpCurve, system: &SystemCurve, n: f64, tol: f64) -> Result<OperatingPoint, HydraulicsError> {
    let shutoff = pump_head(pump, 0.0, n);
    if !(shutoff > system.h_static) {
        return Err(HydraulicsError::NoIntersection { shutoff, h_static: system.h_static });
    }
    let g = |q: f64| pump_head(pump, q, n) - system_head(system, q);
    let mut lo = 0.0;
    let mut hi = pump.q_zero(n);
    let mut q = 0.5 * (lo + hi);
    for _ in 0..MAX_BISECTION_ITERS {
        q = 0.5 * (lo + hi);
        let gq = g(q);
        if gq == 0.0 || (gq.abs() <= tol && hi - lo <= 1e-12 * hi.max(1.0)) {
            break;
        }
        if gq > 0.0 {
            lo = q;
        } else {
            hi = q;
        }
        if hi - lo <= f64::EPSILON * hi.max(1.0) {
            q = 0.5 * (lo + hi);
            break;
        }
    }
    Ok(OperatingPoint { q, h: system_head(system, q) })
}

/// Maps a sample at drive frequency `f` to the nominal frequency.
pub fn affinity_normalize(q: f64, h: f64, f: f64, f_nominal: f64, floor_fraction: f64) -> Result<(f64, f64), HydraulicsError> {
    let floor = floor_fraction * f_nominal;
    if !(f > floor) {
        return Err(HydraulicsError::BelowFrequencyFloor { f, floor });
    }
    let r = f_nominal / f;
    Ok((q * r, h * r * r))
}

/// Local slopes `(dH_pump/dQ, dH_system/dQ)` at nominal speed.
pub fn curve_slopes(pump: &PumpCurve, system: &SystemCurve, q_star: f64) -> (f64, f64) {
    (pump.c1 + 2.0 * pump.c2 * q_star, 2.0 * system.k * q_star)
}
