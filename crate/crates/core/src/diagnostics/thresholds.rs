//! Adaptive decision thresholds learned from normal segments.

use super::tangent::quantile_sorted;
use super::{Class, DiagnosticsError};

pub const MIN_BASELINE_SEGMENTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Pump fault when the interval's lower bound exceeds this.
    pub pump_lci: f64,
    /// System fault when the interval's upper bound is below this.
    pub system_uci: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { pump_lci: 0.6, system_uci: 0.4 }
    }
}

/// Widens the default thresholds to the 2.5–97.5 % range of normal indices.
pub fn learn_thresholds(normal_indices: &[f64]) -> Result<Thresholds, DiagnosticsError> {
    if normal_indices.len() < MIN_BASELINE_SEGMENTS {
        return Err(DiagnosticsError::InsufficientBaseline { got: normal_indices.len() });
    }
    let mut v = normal_indices.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let d = Thresholds::default();
    Ok(Thresholds { pump_lci: d.pump_lci.max(quantile_sorted(&v, 0.975)), system_uci: d.system_uci.min(quantile_sorted(&v, 0.025)) })
}

pub fn classify_segment(ci: (f64, f64), thresholds: &Thresholds) -> Class {
    if ci.0 > thresholds.pump_lci {
        Class::PumpFault
    } else if ci.1 < thresholds.system_uci {
        Class::SystemFault
    } else {
        Class::Normal
    }
}
