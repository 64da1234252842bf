//! Fault profiles: pump blockage (speed derating) and system clogging
//! (friction and static-head drift), each ramped in over a window.

use crate::hydraulics::SystemCurve;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FaultError {
    #[error("fault window must satisfy start < end, got [{0}, {1}]")]
    BadWindow(f64, f64),
    #[error("blockage severity must lie in (0, 1), got {0}")]
    BadSeverity(f64),
    #[error("clogging increments must be nonnegative")]
    NegativeIncrement,
    #[error("pump id {0} is out of range")]
    BadPump(usize),
    #[error("clear time {0} precedes fault onset")]
    BadClear(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaultKind {
    /// `pump` is a 1-based id.
    Blockage {
        pump: usize,
        severity: f64,
    },
    Clogging {
        friction_rel: f64,
        static_head: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultProfile {
    pub kind: FaultKind,
    pub start: f64,
    pub end: f64,
    /// Time from which the fault is repaired; `None` means persistent.
    pub cleared_at: Option<f64>,
}

impl FaultProfile {
    pub fn blockage(pump: usize, severity: f64, start: f64, end: f64) -> Self {
        FaultProfile { kind: FaultKind::Blockage { pump, severity }, start, end, cleared_at: None }
    }

    pub fn clogging(friction_rel: f64, static_head: f64, start: f64, end: f64) -> Self {
        FaultProfile { kind: FaultKind::Clogging { friction_rel, static_head }, start, end, cleared_at: None }
    }

    pub fn validate(&self, n_pumps: usize) -> Result<(), FaultError> {
        if !(self.start < self.end) {
            return Err(FaultError::BadWindow(self.start, self.end));
        }
        if let Some(c) = self.cleared_at {
            if !(c > self.start) {
                return Err(FaultError::BadClear(c));
            }
        }
        match self.kind {
            FaultKind::Blockage { pump, severity } => {
                if !(severity > 0.0 && severity < 1.0) {
                    return Err(FaultError::BadSeverity(severity));
                }
                if pump == 0 || pump > n_pumps {
                    return Err(FaultError::BadPump(pump));
                }
            }
            FaultKind::Clogging { friction_rel, static_head } => {
                if !(friction_rel >= 0.0 && static_head >= 0.0) {
                    return Err(FaultError::NegativeIncrement);
                }
            }
        }
        Ok(())
    }

    /// Ramp fraction, forced to 0 once the fault is cleared.
    pub fn severity_at(&self, t: f64) -> f64 {
        match self.cleared_at {
            Some(c) if t >= c => 0.0,
            _ => ramp_fraction(t, self.start, self.end),
        }
    }
}

pub fn ramp_fraction(t: f64, t0: f64, t1: f64) -> f64 {
    if t < t0 {
        0.0
    } else if t >= t1 {
        1.0
    } else {
        (t - t0) / (t1 - t0)
    }
}

/// β(t) = 1 − s_max·r(t).
pub fn blockage_factor(t: f64, profile: &FaultProfile) -> f64 {
    match profile.kind {
        FaultKind::Blockage { severity, .. } => 1.0 - severity * profile.severity_at(t),
        FaultKind::Clogging { .. } => 1.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveParameters {
    pub system: SystemCurve,
    /// Speed derating β per pump (index = id − 1).
    pub beta: Vec<f64>,
}

pub fn effective_parameters(t: f64, base: &SystemCurve, profiles: &[FaultProfile], n_pumps: usize) -> EffectiveParameters {
    let mut system = *base;
    let mut beta = vec![1.0; n_pumps];
    for p in profiles {
        match p.kind {
            FaultKind::Blockage { pump, .. } => {
                if (1..=n_pumps).contains(&pump) {
                    beta[pump - 1] *= blockage_factor(t, p);
                }
            }
            FaultKind::Clogging { friction_rel, static_head } => {
                let r = p.severity_at(t);
                system.k *= 1.0 + friction_rel * r;
                system.h_static += static_head * r;
            }
        }
    }
    EffectiveParameters { system, beta }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Normal,
    PumpFault(usize),
    SystemFault,
}

impl Label {
    pub fn as_string(&self) -> String {
        match self {
            Label::Normal => "normal".to_string(),
            Label::PumpFault(id) => format!("pump_fault:{id}"),
            Label::SystemFault => "system_fault".to_string(),
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "normal" => Some(Label::Normal),
            "system_fault" => Some(Label::SystemFault),
            _ => s.strip_prefix("pump_fault:").and_then(|id| id.parse().ok()).map(Label::PumpFault),
        }
    }
}

/// Ground truth at time `t`. A pump fault outranks a system fault; among
/// blockages the lowest pump id wins.
pub fn ground_truth(t: f64, profiles: &[FaultProfile]) -> Label {
    let mut pump: Option<usize> = None;
    let mut system = false;
    for p in profiles {
        if p.severity_at(t) > 0.0 {
            match p.kind {
                FaultKind::Blockage { pump: id, .. } => pump = Some(pump.map_or(id, |cur| cur.min(id))),
                FaultKind::Clogging { .. } => system = true,
            }
        }
    }
    match (pump, system) {
        (Some(id), _) => Label::PumpFault(id),
        (None, true) => Label::SystemFault,
        _ => Label::Normal,
    }
}
