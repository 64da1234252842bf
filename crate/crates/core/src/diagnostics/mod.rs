//! Fault-origin discrimination from flow, head and drive frequency.
//!
//! Two methods are provided: a nested-model F-test on residuals against the
//! nominal curves, and the tangent-residual decision index with a
//! block-bootstrap interval.

use thiserror::Error;

pub mod fixture;
pub mod ftest;
pub mod metrics;
pub mod pipeline;
pub mod regression;
pub mod special;
pub mod tangent;
pub mod thresholds;

pub use fixture::{clogging_fixture, degradation_fixture, gen_degradation_fixture, healthy_fixture, FixtureNoise, FixtureSample};
pub use ftest::{aic, classify_by_ftest, nested_f_test, nested_f_test_ssr, CycleTest, FTestResult};
pub use metrics::{classification_metrics, ConfusionMatrix};
pub use pipeline::{diagnose, fit_nominal_curves, metrics_csv, verdicts_csv, DiagnosisConfig, DiagnosisReport, Method, Verdict};
pub use regression::{fit_drift_quadratic, fit_static_quadratic, fit_system_curve, QuadraticFit};
pub use special::f_survival;
pub use tangent::{
    bootstrap_index_ci, decision_index, displacement_residuals, instantaneous_index, tangent_residuals, BootstrapConfig, TangentVerdict,
    DEFAULT_SMOOTHING_WINDOW,
};
pub use thresholds::{classify_segment, learn_thresholds, Thresholds};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("invalid model sizes p0 = {p0}, p1 = {p1} for m = {m}")]
    BadDegreesOfFreedom { p0: usize, p1: usize, m: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("only {got} normal baseline segments, need at least 5")]
    InsufficientBaseline { got: usize },
    #[error("no usable fault-free cycles to fit nominal curves")]
    NoNominalData,
    #[error("time series carries no ground-truth labels")]
    Unlabeled,
}

/// Three-state diagnostic class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Class {
    Normal,
    PumpFault,
    SystemFault,
}

impl Class {
    pub const ALL: [Class; 3] = [Class::Normal, Class::PumpFault, Class::SystemFault];

    pub fn index(self) -> usize {
        match self {
            Class::Normal => 0,
            Class::PumpFault => 1,
            Class::SystemFault => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Class::Normal => "normal",
            Class::PumpFault => "pump_fault",
            Class::SystemFault => "system_fault",
        }
    }

    pub fn parse(s: &str) -> Option<Class> {
        Class::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl From<crate::faults::Label> for Class {
    fn from(l: crate::faults::Label) -> Self {
        match l {
            crate::faults::Label::Normal => Class::Normal,
            crate::faults::Label::PumpFault(_) => Class::PumpFault,
            crate::faults::Label::SystemFault => Class::SystemFault,
        }
    }
}

impl std::fmt::Display for Class {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
