//! Wastewater pump station simulator with operating-point fault diagnostics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod faults;
pub mod hydraulics;
pub mod inflow;
pub mod ingestion;
pub mod power;
pub mod rng;
pub mod scenario;
pub mod station;
pub mod telemetry;

pub use diagnostics::{diagnose, Class, DiagnosisConfig, DiagnosisReport, DiagnosticsError, Method, Thresholds, Verdict};
pub use faults::{FaultKind, FaultProfile, Label};
pub use hydraulics::{solve_operating_point, OperatingPoint, PumpCurve, SystemCurve};
pub use inflow::{InflowSpec, PeakProcess};
pub use ingestion::{infer_inflow, DifferenceScheme, IngestionError, ScadaFrame};
pub use power::ElectricalSpec;
pub use scenario::{ConfigError, ScenarioConfig};
pub use station::{ScenarioRun, StationConfig, StationError};
pub use telemetry::{Record, TimeSeries};
