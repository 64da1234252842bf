//! Discrete-time station engine: sump mass balance, level-threshold pump
//! sequencing with round-robin lead rotation, and soft-start/stop ramps.

use crate::faults::{effective_parameters, ground_truth, EffectiveParameters, FaultProfile};
use crate::hydraulics::{pump_head, solve_operating_point, OperatingPoint, PumpCurve, SystemCurve, DEFAULT_HEAD_TOL};
use crate::power::{apply_relative_noise, electrical_input_power, hydraulic_power, ElectricalSpec};
use crate::rng::{stream, Stream};
use crate::telemetry::{PumpRecord, Record, TimeSeries};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StationError {
    #[error("{field}: {reason}")]
    InvalidConfig { field: String, reason: String },
    #[error("no idle pump available")]
    NoIdlePump,
}

fn invalid(field: &str, reason: impl Into<String>) -> StationError {
    StationError::InvalidConfig { field: field.to_string(), reason: reason.into() }
}

/// Relative standard deviations of the sensed channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub level: f64,
    pub flow: f64,
    pub head: f64,
    pub power: f64,
}

impl NoiseSpec {
    pub const NONE: NoiseSpec = NoiseSpec { level: 0.0, flow: 0.0, head: 0.0, power: 0.0 };
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec { level: 0.01, flow: 0.01, head: 0.01, power: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationConfig {
    /// Sump cross-section, m².
    pub area: f64,
    pub n_pumps: usize,
    /// Start level for the i-th running pump, m (index 0 = lead).
    pub start_levels: Vec<f64>,
    /// Stop level while i+1 pumps run, m.
    pub stop_levels: Vec<f64>,
    pub pump_curve: PumpCurve,
    pub system_curve: SystemCurve,
    pub f_min: f64,
    pub f_max: f64,
    pub t_ramp: f64,
    pub t_dwell: f64,
    pub noise: NoiseSpec,
    pub electrical: ElectricalSpec,
    pub dt: f64,
    /// Carried as metadata only; control runs on frequency.
    pub nominal_rpm: f64,
    /// Defaults to the middle of the lead pump's hysteresis band.
    pub initial_level: Option<f64>,
}

impl Default for StationConfig {
    fn default() -> Self {
        StationConfig {
            area: 8.0,
            n_pumps: 3,
            start_levels: vec![1.6, 1.8, 2.2],
            stop_levels: vec![0.5, 0.8, 1.2],
            pump_curve: PumpCurve { c0: 34.0, c1: -5e-4, c2: -2e-4, f_nominal: 50.0 },
            system_curve: SystemCurve { h_static: 2.0, k: 3e-4 },
            f_min: 0.0,
            f_max: 50.0,
            t_ramp: 10.0,
            t_dwell: 0.0,
            noise: NoiseSpec::default(),
            electrical: ElectricalSpec::default(),
            dt: 1.0,
            nominal_rpm: 1460.0,
            initial_level: None,
        }
    }
}

impl StationConfig {
    pub fn validate(&self) -> Result<(), StationError> {
        if !(self.area > 0.0 && self.area.is_finite()) {
            return Err(invalid("station.area_m2", "must be positive"));
        }
        if self.n_pumps == 0 {
            return Err(invalid("station.n_pumps", "must be at least 1"));
        }
        if self.start_levels.len() != self.n_pumps {
            return Err(invalid("station.start_levels_m", format!("expected {} values", self.n_pumps)));
        }
        if self.stop_levels.len() != self.n_pumps {
            return Err(invalid("station.stop_levels_m", format!("expected {} values", self.n_pumps)));
        }
        for i in 0..self.n_pumps {
            if !(self.stop_levels[i] < self.start_levels[i]) {
                return Err(invalid(
                    "station.stop_levels_m",
                    format!("E{} = {} must be below S{} = {}", i + 1, self.stop_levels[i], i + 1, self.start_levels[i]),
                ));
            }
            if i > 0 && !(self.start_levels[i] > self.start_levels[i - 1]) {
                return Err(invalid("station.start_levels_m", "start levels must be strictly increasing"));
            }
        }
        if self.stop_levels.iter().chain(&self.start_levels).any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid("station.start_levels_m", "levels must be finite and nonnegative"));
        }
        self.pump_curve.validate().map_err(|e| invalid("pump", e.to_string()))?;
        self.system_curve.validate().map_err(|e| invalid("system", e.to_string()))?;
        if !(self.f_min >= 0.0 && self.f_min < self.f_max) {
            return Err(invalid("station.f_min_hz", "need 0 <= f_min < f_max"));
        }
        if !(self.t_ramp > 0.0) {
            return Err(invalid("station.t_ramp_s", "must be positive"));
        }
        if !(self.t_dwell >= 0.0) {
            return Err(invalid("station.t_dwell_s", "must be nonnegative"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("station.dt_s", "must be positive"));
        }
        let n = self.noise;
        if [n.level, n.flow, n.head, n.power].iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(invalid("noise", "relative sigmas must be nonnegative"));
        }
        self.electrical.validate().map_err(|e| invalid("electrical", e))?;
        if let Some(l) = self.initial_level {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(invalid("station.initial_level_m", "must be finite and nonnegative"));
            }
        }
        Ok(())
    }

    pub fn ramp_rate(&self) -> f64 {
        (self.f_max - self.f_min) / self.t_ramp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PumpMode {
    Off,
    RampUp,
    Running,
    RampDown,
    Dwell,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PumpState {
    /// 1-based pump id.
    pub id: usize,
    pub mode: PumpMode,
    pub phase_elapsed: f64,
    pub cumulative_runtime: f64,
    pub start_count: u64,
}

impl PumpState {
    pub fn new(id: usize) -> Self {
        PumpState { id, mode: PumpMode::Off, phase_elapsed: 0.0, cumulative_runtime: 0.0, start_count: 0 }
    }

    /// Commanded on: counts towards the number of running pumps.
    pub fn is_on(&self) -> bool {
        matches!(self.mode, PumpMode::RampUp | PumpMode::Running)
    }

    fn start(&mut self, t_ramp: f64) {
        match self.mode {
            PumpMode::Off => {
                self.start_count += 1;
                self.mode = PumpMode::RampUp;
                self.phase_elapsed = 0.0;
            }
            PumpMode::Dwell => {
                self.mode = PumpMode::RampUp;
                self.phase_elapsed = 0.0;
            }
            PumpMode::RampDown => {
                self.mode = PumpMode::RampUp;
                self.phase_elapsed = (t_ramp - self.phase_elapsed).max(0.0);
            }
            PumpMode::RampUp | PumpMode::Running => {}
        }
    }

    fn stop(&mut self, t_ramp: f64) {
        match self.mode {
            PumpMode::Running => {
                self.mode = PumpMode::RampDown;
                self.phase_elapsed = 0.0;
            }
            PumpMode::RampUp => {
                // reverse from the current frequency
                self.mode = PumpMode::RampDown;
                self.phase_elapsed = (t_ramp - self.phase_elapsed).max(0.0);
            }
            _ => {}
        }
    }

    fn advance(&mut self, config: &StationConfig) {
        if self.mode != PumpMode::Off {
            self.cumulative_runtime += config.dt;
        }
        self.phase_elapsed += config.dt;
        match self.mode {
            PumpMode::RampUp if self.phase_elapsed >= config.t_ramp => {
                self.mode = PumpMode::Running;
                self.phase_elapsed = 0.0;
            }
            PumpMode::RampDown if self.phase_elapsed >= config.t_ramp => {
                self.mode = if config.t_dwell > 0.0 { PumpMode::Dwell } else { PumpMode::Off };
                self.phase_elapsed = 0.0;
            }
            PumpMode::Dwell if self.phase_elapsed >= config.t_dwell => {
                self.mode = PumpMode::Off;
                self.phase_elapsed = 0.0;
            }
            _ => {}
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumpState {
    pub level: f64,
    pub t: f64,
}

/// Number of pumps that should run given the sensed level.
pub fn supervisory_transition(level: f64, n_running: usize, config: &StationConfig) -> usize {
    let n_max = config.n_pumps;
    if n_running < n_max && level >= config.start_levels[n_running] {
        n_running + 1
    } else if n_running > 0 && level <= config.stop_levels[n_running - 1] {
        n_running - 1
    } else {
        n_running
    }
}

/// First idle pump at or after `cursor` in cyclic order, and the advanced cursor.
/// Indices are 0-based.
pub fn select_lead(cursor: usize, idle: &[bool]) -> Result<(usize, usize), StationError> {
    let n = idle.len();
    (0..n).map(|k| (cursor + k) % n).find(|&i| idle[i]).map(|i| (i, (i + 1) % n)).ok_or(StationError::NoIdlePump)
}

pub fn ramp_frequency(state: &PumpState, config: &StationConfig) -> f64 {
    let r = config.ramp_rate();
    match state.mode {
        PumpMode::Off => 0.0,
        PumpMode::RampUp => (config.f_min + r * state.phase_elapsed).min(config.f_max),
        PumpMode::Running => config.f_max,
        PumpMode::RampDown => (config.f_max - r * state.phase_elapsed).max(config.f_min),
        PumpMode::Dwell => config.f_min,
    }
}

/// Outcome of one simulation step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    /// True operating point per pump (zero flow when off or stalled).
    pub points: Vec<OperatingPoint>,
    pub frequencies: Vec<f64>,
    /// Noise-free values at the start of the step.
    pub truth: Record,
    /// Sensed values at the start of the step.
    pub sensed: Record,
}

#[derive(Debug, Clone)]
pub struct Station {
    pub config: StationConfig,
    pub sump: SumpState,
    pub pumps: Vec<PumpState>,
    pub cursor: usize,
    /// Pumps currently commanded on, in start order.
    on_order: Vec<usize>,
}

impl Station {
    pub fn new(config: StationConfig) -> Result<Self, StationError> {
        config.validate()?;
        let level = config.initial_level.unwrap_or(0.5 * (config.start_levels[0] + config.stop_levels[0]));
        let pumps = (1..=config.n_pumps).map(PumpState::new).collect();
        Ok(Station { config, sump: SumpState { level, t: 0.0 }, pumps, cursor: 0, on_order: Vec::new() })
    }

    pub fn n_running(&self) -> usize {
        self.pumps.iter().filter(|p| p.is_on()).count()
    }

    fn command(&mut self, sensed_level: f64) {
        let n = self.n_running();
        let target = supervisory_transition(sensed_level, n, &self.config);
        let t_ramp = self.config.t_ramp;
        if target > n {
            let idle: Vec<bool> = self.pumps.iter().map(|p| !p.is_on()).collect();
            if let Ok((i, cursor)) = select_lead(self.cursor, &idle) {
                self.cursor = cursor;
                self.pumps[i].start(t_ramp);
                self.on_order.push(i);
            }
        } else if target < n {
            if let Some(i) = self.on_order.pop() {
                self.pumps[i].stop(t_ramp);
            }
        }
    }

    /// Advances the station by one `dt` with inflow `q_in` (m³/h).
    pub fn step<R: Rng + ?Sized>(&mut self, q_in: f64, effects: &EffectiveParameters, rng: &mut R) -> StepOutput {
        let cfg = &self.config;
        let noise = cfg.noise;
        let sensed_level = apply_relative_noise(self.sump.level, noise.level, rng).max(0.0);
        self.command(sensed_level);

        let cfg = &self.config;
        let n = cfg.n_pumps;
        let mut points = Vec::with_capacity(n);
        let mut frequencies = Vec::with_capacity(n);
        let mut truth_pumps = Vec::with_capacity(n);
        let mut sensed_pumps = Vec::with_capacity(n);
        let mut q_out = 0.0;
        for (i, pump) in self.pumps.iter().enumerate() {
            let f = ramp_frequency(pump, cfg);
            let speed = f / cfg.pump_curve.f_nominal;
            let n_eff = effects.beta.get(i).copied().unwrap_or(1.0) * speed;
            let op = if f > 0.0 {
                match solve_operating_point(&cfg.pump_curve, &effects.system, n_eff, DEFAULT_HEAD_TOL) {
                    Ok(op) => op,
                    // stalled against the check valve: no flow, shut-off head at the discharge
                    Err(_) => OperatingPoint { q: 0.0, h: pump_head(&cfg.pump_curve, 0.0, n_eff) },
                }
            } else {
                OperatingPoint { q: 0.0, h: 0.0 }
            };
            q_out += op.q;
            let (_, p_hyd) = hydraulic_power(op.q, op.h, &cfg.electrical);
            let p_elec = electrical_input_power(speed, &cfg.electrical);
            let state = u8::from(pump.mode != PumpMode::Off);
            let truth = PumpRecord { state, freq_hz: f, q_m3h: op.q, head_m: op.h, p_hyd_w: p_hyd, p_elec_w: p_elec };
            let sensed = PumpRecord {
                state,
                freq_hz: f,
                q_m3h: apply_relative_noise(op.q, noise.flow, rng).max(0.0),
                head_m: apply_relative_noise(op.h, noise.head, rng).max(0.0),
                p_hyd_w: apply_relative_noise(p_hyd, noise.power, rng).max(0.0),
                p_elec_w: apply_relative_noise(p_elec, noise.power, rng).max(0.0),
            };
            points.push(op);
            frequencies.push(f);
            truth_pumps.push(truth);
            sensed_pumps.push(sensed);
        }

        let t = self.sump.t;
        let truth = Record { t, level_m: self.sump.level, q_in_m3h: q_in, pumps: truth_pumps, label: None };
        let sensed = Record { t, level_m: sensed_level, q_in_m3h: q_in, pumps: sensed_pumps, label: None };

        let dl = cfg.dt * (q_in - q_out) / 3600.0 / cfg.area;
        self.sump.level = (self.sump.level + dl).max(0.0);
        self.sump.t += cfg.dt;
        let cfg = self.config.clone();
        for pump in self.pumps.iter_mut() {
            pump.advance(&cfg);
        }
        StepOutput { points, frequencies, truth, sensed }
    }
}

/// Sensed and noise-free series of one scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub sensed: TimeSeries,
    pub truth: TimeSeries,
    pub final_level: f64,
    pub pumps: Vec<PumpState>,
}

/// Runs the station over the inflow series (one value per step).
pub fn run_scenario(config: &StationConfig, inflow: &[f64], faults: &[FaultProfile], seed: u64) -> Result<ScenarioRun, StationError> {
    for (i, f) in faults.iter().enumerate() {
        f.validate(config.n_pumps).map_err(|e| invalid(&format!("fault.{}", i + 1), e.to_string()))?;
    }
    if let Some((i, _)) = inflow.iter().enumerate().find(|(_, q)| !(q.is_finite() && **q >= 0.0)) {
        return Err(invalid("inflow", format!("sample {i} is not a finite nonnegative flow")));
    }
    let mut station = Station::new(config.clone())?;
    let mut rng = stream(seed, Stream::SensorNoise);
    let mut sensed = TimeSeries::new(config.n_pumps);
    let mut truth = TimeSeries::new(config.n_pumps);
    sensed.records.reserve(inflow.len());
    truth.records.reserve(inflow.len());
    for &q_in in inflow {
        let t = station.sump.t;
        let effects = effective_parameters(t, &config.system_curve, faults, config.n_pumps);
        let label = Some(ground_truth(t, faults));
        let mut out = station.step(q_in, &effects, &mut rng);
        out.sensed.label = label;
        out.truth.label = label;
        sensed.records.push(out.sensed);
        truth.records.push(out.truth);
    }
    Ok(ScenarioRun { sensed, truth, final_level: station.sump.level, pumps: station.pumps })
}

/// Labeled sensed series of one scenario.
pub fn simulate_scenario(config: &StationConfig, inflow: &[f64], faults: &[FaultProfile], seed: u64) -> Result<TimeSeries, StationError> {
    run_scenario(config, inflow, faults, seed).map(|r| r.sensed)
}
