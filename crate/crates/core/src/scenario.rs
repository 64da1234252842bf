//! Scenario configuration: a flat `key = value` text format with optional
//! `[section]` headers that prefix the keys below them.
//!
//! ```text
//! seed = 7
//! horizon_s = 172800
//!
//! [station]
//! area_m2 = 8
//! start_levels_m = 1.6, 1.8, 2.2
//!
//! [fault.1]
//! kind = blockage
//! pump = 1
//! ```
//!
//! Every key is optional; omitted keys take the defaults of
//! [`ScenarioConfig::default`].

use crate::faults::{FaultKind, FaultProfile};
use crate::hydraulics::{PumpCurve, SystemCurve};
use crate::inflow::{build_ecdf, generate_inflow, station_inflow_samples, BaseInflow, InflowError, InflowSpec, PeakProcess};
use crate::station::{run_scenario, NoiseSpec, ScenarioRun, StationConfig, StationError};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("{key}: cannot parse {value:?}")]
    BadValue { key: String, value: String },
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("{0}")]
    Io(String),
}

fn invalid(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.to_string(), reason: reason.into() }
}

impl From<StationError> for ConfigError {
    fn from(e: StationError) -> Self {
        match e {
            StationError::InvalidConfig { field, reason } => ConfigError::Invalid { field, reason },
            other => invalid("station", other.to_string()),
        }
    }
}

/// Where the empirical inflow distribution comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum EcdfSource {
    /// Built-in station inflow fixture with this many samples.
    Station { size: usize },
    /// Explicit samples, m³/h.
    Samples(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum BaseConfig {
    Ecdf { source: EcdfSource, scale: f64 },
    Sinusoid { mean: f64, amplitude: f64, period: f64, noise_sigma: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InflowConfig {
    pub base: BaseConfig,
    pub peaks: Option<PeakProcess>,
}

impl Default for InflowConfig {
    fn default() -> Self {
        InflowConfig {
            base: BaseConfig::Ecdf { source: EcdfSource::Station { size: 10_000 }, scale: 1.0 },
            peaks: Some(PeakProcess { rate: 0.0005, magnitude: 30.0, duration: 900.0 }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub station: StationConfig,
    pub inflow: InflowConfig,
    pub faults: Vec<FaultProfile>,
    pub seed: u64,
    /// Simulated duration, s.
    pub horizon: f64,
    /// Disables sensor noise.
    pub noiseless: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            station: StationConfig::default(),
            inflow: InflowConfig::default(),
            faults: Vec::new(),
            seed: 0,
            horizon: 172_800.0,
            noiseless: false,
        }
    }
}

impl ScenarioConfig {
    pub fn steps(&self) -> usize {
        (self.horizon / self.station.dt).round() as usize
    }

    /// Station settings actually simulated (noise removed when `noiseless`).
    pub fn effective_station(&self) -> StationConfig {
        let mut s = self.station.clone();
        if self.noiseless {
            s.noise = NoiseSpec::NONE;
        }
        s
    }

    pub fn inflow_spec(&self) -> Result<InflowSpec, ConfigError> {
        let base = match &self.inflow.base {
            BaseConfig::Ecdf { source, scale } => {
                let samples = match source {
                    EcdfSource::Station { size } => station_inflow_samples(*size),
                    EcdfSource::Samples(v) => v.clone(),
                };
                let scaled: Vec<f64> = samples.iter().map(|q| q * scale).collect();
                BaseInflow::Ecdf(build_ecdf(&scaled).map_err(|e| invalid("inflow.ecdf", e.to_string()))?)
            }
            BaseConfig::Sinusoid { mean, amplitude, period, noise_sigma } => {
                BaseInflow::Sinusoid { mean: *mean, amplitude: *amplitude, period: *period, noise_sigma: *noise_sigma }
            }
        };
        Ok(InflowSpec { base, peaks: self.inflow.peaks, horizon: self.steps(), seed: self.seed })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.horizon >= 1.0 && self.horizon.is_finite()) {
            return Err(invalid("horizon_s", "must be at least 1 s"));
        }
        self.station.validate()?;
        if let BaseConfig::Ecdf { source, scale } = &self.inflow.base {
            if !(*scale >= 0.0 && scale.is_finite()) {
                return Err(invalid("inflow.ecdf.scale", "must be finite and nonnegative"));
            }
            if matches!(source, EcdfSource::Station { size: 0 }) {
                return Err(invalid("inflow.ecdf.size", "must be at least 1"));
            }
        }
        self.inflow_spec()?.validate().map_err(|e| match e {
            InflowError::InvalidSpec(r) => invalid("inflow", r),
            other => invalid("inflow", other.to_string()),
        })?;
        for (i, f) in self.faults.iter().enumerate() {
            f.validate(self.station.n_pumps).map_err(|e| invalid(&format!("fault.{}", i + 1), e.to_string()))?;
        }
        Ok(())
    }

    /// Generates the inflow series and runs the station.
    pub fn run(&self) -> Result<(Vec<f64>, ScenarioRun), ConfigError> {
        self.validate()?;
        let inflow = generate_inflow(&self.inflow_spec()?).map_err(|e| invalid("inflow", e.to_string()))?;
        let run = run_scenario(&self.effective_station(), &inflow, &self.faults, self.seed)?;
        Ok((inflow, run))
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        parse_config(&text)
    }
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key).map(|(_, v)| v)
    }

    fn num<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError::BadValue { key: key.to_string(), value: v }),
        }
    }

    fn opt_num(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.take(key).map(|v| v.parse().map_err(|_| ConfigError::BadValue { key: key.to_string(), value: v })).transpose()
    }

    fn list(&mut self, key: &str, default: Vec<f64>) -> Result<Vec<f64>, ConfigError> {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v
                .split(',')
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>().map_err(|_| ConfigError::BadValue { key: key.to_string(), value: v.clone() }))
                .collect(),
        }
    }

    fn bool(&mut self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.take(key).as_deref() {
            None => Ok(default),
            Some("true") | Some("yes") | Some("1") => Ok(true),
            Some("false") | Some("no") | Some("0") => Ok(false),
            Some(v) => Err(ConfigError::BadValue { key: key.to_string(), value: v.to_string() }),
        }
    }
}

fn read_entries(text: &str) -> Result<Entries, ConfigError> {
    let mut map = BTreeMap::new();
    let mut prefix = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::Syntax { line: line_no, reason: "unterminated section header".into() })?
                .trim();
            prefix = if name.is_empty() { String::new() } else { format!("{name}.") };
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax { line: line_no, reason: "expected `key = value`".into() })?;
        let key = format!("{prefix}{}", k.trim());
        if map.insert(key.clone(), (line_no, v.trim().to_string())).is_some() {
            return Err(ConfigError::DuplicateKey { line: line_no, key });
        }
    }
    Ok(Entries { map })
}

/// Parses and validates a scenario file.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut e = read_entries(text)?;
    let d = ScenarioConfig::default();
    let ds = &d.station;

    let n_pumps: usize = e.num("station.n_pumps", ds.n_pumps)?;
    let (start_default, stop_default) =
        if n_pumps == ds.n_pumps { (ds.start_levels.clone(), ds.stop_levels.clone()) } else { (Vec::new(), Vec::new()) };
    let station = StationConfig {
        area: e.num("station.area_m2", ds.area)?,
        n_pumps,
        start_levels: e.list("station.start_levels_m", start_default)?,
        stop_levels: e.list("station.stop_levels_m", stop_default)?,
        pump_curve: PumpCurve {
            c0: e.num("pump.c0", ds.pump_curve.c0)?,
            c1: e.num("pump.c1", ds.pump_curve.c1)?,
            c2: e.num("pump.c2", ds.pump_curve.c2)?,
            f_nominal: e.num("pump.f_nominal_hz", ds.pump_curve.f_nominal)?,
        },
        system_curve: SystemCurve {
            h_static: e.num("system.h_static_m", ds.system_curve.h_static)?,
            k: e.num("system.k", ds.system_curve.k)?,
        },
        f_min: e.num("station.f_min_hz", ds.f_min)?,
        f_max: e.num("station.f_max_hz", ds.f_max)?,
        t_ramp: e.num("station.t_ramp_s", ds.t_ramp)?,
        t_dwell: e.num("station.t_dwell_s", ds.t_dwell)?,
        noise: NoiseSpec {
            level: e.num("noise.level", ds.noise.level)?,
            flow: e.num("noise.flow", ds.noise.flow)?,
            head: e.num("noise.head", ds.noise.head)?,
            power: e.num("noise.power", ds.noise.power)?,
        },
        electrical: crate::power::ElectricalSpec {
            voltage: e.num("electrical.voltage_v", ds.electrical.voltage)?,
            current_nominal: e.num("electrical.current_a", ds.electrical.current_nominal)?,
            cos_phi: e.num("electrical.cos_phi", ds.electrical.cos_phi)?,
            inrush_cap: e.num("electrical.inrush_cap", ds.electrical.inrush_cap)?,
            rho: e.num("electrical.rho_kg_m3", ds.electrical.rho)?,
            g: e.num("electrical.g_m_s2", ds.electrical.g)?,
            efficiency: e.num("electrical.efficiency", ds.electrical.efficiency)?,
        },
        dt: e.num("station.dt_s", ds.dt)?,
        nominal_rpm: e.num("station.nominal_rpm", ds.nominal_rpm)?,
        initial_level: e.opt_num("station.initial_level_m")?,
    };

    let base_kind = e.take("inflow.base").unwrap_or_else(|| "ecdf".into());
    let base = match base_kind.as_str() {
        "ecdf" => {
            let source = match e.take("inflow.ecdf.source").as_deref().unwrap_or("station") {
                "station" => EcdfSource::Station { size: e.num("inflow.ecdf.size", 10_000)? },
                "samples" => EcdfSource::Samples(e.list("inflow.ecdf.samples_m3h", Vec::new())?),
                other => return Err(ConfigError::BadValue { key: "inflow.ecdf.source".into(), value: other.into() }),
            };
            BaseConfig::Ecdf { source, scale: e.num("inflow.ecdf.scale", 1.0)? }
        }
        "sinusoid" => BaseConfig::Sinusoid {
            mean: e.num("inflow.sinusoid.mean_m3h", 60.0)?,
            amplitude: e.num("inflow.sinusoid.amplitude_m3h", 20.0)?,
            period: e.num("inflow.sinusoid.period_s", 86_400.0)?,
            noise_sigma: e.num("inflow.sinusoid.noise_sigma_m3h", 5.0)?,
        },
        other => return Err(ConfigError::BadValue { key: "inflow.base".into(), value: other.into() }),
    };
    let peaks = if e.bool("inflow.peak.enabled", true)? {
        let dp = d.inflow.peaks.unwrap();
        Some(PeakProcess {
            rate: e.num("inflow.peak.rate_per_s", dp.rate)?,
            magnitude: e.num("inflow.peak.magnitude_m3h", dp.magnitude)?,
            duration: e.num("inflow.peak.duration_s", dp.duration)?,
        })
    } else {
        None
    };

    let mut faults = Vec::new();
    for i in 1.. {
        let p = format!("fault.{i}.");
        if !e.map.keys().any(|k| k.starts_with(&p)) {
            break;
        }
        let kind_key = format!("{p}kind");
        let kind = match e.take(&kind_key).as_deref() {
            Some("blockage") => {
                FaultKind::Blockage { pump: e.num(&format!("{p}pump"), 1)?, severity: e.num(&format!("{p}severity"), 0.4)? }
            }
            Some("clogging") => FaultKind::Clogging {
                friction_rel: e.num(&format!("{p}friction_rel"), 1.0)?,
                static_head: e.num(&format!("{p}static_head_m"), 0.0)?,
            },
            Some(other) => return Err(ConfigError::BadValue { key: kind_key, value: other.into() }),
            None => return Err(invalid(&kind_key, "missing fault kind")),
        };
        let start_key = format!("{p}start_s");
        let end_key = format!("{p}end_s");
        let start = e.opt_num(&start_key)?.ok_or_else(|| invalid(&start_key, "missing"))?;
        let end = e.opt_num(&end_key)?.ok_or_else(|| invalid(&end_key, "missing"))?;
        let cleared_at = e.opt_num(&format!("{p}cleared_s"))?;
        faults.push(FaultProfile { kind, start, end, cleared_at });
    }

    let cfg = ScenarioConfig {
        station,
        inflow: InflowConfig { base, peaks },
        faults,
        seed: e.num("seed", d.seed)?,
        horizon: e.num("horizon_s", d.horizon)?,
        noiseless: e.bool("noiseless", d.noiseless)?,
    };
    if let Some((key, (line, _))) = e.map.into_iter().next() {
        return Err(ConfigError::UnknownKey { line, key });
    }
    cfg.validate()?;
    Ok(cfg)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// Writes every effective setting; the output parses back to an equal config.
pub fn dump_config(cfg: &ScenarioConfig) -> String {
    let s = &cfg.station;
    let mut o = String::new();
    let _ = writeln!(o, "seed = {}\nhorizon_s = {}\nnoiseless = {}\n", cfg.seed, cfg.horizon, cfg.noiseless);
    let _ = writeln!(o, "[station]");
    let _ = writeln!(o, "area_m2 = {}\nn_pumps = {}", s.area, s.n_pumps);
    let _ = writeln!(o, "start_levels_m = {}\nstop_levels_m = {}", join(&s.start_levels), join(&s.stop_levels));
    let _ = writeln!(o, "f_min_hz = {}\nf_max_hz = {}\nt_ramp_s = {}\nt_dwell_s = {}", s.f_min, s.f_max, s.t_ramp, s.t_dwell);
    let _ = writeln!(o, "dt_s = {}\nnominal_rpm = {}", s.dt, s.nominal_rpm);
    if let Some(l) = s.initial_level {
        let _ = writeln!(o, "initial_level_m = {l}");
    }
    let p = &s.pump_curve;
    let _ = writeln!(o, "\n[pump]\nc0 = {}\nc1 = {}\nc2 = {}\nf_nominal_hz = {}", p.c0, p.c1, p.c2, p.f_nominal);
    let _ = writeln!(o, "\n[system]\nh_static_m = {}\nk = {}", s.system_curve.h_static, s.system_curve.k);
    let n = &s.noise;
    let _ = writeln!(o, "\n[noise]\nlevel = {}\nflow = {}\nhead = {}\npower = {}", n.level, n.flow, n.head, n.power);
    let el = &s.electrical;
    let _ = writeln!(
        o,
        "\n[electrical]\nvoltage_v = {}\ncurrent_a = {}\ncos_phi = {}\ninrush_cap = {}\nrho_kg_m3 = {}\ng_m_s2 = {}\nefficiency = {}",
        el.voltage, el.current_nominal, el.cos_phi, el.inrush_cap, el.rho, el.g, el.efficiency
    );
    let _ = writeln!(o, "\n[inflow]");
    match &cfg.inflow.base {
        BaseConfig::Ecdf { source, scale } => {
            let _ = writeln!(o, "base = ecdf\necdf.scale = {scale}");
            match source {
                EcdfSource::Station { size } => {
                    let _ = writeln!(o, "ecdf.source = station\necdf.size = {size}");
                }
                EcdfSource::Samples(v) => {
                    let _ = writeln!(o, "ecdf.source = samples\necdf.samples_m3h = {}", join(v));
                }
            }
        }
        BaseConfig::Sinusoid { mean, amplitude, period, noise_sigma } => {
            let _ = writeln!(
                o,
                "base = sinusoid\nsinusoid.mean_m3h = {mean}\nsinusoid.amplitude_m3h = {amplitude}\nsinusoid.period_s = {period}\nsinusoid.noise_sigma_m3h = {noise_sigma}"
            );
        }
    }
    match &cfg.inflow.peaks {
        Some(pk) => {
            let _ = writeln!(
                o,
                "peak.enabled = true\npeak.rate_per_s = {}\npeak.magnitude_m3h = {}\npeak.duration_s = {}",
                pk.rate, pk.magnitude, pk.duration
            );
        }
        None => {
            let _ = writeln!(o, "peak.enabled = false");
        }
    }
    for (i, f) in cfg.faults.iter().enumerate() {
        let _ = writeln!(o, "\n[fault.{}]", i + 1);
        match f.kind {
            FaultKind::Blockage { pump, severity } => {
                let _ = writeln!(o, "kind = blockage\npump = {pump}\nseverity = {severity}");
            }
            FaultKind::Clogging { friction_rel, static_head } => {
                let _ = writeln!(o, "kind = clogging\nfriction_rel = {friction_rel}\nstatic_head_m = {static_head}");
            }
        }
        let _ = writeln!(o, "start_s = {}\nend_s = {}", f.start, f.end);
        if let Some(c) = f.cleared_at {
            let _ = writeln!(o, "cleared_s = {c}");
        }
    }
    o
}

/// Bundled scenario files, by name.
pub const BUNDLED: [(&str, &str); 5] = [
    ("nominal", include_str!("../fixtures/nominal.cfg")),
    ("blockage", include_str!("../fixtures/blockage.cfg")),
    ("clogging", include_str!("../fixtures/clogging.cfg")),
    ("twoday", include_str!("../fixtures/twoday.cfg")),
    ("degradation", include_str!("../fixtures/degradation.cfg")),
];

pub fn bundled(name: &str) -> Option<ScenarioConfig> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, text)| parse_config(text).expect("bundled config is valid"))
}
