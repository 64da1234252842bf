//! Per-second station records, CSV serialization, daily aggregates and
//! operating-cycle segmentation.

use crate::faults::Label;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

pub const SECONDS_PER_DAY: f64 = 86400.0;
pub const DEFAULT_F_BAND: f64 = 1.0;
pub const DEFAULT_MIN_CYCLE_SAMPLES: usize = 25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TelemetryError {
    #[error("line {line}: malformed header")]
    MalformedHeader { line: usize },
    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow { line: usize, expected: usize, found: usize },
    #[error("line {line}, column {column}: non-finite value")]
    NonFiniteValue { line: usize, column: String },
    #[error("line {line}, column {column}: cannot parse {value:?}")]
    BadValue { line: usize, column: String, value: String },
    #[error("line {line}: time does not increase")]
    NonIncreasingTime { line: usize },
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PumpRecord {
    pub state: u8,
    pub freq_hz: f64,
    pub q_m3h: f64,
    pub head_m: f64,
    pub p_hyd_w: f64,
    pub p_elec_w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub t: f64,
    pub level_m: f64,
    pub q_in_m3h: f64,
    pub pumps: Vec<PumpRecord>,
    /// `None` for unlabeled data.
    pub label: Option<Label>,
}

impl Record {
    pub fn q_out(&self) -> f64 {
        self.pumps.iter().map(|p| p.q_m3h).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub n_pumps: usize,
    pub records: Vec<Record>,
}

impl TimeSeries {
    pub fn new(n_pumps: usize) -> Self {
        TimeSeries { n_pumps, records: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Sample spacing, taken from the first two records (1 s when unknown).
    pub fn dt(&self) -> f64 {
        match self.records.as_slice() {
            [a, b, ..] => b.t - a.t,
            _ => 1.0,
        }
    }

    pub fn is_labeled(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(|r| r.label.is_some())
    }
}

pub fn header(n_pumps: usize) -> String {
    let mut h = String::from("t_s,level_m,q_in_m3h,");
    for i in 1..=n_pumps {
        let _ = write!(h, "p{i}_state,p{i}_freq_hz,p{i}_q_m3h,p{i}_head_m,p{i}_p_hyd_w,p{i}_p_elec_w,");
    }
    h.push_str("label");
    h
}

/// CSV text of the series. Floats use Rust's shortest round-trip formatting.
pub fn to_csv(ts: &TimeSeries) -> String {
    let mut out = String::with_capacity(64 + ts.records.len() * (40 + 80 * ts.n_pumps));
    out.push_str(&header(ts.n_pumps));
    out.push('\n');
    for r in &ts.records {
        let _ = write!(out, "{},{},{},", r.t, r.level_m, r.q_in_m3h);
        for p in &r.pumps {
            let _ = write!(out, "{},{},{},{},{},{},", p.state, p.freq_hz, p.q_m3h, p.head_m, p.p_hyd_w, p.p_elec_w);
        }
        if let Some(l) = r.label {
            out.push_str(&l.as_string());
        }
        out.push('\n');
    }
    out
}

pub fn serialize_timeseries(ts: &TimeSeries, path: &Path) -> Result<(), TelemetryError> {
    std::fs::write(path, to_csv(ts)).map_err(|e| TelemetryError::Io(format!("{}: {e}", path.display())))
}

pub fn parse_timeseries(path: &Path) -> Result<TimeSeries, TelemetryError> {
    let text = std::fs::read_to_string(path).map_err(|e| TelemetryError::Io(format!("{}: {e}", path.display())))?;
    from_csv(&text)
}

fn column_name(col: usize, n_pumps: usize) -> String {
    header(n_pumps).split(',').nth(col).unwrap_or("?").to_string()
}

pub fn from_csv(text: &str) -> Result<TimeSeries, TelemetryError> {
    let mut lines = text.lines().enumerate();
    let head = match lines.next() {
        Some((_, h)) => h.trim_end_matches('\r'),
        None => return Err(TelemetryError::MalformedHeader { line: 1 }),
    };
    let fields = head.split(',').count();
    if fields < 4 || (fields - 4) % 6 != 0 {
        return Err(TelemetryError::MalformedHeader { line: 1 });
    }
    let n_pumps = (fields - 4) / 6;
    if head != header(n_pumps) {
        return Err(TelemetryError::MalformedHeader { line: 1 });
    }
    let mut ts = TimeSeries::new(n_pumps);
    for (idx, raw) in lines {
        let line = idx + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.is_empty() {
            continue;
        }
        let cells: Vec<&str> = raw.split(',').collect();
        if cells.len() != fields {
            return Err(TelemetryError::RaggedRow { line, expected: fields, found: cells.len() });
        }
        let num = |col: usize| -> Result<f64, TelemetryError> {
            let cell = cells[col].trim();
            let v: f64 =
                cell.parse().map_err(|_| TelemetryError::BadValue { line, column: column_name(col, n_pumps), value: cell.to_string() })?;
            if !v.is_finite() {
                return Err(TelemetryError::NonFiniteValue { line, column: column_name(col, n_pumps) });
            }
            Ok(v)
        };
        let t = num(0)?;
        if let Some(prev) = ts.records.last() {
            if !(t > prev.t) {
                return Err(TelemetryError::NonIncreasingTime { line });
            }
        }
        let mut pumps = Vec::with_capacity(n_pumps);
        for i in 0..n_pumps {
            let base = 3 + 6 * i;
            let state = match cells[base].trim() {
                "0" => 0,
                "1" => 1,
                other => return Err(TelemetryError::BadValue { line, column: column_name(base, n_pumps), value: other.to_string() }),
            };
            pumps.push(PumpRecord {
                state,
                freq_hz: num(base + 1)?,
                q_m3h: num(base + 2)?,
                head_m: num(base + 3)?,
                p_hyd_w: num(base + 4)?,
                p_elec_w: num(base + 5)?,
            });
        }
        let label_cell = cells[fields - 1].trim();
        let label = if label_cell.is_empty() {
            None
        } else {
            Some(Label::parse(label_cell).ok_or_else(|| TelemetryError::BadValue {
                line,
                column: "label".into(),
                value: label_cell.to_string(),
            })?)
        };
        ts.records.push(Record { t, level_m: num(1)?, q_in_m3h: num(2)?, pumps, label });
    }
    Ok(ts)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PumpDaily {
    pub starts: u32,
    pub runtime_h: f64,
    pub energy_kwh: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DailyStats {
    pub day: i64,
    pub pumps: Vec<PumpDaily>,
}

fn day_of(t: f64) -> i64 {
    (t / SECONDS_PER_DAY).floor() as i64
}

/// Starts, runtime and electrical energy per civil day and pump.
pub fn aggregate_daily(ts: &TimeSeries) -> Vec<DailyStats> {
    let dt = ts.dt();
    let mut days: Vec<DailyStats> = Vec::new();
    let mut prev_state = vec![0u8; ts.n_pumps];
    for r in &ts.records {
        let day = day_of(r.t);
        if days.last().is_none_or(|d| d.day != day) {
            days.push(DailyStats { day, pumps: vec![PumpDaily::default(); ts.n_pumps] });
        }
        let stats = &mut days.last_mut().unwrap().pumps;
        for (i, p) in r.pumps.iter().enumerate() {
            if p.state == 1 {
                stats[i].runtime_h += dt / 3600.0;
                if prev_state[i] == 0 {
                    stats[i].starts += 1;
                }
            }
            stats[i].energy_kwh += p.p_elec_w * dt / 3.6e6;
            prev_state[i] = p.state;
        }
    }
    days
}

/// Electrical energy per hour and pump, kWh.
pub fn hourly_energy(ts: &TimeSeries) -> Vec<(i64, Vec<f64>)> {
    let dt = ts.dt();
    let mut hours: Vec<(i64, Vec<f64>)> = Vec::new();
    for r in &ts.records {
        let hour = (r.t / 3600.0).floor() as i64;
        if hours.last().is_none_or(|h| h.0 != hour) {
            hours.push((hour, vec![0.0; ts.n_pumps]));
        }
        let e = &mut hours.last_mut().unwrap().1;
        for (i, p) in r.pumps.iter().enumerate() {
            e[i] += p.p_elec_w * dt / 3.6e6;
        }
    }
    hours
}

/// Running total of electrical energy for one pump (1-based id), kWh.
pub fn cumulative_energy(ts: &TimeSeries, pump_id: usize) -> Vec<f64> {
    let dt = ts.dt();
    let mut total = 0.0;
    ts.records
        .iter()
        .map(|r| {
            total += r.pumps[pump_id - 1].p_elec_w * dt / 3.6e6;
            total
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleSample {
    /// Index of the record in the source series.
    pub index: usize,
    pub t: f64,
    pub freq_hz: f64,
    pub q_m3h: f64,
    pub head_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cycle {
    pub pump_id: usize,
    pub start_t: f64,
    pub end_t: f64,
    /// Samples within the frequency band around nominal.
    pub samples: Vec<CycleSample>,
}

/// One cycle per contiguous run of `state = 1`, keeping near-nominal samples.
pub fn segment_cycles(ts: &TimeSeries, pump_id: usize, f_nominal: f64, f_band: f64, min_samples: usize) -> Vec<Cycle> {
    let mut cycles = Vec::new();
    let mut current: Option<Cycle> = None;
    let idx = pump_id - 1;
    for (i, r) in ts.records.iter().enumerate() {
        let p = &r.pumps[idx];
        if p.state == 1 {
            let c = current.get_or_insert_with(|| Cycle { pump_id, start_t: r.t, end_t: r.t, samples: Vec::new() });
            c.end_t = r.t;
            if (p.freq_hz - f_nominal).abs() <= f_band {
                c.samples.push(CycleSample { index: i, t: r.t, freq_hz: p.freq_hz, q_m3h: p.q_m3h, head_m: p.head_m });
            }
        } else if let Some(c) = current.take() {
            cycles.push(c);
        }
    }
    cycles.extend(current);
    cycles.retain(|c| c.samples.len() >= min_samples.max(1) && c.end_t > c.start_t);
    cycles
}
