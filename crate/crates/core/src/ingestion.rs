//! SCADA-style level/state frames: preprocessing, inflow inference and
//! validation metrics against a reference series.

use crate::hydraulics::{solve_operating_point, PumpCurve, SystemCurve, DEFAULT_HEAD_TOL};
use crate::telemetry::{aggregate_daily, TimeSeries};
use thiserror::Error;

/// Gaps longer than this are reported by the audit (s).
pub const GAP_AUDIT_S: f64 = 10.0;
/// Rows closer than this to their predecessor are treated as duplicates (s).
pub const MIN_DT_S: f64 = 0.1;
/// Inferred flows above this magnitude are discarded as spikes (m³/h; 0.4 m³/s).
pub const SPIKE_LIMIT_M3H: f64 = 0.4 * 3600.0;
pub const START_DELTA_FLAG: i64 = 3;
pub const RUNTIME_DELTA_FLAG_H: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestionError {
    #[error("need at least 3 rows, got {0}")]
    TooFewRows(usize),
    #[error("reference series is constant")]
    ConstantReference,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("time ranges do not overlap")]
    DisjointRanges,
    #[error("pump count differs: {0} vs {1}")]
    PumpCountMismatch(usize, usize),
    #[error("correction window must satisfy t_a < t_b")]
    BadWindow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScadaRow {
    pub t: f64,
    /// Pump states z_j ∈ {0, 1}.
    pub states: Vec<u8>,
    pub level_m: f64,
    /// Per-pump speed ratio f / f_nominal, when the drive reports it.
    pub speed: Option<Vec<f64>>,
    /// Per-pump electrical power (W), when metered.
    pub power_w: Option<Vec<f64>>,
    /// Set once a level offset correction has been applied to this row.
    pub level_corrected: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScadaFrame {
    pub n_pumps: usize,
    pub rows: Vec<ScadaRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    pub after_t: f64,
    pub before_t: f64,
}

impl Gap {
    pub fn length(&self) -> f64 {
        self.before_t - self.after_t
    }
}

/// Frame view of a station series, with drive speeds from the frequency channel.
pub fn from_timeseries(ts: &TimeSeries, f_nominal: f64) -> ScadaFrame {
    let rows = ts
        .records
        .iter()
        .map(|r| ScadaRow {
            t: r.t,
            states: r.pumps.iter().map(|p| p.state).collect(),
            level_m: r.level_m,
            speed: Some(r.pumps.iter().map(|p| p.freq_hz / f_nominal).collect()),
            power_w: Some(r.pumps.iter().map(|p| p.p_elec_w).collect()),
            level_corrected: false,
        })
        .collect();
    ScadaFrame { n_pumps: ts.n_pumps, rows }
}

/// Adds `offset` to levels with `t_a <= t <= t_b` (once per row), sorts by
/// time, drops exact duplicate rows and audits gaps above 10 s. Gaps are
/// reported, not filled.
pub fn preprocess_levels(frame: &ScadaFrame, window: (f64, f64), offset: f64) -> Result<(ScadaFrame, Vec<Gap>), IngestionError> {
    let (ta, tb) = window;
    if !(ta < tb) {
        return Err(IngestionError::BadWindow);
    }
    let mut rows = frame.rows.clone();
    for r in rows.iter_mut() {
        if r.t >= ta && r.t <= tb && !r.level_corrected && offset != 0.0 {
            r.level_m += offset;
            r.level_corrected = true;
        }
    }
    rows.sort_by(|a, b| a.t.total_cmp(&b.t));
    rows.dedup();
    let gaps = rows.windows(2).filter(|w| w[1].t - w[0].t > GAP_AUDIT_S).map(|w| Gap { after_t: w[0].t, before_t: w[1].t }).collect();
    Ok((ScadaFrame { n_pumps: frame.n_pumps, rows }, gaps))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InflowSample {
    pub t: f64,
    pub q_m3h: f64,
}

/// Level-derivative estimator used by [`infer_inflow_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DifferenceScheme {
    /// Centered inside, one-sided at the ends.
    #[default]
    Centered,
    /// (L_{i+1} − L_i)/Δt, backward at the last row. This is the exact
    /// inverse of a forward-Euler sump update, where the flow applied over
    /// [t_i, t_{i+1}) is stamped at t_i.
    Forward,
}

/// Inflow from the sump mass balance, Q_in = A·dL/dt + Σ z_j Q_j, with
/// centered level differences inside and one-sided ones at the ends. Rows
/// within 0.1 s of their predecessor are dropped before differencing;
/// results above 0.4 m³/s in magnitude or below zero are removed.
pub fn infer_inflow(frame: &ScadaFrame, area: f64, pump: &PumpCurve, system: &SystemCurve) -> Result<Vec<InflowSample>, IngestionError> {
    infer_inflow_with(frame, area, pump, system, DifferenceScheme::Centered)
}

pub fn infer_inflow_with(
    frame: &ScadaFrame,
    area: f64,
    pump: &PumpCurve,
    system: &SystemCurve,
    scheme: DifferenceScheme,
) -> Result<Vec<InflowSample>, IngestionError> {
    let mut rows: Vec<&ScadaRow> = Vec::with_capacity(frame.rows.len());
    for r in &frame.rows {
        match rows.last() {
            Some(prev) if (r.t - prev.t).abs() < MIN_DT_S => {}
            _ => rows.push(r),
        }
    }
    let n = rows.len();
    if n < 3 {
        return Err(IngestionError::TooFewRows(n));
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = match (scheme, i) {
            (_, 0) => (0, 1),
            (_, _) if i == n - 1 => (n - 2, n - 1),
            (DifferenceScheme::Centered, _) => (i - 1, i + 1),
            (DifferenceScheme::Forward, _) => (i, i + 1),
        };
        let dl_dt = (rows[b].level_m - rows[a].level_m) / (rows[b].t - rows[a].t);
        let r = rows[i];
        let q_pumps: f64 = r
            .states
            .iter()
            .enumerate()
            .filter(|(_, z)| **z == 1)
            .map(|(j, _)| {
                let speed = r.speed.as_ref().map_or(1.0, |s| s[j]);
                if speed <= 0.0 {
                    return 0.0;
                }
                solve_operating_point(pump, system, speed, DEFAULT_HEAD_TOL).map_or(0.0, |op| op.q)
            })
            .sum();
        let q = area * dl_dt * 3600.0 + q_pumps;
        if q.abs() > SPIKE_LIMIT_M3H || q < 0.0 {
            continue;
        }
        out.push(InflowSample { t: r.t, q_m3h: q });
    }
    Ok(out)
}

/// mean|sim − ref| / (max ref − min ref).
pub fn nmae(sim: &[f64], reference: &[f64]) -> Result<f64, IngestionError> {
    if sim.len() != reference.len() {
        return Err(IngestionError::LengthMismatch(sim.len(), reference.len()));
    }
    let max = reference.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = reference.iter().copied().fold(f64::INFINITY, f64::min);
    let range = max - min;
    if !(range > 0.0) {
        return Err(IngestionError::ConstantReference);
    }
    let mae = sim.iter().zip(reference).map(|(a, b)| (a - b).abs()).sum::<f64>() / sim.len() as f64;
    Ok(mae / range)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DailyDelta {
    pub day: i64,
    pub pump_id: usize,
    /// Simulated minus reference.
    pub start_delta: i64,
    pub runtime_delta_h: f64,
    pub start_flag: bool,
    pub runtime_flag: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub level_nmae: f64,
    pub overlap: (f64, f64),
    pub daily: Vec<DailyDelta>,
}

/// Level NMAE over the common time range and per-pump daily start and
/// runtime deltas, flagged at |Δstarts| ≥ 3 and |Δruntime| > 0.5 h.
pub fn validation_report(reference: &TimeSeries, simulated: &TimeSeries) -> Result<ValidationReport, IngestionError> {
    if reference.n_pumps != simulated.n_pumps {
        return Err(IngestionError::PumpCountMismatch(reference.n_pumps, simulated.n_pumps));
    }
    let (Some(r0), Some(s0)) = (reference.records.first(), simulated.records.first()) else {
        return Err(IngestionError::DisjointRanges);
    };
    let lo = r0.t.max(s0.t);
    let hi = reference.records.last().unwrap().t.min(simulated.records.last().unwrap().t);
    if lo > hi {
        return Err(IngestionError::DisjointRanges);
    }
    let window = |ts: &TimeSeries| TimeSeries {
        n_pumps: ts.n_pumps,
        records: ts.records.iter().filter(|r| r.t >= lo && r.t <= hi).cloned().collect(),
    };
    let (rw, sw) = (window(reference), window(simulated));
    // pair samples on the reference clock
    let mut sim_levels = Vec::with_capacity(rw.len());
    let mut ref_levels = Vec::with_capacity(rw.len());
    let mut j = 0;
    for r in &rw.records {
        while j + 1 < sw.records.len() && sw.records[j + 1].t <= r.t {
            j += 1;
        }
        if let Some(s) = sw.records.get(j) {
            sim_levels.push(s.level_m);
            ref_levels.push(r.level_m);
        }
    }
    let level_nmae = nmae(&sim_levels, &ref_levels)?;
    let rd = aggregate_daily(&rw);
    let sd = aggregate_daily(&sw);
    let mut daily = Vec::new();
    for r in &rd {
        let Some(s) = sd.iter().find(|s| s.day == r.day) else { continue };
        for (j, (rp, sp)) in r.pumps.iter().zip(&s.pumps).enumerate() {
            let start_delta = sp.starts as i64 - rp.starts as i64;
            let runtime_delta_h = sp.runtime_h - rp.runtime_h;
            daily.push(DailyDelta {
                day: r.day,
                pump_id: j + 1,
                start_delta,
                runtime_delta_h,
                start_flag: start_delta.abs() >= START_DELTA_FLAG,
                runtime_flag: runtime_delta_h.abs() > RUNTIME_DELTA_FLAG_H,
            });
        }
    }
    Ok(ValidationReport { level_nmae, overlap: (lo, hi), daily })
}

/// `validation.csv` text.
pub fn validation_csv(report: &ValidationReport) -> String {
    let mut out = String::from("metric,day,pump,value,flag\n");
    out.push_str(&format!("level_nmae,,,{},\n", report.level_nmae));
    for d in &report.daily {
        out.push_str(&format!("start_delta,{},{},{},{}\n", d.day, d.pump_id, d.start_delta, u8::from(d.start_flag)));
        out.push_str(&format!("runtime_delta_h,{},{},{},{}\n", d.day, d.pump_id, d.runtime_delta_h, u8::from(d.runtime_flag)));
    }
    out
}
