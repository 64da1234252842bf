//! End-to-end diagnosis of a station time series with both methods.

use super::ftest::classify_by_ftest;
use super::metrics::{classification_metrics, ConfusionMatrix};
use super::regression::{fit_static_quadratic, fit_system_curve};
use super::tangent::{bootstrap_index_ci, decision_index, displacement_residuals, BootstrapConfig};
use super::thresholds::{classify_segment, learn_thresholds, Thresholds, MIN_BASELINE_SEGMENTS};
use super::{Class, DiagnosticsError};
use crate::faults::Label;
use crate::hydraulics::{affinity_normalize, solve_operating_point, PumpCurve, SystemCurve, DEFAULT_FLOOR_FRACTION};
use crate::telemetry::{segment_cycles, Cycle, TimeSeries};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    FTest,
    Tangent,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::FTest => "ftest",
            Method::Tangent => "tangent",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "ftest" => Some(Method::FTest),
            "tangent" => Some(Method::Tangent),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosisConfig {
    pub f_nominal: f64,
    pub f_band: f64,
    pub min_cycle_samples: usize,
    pub segment_len: usize,
    /// Fault-free opening period used to fit nominal curves and seed thresholds (s).
    pub learning_s: f64,
    /// Threshold refresh interval (s).
    pub refresh_s: f64,
    /// Trailing window of normal segments used at each refresh (s).
    pub baseline_window_s: f64,
    pub alpha_test: f64,
    pub bootstrap: BootstrapConfig,
    pub seed: u64,
}

impl Default for DiagnosisConfig {
    fn default() -> Self {
        DiagnosisConfig {
            f_nominal: 50.0,
            f_band: 1.0,
            min_cycle_samples: 25,
            segment_len: 25,
            learning_s: 6.0 * 3600.0,
            refresh_s: 6.0 * 3600.0,
            baseline_window_s: 24.0 * 3600.0,
            alpha_test: 0.01,
            bootstrap: BootstrapConfig::default(),
            seed: 0,
        }
    }
}

/// One diagnosed window: a whole cycle for the F-test, a segment for the
/// tangent method.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub pump_id: usize,
    pub start_t: f64,
    pub end_t: f64,
    pub method: Method,
    pub i_w: Option<f64>,
    pub ci: Option<(f64, f64)>,
    pub f_stat: Option<f64>,
    pub p_value: Option<f64>,
    pub label: Class,
    pub truth: Option<Class>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosisReport {
    pub pump: PumpCurve,
    pub system: SystemCurve,
    pub verdicts: Vec<Verdict>,
    /// Thresholds in force from each time onward.
    pub thresholds: Vec<(f64, Thresholds)>,
    /// Scores over windows starting after the learning phase, when labeled.
    pub ftest_metrics: Option<ConfusionMatrix>,
    pub tangent_metrics: Option<ConfusionMatrix>,
    pub n_cycles: usize,
}

impl DiagnosisReport {
    pub fn metrics(&self, method: Method) -> Option<&ConfusionMatrix> {
        match method {
            Method::FTest => self.ftest_metrics.as_ref(),
            Method::Tangent => self.tangent_metrics.as_ref(),
        }
    }
}

/// Nominal curves from the learning phase. Samples are averaged per drive
/// frequency first: the dense cluster at nominal speed would otherwise
/// flatten the fitted slope through the noise in the flow channel. The pump
/// curve is a static quadratic on the affinity-normalized bin means, the
/// system curve a two-parameter fit on the raw bin means.
pub fn fit_nominal_curves(ts: &TimeSeries, config: &DiagnosisConfig) -> Result<(PumpCurve, SystemCurve), DiagnosticsError> {
    let mut bins: BTreeMap<i64, (f64, f64, f64, usize)> = BTreeMap::new();
    for r in ts.records.iter().take_while(|r| r.t < config.learning_s) {
        for p in &r.pumps {
            if p.state != 1 || p.q_m3h <= 0.0 || p.freq_hz <= DEFAULT_FLOOR_FRACTION * config.f_nominal {
                continue;
            }
            let b = bins.entry((p.freq_hz * 10.0).round() as i64).or_insert((0.0, 0.0, 0.0, 0));
            b.0 += p.freq_hz;
            b.1 += p.q_m3h;
            b.2 += p.head_m;
            b.3 += 1;
        }
    }
    let mut norm = Vec::new();
    let mut raw = Vec::new();
    for (f, q, h, n) in bins.into_values() {
        let (f, q, h) = (f / n as f64, q / n as f64, h / n as f64);
        if let Ok(qh) = affinity_normalize(q, h, f, config.f_nominal, DEFAULT_FLOOR_FRACTION) {
            norm.push(qh);
            raw.push((q, h));
        }
    }
    if norm.len() < 4 {
        return Err(DiagnosticsError::NoNominalData);
    }
    let fit = fit_static_quadratic(&norm)?;
    let (hs, k, _) = fit_system_curve(&raw)?;
    let pump = PumpCurve { c0: fit.theta[0], c1: fit.theta[1], c2: fit.theta[2], f_nominal: config.f_nominal };
    Ok((pump, SystemCurve { h_static: hs, k }))
}

fn truth_class(label: Label, pump_id: usize) -> Class {
    match label {
        Label::PumpFault(j) if j != pump_id => Class::Normal,
        l => l.into(),
    }
}

/// Majority ground truth over record indices; ties favour the fault classes.
fn majority_truth(ts: &TimeSeries, indices: &[usize], pump_id: usize) -> Option<Class> {
    let mut counts = [0usize; 3];
    for &i in indices {
        counts[truth_class(ts.records[i].label?, pump_id).index()] += 1;
    }
    let best = [Class::SystemFault, Class::PumpFault, Class::Normal].into_iter().max_by_key(|c| counts[c.index()])?;
    Some(best)
}

struct Segment {
    pump_id: usize,
    start_t: f64,
    end_t: f64,
    i_w: f64,
    ci: (f64, f64),
    truth: Option<Class>,
}

fn normalized(cycle: &Cycle, f_nominal: f64) -> Vec<(usize, f64, f64, f64)> {
    cycle
        .samples
        .iter()
        .filter_map(|s| {
            affinity_normalize(s.q_m3h, s.head_m, s.freq_hz, f_nominal, DEFAULT_FLOOR_FRACTION).ok().map(|(q, h)| (s.index, s.t, q, h))
        })
        .collect()
}

fn segment_seed(seed: u64, pump_id: usize, first_index: usize) -> u64 {
    seed ^ ((pump_id as u64) << 48) ^ first_index as u64
}

/// Runs both classifiers over every pump of `ts`.
pub fn diagnose(ts: &TimeSeries, config: &DiagnosisConfig) -> Result<DiagnosisReport, DiagnosticsError> {
    let (pump, system) = fit_nominal_curves(ts, config)?;
    let reference =
        solve_operating_point(&pump, &system, 1.0, 1e-10).map(|op| (op.q, op.h)).map_err(|_| DiagnosticsError::NoNominalData)?;
    let labeled = ts.is_labeled();

    let mut verdicts = Vec::new();
    let mut segments = Vec::new();
    let mut n_cycles = 0;
    for pump_id in 1..=ts.n_pumps {
        let cycles = segment_cycles(ts, pump_id, config.f_nominal, config.f_band, config.min_cycle_samples);
        n_cycles += cycles.len();
        for cycle in &cycles {
            let samples = normalized(cycle, config.f_nominal);
            if samples.is_empty() {
                continue;
            }
            let indices: Vec<usize> = samples.iter().map(|s| s.0).collect();
            let truth = if labeled { majority_truth(ts, &indices, pump_id) } else { None };
            let tqh: Vec<(f64, f64, f64)> = samples.iter().map(|s| (s.1, s.2, s.3)).collect();
            let (label, f_stat, p_value) = match classify_by_ftest(&tqh, &pump, &system, config.alpha_test) {
                Ok(test) => {
                    let d = test.deciding();
                    (test.label, d.map(|r| r.f_stat), d.map(|r| r.p_value))
                }
                Err(_) => (Class::Normal, None, None),
            };
            verdicts.push(Verdict {
                pump_id,
                start_t: cycle.start_t,
                end_t: cycle.end_t,
                method: Method::FTest,
                i_w: None,
                ci: None,
                f_stat,
                p_value,
                label,
                truth,
            });

            for chunk in samples.chunks_exact(config.segment_len.max(1)) {
                let qh: Vec<(f64, f64)> = chunk.iter().map(|s| (s.2, s.3)).collect();
                let (pp, ps) = displacement_residuals(&qh, &pump, &system, reference);
                let seed = segment_seed(config.seed, pump_id, chunk[0].0);
                let idx: Vec<usize> = chunk.iter().map(|s| s.0).collect();
                segments.push(Segment {
                    pump_id,
                    start_t: chunk[0].1,
                    end_t: chunk[chunk.len() - 1].1,
                    i_w: decision_index(&pp, &ps),
                    ci: bootstrap_index_ci(&pp, &ps, &config.bootstrap, seed),
                    truth: if labeled { majority_truth(ts, &idx, pump_id) } else { None },
                });
            }
        }
    }

    segments.sort_by(|a, b| a.start_t.total_cmp(&b.start_t).then(a.pump_id.cmp(&b.pump_id)));
    let mut thresholds = Thresholds::default();
    let mut history = vec![(0.0, thresholds)];
    let mut next_refresh = config.learning_s;
    let mut normal: Vec<(f64, f64)> = Vec::new();
    for seg in &segments {
        while seg.start_t >= next_refresh {
            let from = next_refresh - config.baseline_window_s;
            let recent: Vec<f64> = normal.iter().filter(|(t, _)| *t >= from).map(|(_, i)| *i).collect();
            if recent.len() >= MIN_BASELINE_SEGMENTS {
                thresholds = learn_thresholds(&recent)?;
                history.push((next_refresh, thresholds));
            }
            next_refresh += config.refresh_s;
        }
        let label = if seg.end_t < config.learning_s { Class::Normal } else { classify_segment(seg.ci, &thresholds) };
        if label == Class::Normal {
            normal.push((seg.end_t, seg.i_w));
        }
        verdicts.push(Verdict {
            pump_id: seg.pump_id,
            start_t: seg.start_t,
            end_t: seg.end_t,
            method: Method::Tangent,
            i_w: Some(seg.i_w),
            ci: Some(seg.ci),
            f_stat: None,
            p_value: None,
            label,
            truth: seg.truth,
        });
    }

    let score = |method: Method| -> Result<Option<ConfusionMatrix>, DiagnosticsError> {
        if !labeled {
            return Ok(None);
        }
        let (pred, truth): (Vec<Class>, Vec<Class>) = verdicts
            .iter()
            .filter(|v| v.method == method && v.start_t >= config.learning_s)
            .filter_map(|v| v.truth.map(|t| (v.label, t)))
            .unzip();
        classification_metrics(&pred, &truth).map(Some)
    };
    let ftest_metrics = score(Method::FTest)?;
    let tangent_metrics = score(Method::Tangent)?;
    Ok(DiagnosisReport { pump, system, verdicts, thresholds: history, ftest_metrics, tangent_metrics, n_cycles })
}

/// `verdicts.csv` text.
pub fn verdicts_csv(verdicts: &[Verdict]) -> String {
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    let mut out = String::from("segment_start_s,segment_end_s,pump,method,i_w,ci_lo,ci_hi,f_stat,p_value,label,truth\n");
    for v in verdicts {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            v.start_t,
            v.end_t,
            v.pump_id,
            v.method.as_str(),
            opt(v.i_w),
            opt(v.ci.map(|c| c.0)),
            opt(v.ci.map(|c| c.1)),
            opt(v.f_stat),
            opt(v.p_value),
            v.label,
            v.truth.map_or("", |t| t.as_str()),
        ));
    }
    out
}

/// `metrics.csv` text: per-class rows then a macro row for each method.
pub fn metrics_csv(report: &DiagnosisReport) -> String {
    let mut out = String::from("method,class,precision,recall,f1,support\n");
    for method in [Method::FTest, Method::Tangent] {
        let Some(m) = report.metrics(method) else { continue };
        for c in Class::ALL {
            out.push_str(&format!("{},{},{:.6},{:.6},{:.6},{}\n", method.as_str(), c, m.precision(c), m.recall(c), m.f1(c), m.support(c)));
        }
        out.push_str(&format!(
            "{},macro,{:.6},{:.6},{:.6},{}\n",
            method.as_str(),
            m.macro_precision(),
            m.macro_recall(),
            m.macro_f1(),
            m.total()
        ));
    }
    out
}
