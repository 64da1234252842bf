//! Stochastic inflow: empirical-CDF baseline, Poisson surge trains and a
//! diurnal sinusoid with Gaussian noise.

use crate::rng::{stream, Stream};
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InflowError {
    #[error("empirical CDF needs at least one sample")]
    EmptySamples,
    #[error("sample {index} is not a finite nonnegative flow: {value}")]
    InvalidSample { index: usize, value: f64 },
    #[error("invalid inflow spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// F̂(q): fraction of samples ≤ q.
    pub fn cdf(&self, q: f64) -> f64 {
        let count = self.sorted.partition_point(|&x| x <= q);
        count as f64 / self.sorted.len() as f64
    }

    /// Generalized inverse: smallest order statistic q_(j) with j/m > u.
    pub fn quantile(&self, u: f64) -> f64 {
        let m = self.sorted.len();
        // j/m > u  <=>  j > u·m ; first such j is floor(u·m) + 1 (1-based)
        let j = ((u * m as f64).floor() as usize + 1).clamp(1, m);
        self.sorted[j - 1]
    }
}

pub fn build_ecdf(samples: &[f64]) -> Result<EmpiricalCdf, InflowError> {
    if samples.is_empty() {
        return Err(InflowError::EmptySamples);
    }
    if let Some((index, &value)) = samples.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
        return Err(InflowError::InvalidSample { index, value });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    Ok(EmpiricalCdf { sorted })
}

pub fn sample_baseline(ecdf: &EmpiricalCdf, u: f64) -> f64 {
    ecdf.quantile(u)
}

/// Quantile knots (probability, m³/s) of the built-in inflow fixture. The
/// median, 95th and 99th percentiles reproduce the station's inferred inflow
/// summary (0.016, 0.032, 0.040 m³/s).
const TABLE_KNOTS: [(f64, f64); 8] =
    [(0.0, 0.0), (0.05, 0.005), (0.25, 0.011), (0.5, 0.016), (0.75, 0.022), (0.95, 0.032), (0.99, 0.040), (1.0, 0.050)];

/// Deterministic inflow sample set (m³/h) standing in for the measured station inflow.
pub fn station_inflow_samples(m: usize) -> Vec<f64> {
    (0..m)
        .map(|j| {
            let p = (j as f64 + 0.5) / m as f64;
            let i = TABLE_KNOTS.iter().rposition(|&(pk, _)| pk <= p).unwrap().min(TABLE_KNOTS.len() - 2);
            let (p0, q0) = TABLE_KNOTS[i];
            let (p1, q1) = TABLE_KNOTS[i + 1];
            (q0 + (q1 - q0) * (p - p0) / (p1 - p0)) * 3600.0
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakProcess {
    /// Events per second.
    pub rate: f64,
    /// Added flow per event, m³/h.
    pub magnitude: f64,
    /// Event duration, s.
    pub duration: f64,
}

impl PeakProcess {
    pub fn validate(&self) -> Result<(), InflowError> {
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            return Err(InflowError::InvalidSpec("peak rate must be nonnegative".into()));
        }
        if !(self.magnitude >= 0.0 && self.magnitude.is_finite()) {
            return Err(InflowError::InvalidSpec("peak magnitude must be nonnegative".into()));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(InflowError::InvalidSpec("peak duration must be positive".into()));
        }
        Ok(())
    }
}

/// Poisson event train as `(start, end)` intervals within `[0, horizon)`.
pub fn generate_peak_train<R: Rng + ?Sized>(process: &PeakProcess, horizon: f64, rng: &mut R) -> Vec<(f64, f64)> {
    let mut events = Vec::new();
    if process.rate <= 0.0 {
        return events;
    }
    let gap = Exp::new(process.rate).expect("positive rate");
    let mut t = 0.0;
    loop {
        t += gap.sample(rng);
        if t >= horizon {
            break;
        }
        events.push((t, t + process.duration));
    }
    events
}

#[derive(Debug, Clone, PartialEq)]
pub enum BaseInflow {
    Ecdf(EmpiricalCdf),
    Sinusoid { mean: f64, amplitude: f64, period: f64, noise_sigma: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InflowSpec {
    pub base: BaseInflow,
    pub peaks: Option<PeakProcess>,
    /// Number of one-second samples.
    pub horizon: usize,
    pub seed: u64,
}

impl InflowSpec {
    pub fn validate(&self) -> Result<(), InflowError> {
        if self.horizon < 1 {
            return Err(InflowError::InvalidSpec("horizon must be at least 1 s".into()));
        }
        if let BaseInflow::Sinusoid { mean, amplitude, period, noise_sigma } = self.base {
            if !(amplitude >= 0.0 && amplitude <= mean) {
                return Err(InflowError::InvalidSpec("sinusoid amplitude must lie in [0, mean]".into()));
            }
            if !(period > 0.0) {
                return Err(InflowError::InvalidSpec("sinusoid period must be positive".into()));
            }
            if !(noise_sigma >= 0.0) {
                return Err(InflowError::InvalidSpec("noise sigma must be nonnegative".into()));
            }
        }
        if let BaseInflow::Ecdf(e) = &self.base {
            if e.is_empty() {
                return Err(InflowError::EmptySamples);
            }
        }
        if let Some(p) = &self.peaks {
            p.validate()?;
        }
        Ok(())
    }
}

/// Per-second inflow series (m³/h), one value per second of the horizon.
pub fn generate_inflow(spec: &InflowSpec) -> Result<Vec<f64>, InflowError> {
    spec.validate()?;
    let n = spec.horizon;
    let mut q = match &spec.base {
        BaseInflow::Ecdf(ecdf) => {
            let mut rng = stream(spec.seed, Stream::Baseline);
            (0..n).map(|_| sample_baseline(ecdf, rng.gen::<f64>())).collect::<Vec<_>>()
        }
        BaseInflow::Sinusoid { mean, amplitude, period, noise_sigma } => {
            let omega = 2.0 * std::f64::consts::PI / period;
            let mut base: Vec<f64> = (0..n).map(|t| mean + amplitude * (omega * t as f64).sin()).collect();
            if *noise_sigma > 0.0 {
                let mut rng = stream(spec.seed, Stream::InflowNoise);
                let normal = Normal::new(0.0, *noise_sigma).expect("finite sigma");
                for v in base.iter_mut() {
                    *v += normal.sample(&mut rng);
                }
            }
            base
        }
    };
    if let Some(process) = &spec.peaks {
        let mut rng = stream(spec.seed, Stream::Arrivals);
        for (start, end) in generate_peak_train(process, n as f64, &mut rng) {
            // sample t sees the event when start <= t < end
            let first = start.ceil() as usize;
            let last = (end.ceil() as usize).min(n);
            for v in &mut q[first.min(n)..last] {
                *v += process.magnitude;
            }
        }
    }
    for v in q.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ecdf_examples() {
        let e = build_ecdf(&[3.0, 1.0, 2.0]).unwrap();
        assert!((e.cdf(2.0) - 2.0 / 3.0).abs() < 1e-15);
        let one = build_ecdf(&[5.0]).unwrap();
        assert_eq!(one.cdf(4.999), 0.0);
        assert_eq!(one.cdf(5.0), 1.0);
        assert_eq!(build_ecdf(&[]), Err(InflowError::EmptySamples));
        assert!(build_ecdf(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn generalized_inverse() {
        let e = build_ecdf(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(sample_baseline(&e, 0.0), 1.0);
        assert_eq!(sample_baseline(&e, 0.99), 3.0);
        assert_eq!(sample_baseline(&e, 0.5), 2.0);
        assert_eq!(sample_baseline(&e, 1.0 / 3.0), 2.0);
        assert_eq!(sample_baseline(&e, 0.3333), 1.0);
    }

    #[test]
    fn station_fixture_quantiles() {
        let e = build_ecdf(&station_inflow_samples(10_000)).unwrap();
        let to_si = |u: f64| e.quantile(u) / 3600.0;
        assert!((to_si(0.5) - 0.016).abs() < 1e-4);
        assert!((to_si(0.95) - 0.032).abs() < 1e-4);
        assert!((to_si(0.99) - 0.040).abs() < 1e-4);
    }

    #[test]
    fn no_peaks_when_rate_zero() {
        let p = PeakProcess { rate: 0.0, magnitude: 30.0, duration: 900.0 };
        let mut rng = stream(1, Stream::Arrivals);
        assert!(generate_peak_train(&p, 86400.0, &mut rng).is_empty());
    }

    #[test]
    fn daily_peak_counts_are_poisson() {
        let p = PeakProcess { rate: 0.0005, magnitude: 30.0, duration: 900.0 };
        let lambda = 43.2f64;
        let counts: Vec<f64> = (0..400)
            .map(|seed| {
                let mut rng = stream(seed, Stream::Arrivals);
                generate_peak_train(&p, 86400.0, &mut rng).len() as f64
            })
            .collect();
        let n = counts.len() as f64;
        let mean = counts.iter().sum::<f64>() / n;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - lambda).abs() < 4.0 * (lambda / n).sqrt(), "mean {mean}");
        assert!((var / lambda - 1.0).abs() < 0.3, "var {var}");
        let outside = counts.iter().filter(|c| (*c - lambda).abs() > 3.0 * lambda.sqrt()).count();
        assert!(outside <= 4, "{outside} days beyond 3 sigma");
    }

    #[test]
    fn isolated_event_adds_magnitude_for_duration() {
        let spec = InflowSpec {
            base: BaseInflow::Sinusoid { mean: 0.0, amplitude: 0.0, period: 86400.0, noise_sigma: 0.0 },
            peaks: Some(PeakProcess { rate: 1e-5, magnitude: 30.0, duration: 900.0 }),
            horizon: 200_000,
            seed: 3,
        };
        let q = generate_inflow(&spec).unwrap();
        let mut rng = stream(3, Stream::Arrivals);
        let train = generate_peak_train(spec.peaks.as_ref().unwrap(), 200_000.0, &mut rng);
        let isolated = train
            .iter()
            .enumerate()
            .find(|(i, (s, e))| train.iter().enumerate().all(|(j, (s2, e2))| j == *i || *e2 < *s || *s2 > *e) && *e < 199_000.0)
            .map(|(_, iv)| *iv)
            .expect("an isolated event");
        let covered =
            q.iter().enumerate().filter(|(t, v)| **v > 0.0 && (*t as f64) >= isolated.0 - 1.0 && (*t as f64) <= isolated.1 + 1.0).count();
        assert_eq!(covered, 900);
        assert!(q.iter().all(|&v| v == 0.0 || v == 30.0 || v == 60.0 || v == 90.0));
    }

    #[test]
    fn sinusoid_profile() {
        let spec = InflowSpec {
            base: BaseInflow::Sinusoid { mean: 60.0, amplitude: 20.0, period: 86400.0, noise_sigma: 0.0 },
            peaks: None,
            horizon: 86400,
            seed: 0,
        };
        let q = generate_inflow(&spec).unwrap();
        assert_eq!(q[0], 60.0);
        assert!((q[21600] - 80.0).abs() < 1e-12);
    }

    #[test]
    fn surge_exceeds_sinusoid_by_magnitude() {
        let peaks = PeakProcess { rate: 0.0005, magnitude: 50.0, duration: 900.0 };
        let spec = InflowSpec {
            base: BaseInflow::Sinusoid { mean: 60.0, amplitude: 20.0, period: 86400.0, noise_sigma: 5.0 },
            peaks: Some(peaks),
            horizon: 86400,
            seed: 11,
        };
        let q = generate_inflow(&spec).unwrap();
        let mut rng = stream(11, Stream::Arrivals);
        let train = generate_peak_train(&peaks, 86400.0, &mut rng);
        let (s, e) = train.iter().copied().find(|(s, e)| train.iter().filter(|(s2, e2)| e2 >= s && s2 <= e).count() == 1).unwrap();
        let mid = ((s + e) / 2.0) as usize;
        let det = 60.0 + 20.0 * (2.0 * std::f64::consts::PI * mid as f64 / 86400.0).sin();
        assert!((q[mid] - det - 50.0).abs() <= 15.0);
    }

    #[test]
    fn ecdf_base_without_peaks_is_pure_sampling() {
        let e = build_ecdf(&[1.0, 2.0, 3.0]).unwrap();
        let spec = InflowSpec { base: BaseInflow::Ecdf(e.clone()), peaks: None, horizon: 1000, seed: 5 };
        let with_zero_rate = InflowSpec { peaks: Some(PeakProcess { rate: 0.0, magnitude: 30.0, duration: 900.0 }), ..spec.clone() };
        let a = generate_inflow(&spec).unwrap();
        assert_eq!(a, generate_inflow(&with_zero_rate).unwrap());
        assert!(a.iter().all(|v| e.samples().contains(v)));
    }

    #[test]
    fn deterministic_and_nonnegative() {
        let spec = InflowSpec {
            base: BaseInflow::Sinusoid { mean: 5.0, amplitude: 5.0, period: 600.0, noise_sigma: 5.0 },
            peaks: Some(PeakProcess { rate: 0.001, magnitude: 30.0, duration: 60.0 }),
            horizon: 5000,
            seed: 9,
        };
        let a = generate_inflow(&spec).unwrap();
        assert_eq!(a, generate_inflow(&spec).unwrap());
        assert!(a.iter().all(|&v| v >= 0.0));
    }
}
