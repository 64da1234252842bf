//! Small least-squares fits solved through the normal equations.

use super::DiagnosticsError;

/// Relative pivot below which the scaled normal matrix is treated as singular.
const RANK_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticFit {
    /// `[θ0, θ1, θ2]` for the static model, followed by `[α0, α1, α2]` for the drift model.
    pub theta: Vec<f64>,
    pub ssr: f64,
    pub n_params: usize,
    pub m: usize,
}

impl QuadraticFit {
    pub fn residual_variance(&self) -> f64 {
        self.ssr / (self.m - self.n_params) as f64
    }
}

/// OLS on an explicit design. Columns are scaled to unit RMS before the
/// normal equations are solved by Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
pub fn ols(rows: &[Vec<f64>], y: &[f64]) -> Result<(Vec<f64>, f64), DiagnosticsError> {
    let m = rows.len();
    let p = rows.first().map_or(0, |r| r.len());
    if m < p || p == 0 {
        return Err(DiagnosticsError::RankDeficient);
    }
    let mut scale = vec![0.0; p];
    for r in rows {
        for (s, x) in scale.iter_mut().zip(r) {
            *s += x * x;
        }
    }
    for s in scale.iter_mut() {
        *s = (*s / m as f64).sqrt();
        if *s == 0.0 || !s.is_finite() {
            return Err(DiagnosticsError::RankDeficient);
        }
    }
    let mut a = vec![vec![0.0; p + 1]; p];
    for (r, &yi) in rows.iter().zip(y) {
        for i in 0..p {
            let xi = r[i] / scale[i];
            for j in i..p {
                a[i][j] += xi * r[j] / scale[j];
            }
            a[i][p] += xi * yi;
        }
    }
    for i in 0..p {
        for j in 0..i {
            a[i][j] = a[j][i];
        }
    }
    let diag_max = (0..p).map(|i| a[i][i]).fold(0.0, f64::max);
    for col in 0..p {
        let piv = (col..p).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        if a[piv][col].abs() <= RANK_TOL * diag_max {
            return Err(DiagnosticsError::RankDeficient);
        }
        a.swap(col, piv);
        for i in col + 1..p {
            let f = a[i][col] / a[col][col];
            for j in col..=p {
                a[i][j] -= f * a[col][j];
            }
        }
    }
    let mut beta = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|j| a[i][j] * beta[j]).sum();
        beta[i] = (a[i][p] - s) / a[i][i];
    }
    for (b, s) in beta.iter_mut().zip(&scale) {
        *b /= s;
    }
    let ssr = rows
        .iter()
        .zip(y)
        .map(|(r, yi)| {
            let fit: f64 = r.iter().zip(&beta).map(|(x, b)| x * b).sum();
            (yi - fit).powi(2)
        })
        .sum();
    Ok((beta, ssr))
}

/// H = θ0 + θ1 q + θ2 q².
pub fn fit_static_quadratic(points: &[(f64, f64)]) -> Result<QuadraticFit, DiagnosticsError> {
    if points.len() < 4 {
        return Err(DiagnosticsError::TooFewSamples { needed: 4, got: points.len() });
    }
    let rows: Vec<Vec<f64>> = points.iter().map(|&(q, _)| vec![1.0, q, q * q]).collect();
    let y: Vec<f64> = points.iter().map(|&(_, h)| h).collect();
    let (theta, ssr) = ols(&rows, &y)?;
    Ok(QuadraticFit { theta, ssr, n_params: 3, m: points.len() })
}

/// H = (θ0 + α0 t) + (θ1 + α1 t) q + (θ2 + α2 t) q².
pub fn fit_drift_quadratic(points: &[(f64, f64, f64)]) -> Result<QuadraticFit, DiagnosticsError> {
    if points.len() < 7 {
        return Err(DiagnosticsError::TooFewSamples { needed: 7, got: points.len() });
    }
    let rows: Vec<Vec<f64>> = points.iter().map(|&(t, q, _)| vec![1.0, q, q * q, t, t * q, t * q * q]).collect();
    let y: Vec<f64> = points.iter().map(|&(_, _, h)| h).collect();
    let (theta, ssr) = ols(&rows, &y)?;
    Ok(QuadraticFit { theta, ssr, n_params: 6, m: points.len() })
}

/// H = h_static + k q², returning `(h_static, k, ssr)`.
pub fn fit_system_curve(points: &[(f64, f64)]) -> Result<(f64, f64, f64), DiagnosticsError> {
    if points.len() < 3 {
        return Err(DiagnosticsError::TooFewSamples { needed: 3, got: points.len() });
    }
    let rows: Vec<Vec<f64>> = points.iter().map(|&(q, _)| vec![1.0, q * q]).collect();
    let y: Vec<f64> = points.iter().map(|&(_, h)| h).collect();
    let (b, ssr) = ols(&rows, &y)?;
    Ok((b[0], b[1], ssr))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(q: f64) -> f64 {
        15.0 - 5e-4 * q - 9e-4 * q * q
    }

    #[test]
    fn exact_points_are_interpolated() {
        let pts: Vec<(f64, f64)> = [10.0, 40.0, 75.0, 120.0].iter().map(|&q| (q, curve(q))).collect();
        let fit = fit_static_quadratic(&pts).unwrap();
        assert!((fit.theta[0] - 15.0).abs() < 1e-9);
        assert!((fit.theta[1] + 5e-4).abs() < 1e-9);
        assert!((fit.theta[2] + 9e-4).abs() < 1e-9);
        assert!(fit.ssr < 1e-18, "{}", fit.ssr);
    }

    #[test]
    fn constant_flow_is_rank_deficient() {
        let pts = vec![(50.0, 3.0); 10];
        assert_eq!(fit_static_quadratic(&pts), Err(DiagnosticsError::RankDeficient));
        let pts3: Vec<(f64, f64, f64)> = (0..10).map(|t| (t as f64, 50.0, 3.0)).collect();
        assert_eq!(fit_drift_quadratic(&pts3), Err(DiagnosticsError::RankDeficient));
    }

    #[test]
    fn exact_drift_data_is_interpolated() {
        let pts: Vec<(f64, f64, f64)> = (0..30)
            .map(|i| {
                let t = i as f64;
                let q = 40.0 + 3.0 * t + 5.0 * (t * 0.7).sin();
                let h = (15.0 - 0.1 * t) + (-5e-4 - 1e-6 * t) * q + (-9e-4 - 5e-6 * t) * q * q;
                (t, q, h)
            })
            .collect();
        let fit = fit_drift_quadratic(&pts).unwrap();
        assert!(fit.ssr < 1e-18, "{}", fit.ssr);
        assert!((fit.theta[3] + 0.1).abs() < 1e-7);
    }

    #[test]
    fn system_curve_recovery() {
        let pts: Vec<(f64, f64)> = (1..50).map(|i| (i as f64 * 5.0, 2.0 + 3e-4 * (i as f64 * 5.0).powi(2))).collect();
        let (hs, k, ssr) = fit_system_curve(&pts).unwrap();
        assert!((hs - 2.0).abs() < 1e-10 && (k - 3e-4).abs() < 1e-14 && ssr < 1e-18);
    }
}
