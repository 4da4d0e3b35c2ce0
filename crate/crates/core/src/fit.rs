//! Levenberg-Marquardt least squares shared by the spectral and trace fitters.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LmError {
    #[error("need more points ({points}) than parameters ({params})")]
    TooFewPoints { points: usize, params: usize },
    #[error("model returned a non-finite value at the initial guess")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Stop when the relative decrease of the residual sum falls below this.
    pub ftol: f64,
    /// Stop when the relative step falls below this.
    pub xtol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iter: 500, ftol: 1e-15, xtol: 1e-13 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmFit {
    pub params: Vec<f64>,
    /// 1σ from `s² (JᵀJ)⁻¹` with `s² = SSR / (n - p)`.
    pub sigma: Vec<f64>,
    pub covariance: DMatrix<f64>,
    /// `sqrt(SSR)`.
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimize `Σ (y_i - model(p, x_i))²` from `p0`.
pub fn levenberg_marquardt(
    model: impl Fn(&[f64], f64) -> f64,
    x: &[f64],
    y: &[f64],
    p0: &[f64],
    options: &LmOptions,
) -> Result<LmFit, LmError> {
    let (n, m) = (x.len(), p0.len());
    if n <= m {
        return Err(LmError::TooFewPoints { points: n, params: m });
    }
    let residuals = |p: &[f64]| DVector::from_iterator(n, x.iter().zip(y).map(|(&xi, &yi)| yi - model(p, xi)));
    let mut p = p0.to_vec();
    let mut r = residuals(&p);
    if !r.iter().all(|v| v.is_finite()) {
        return Err(LmError::NonFinite);
    }
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < options.max_iter {
        iterations += 1;
        let j = jacobian(&model, x, &p);
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let mut improved = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for k in 0..m {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&g)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rt = residuals(&trial);
            let ct = rt.norm_squared();
            if ct.is_finite() && ct <= cost {
                let rel_step = step.iter().zip(&p).map(|(s, v)| (s / v.abs().max(1e-300)).abs()).fold(0.0, f64::max);
                let rel_drop = (cost - ct) / cost.max(1e-300);
                p = trial;
                r = rt;
                cost = ct;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if rel_drop <= options.ftol || rel_step <= options.xtol || cost == 0.0 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        // No downhill step even at huge damping: a (local) minimum.
        if !improved {
            converged = true;
        }
        if converged {
            break;
        }
    }

    let j = jacobian(&model, x, &p);
    let jtj = j.transpose() * &j;
    let s2 = cost / (n - m) as f64;
    let covariance = jtj
        .clone()
        .try_inverse()
        .or_else(|| jtj.pseudo_inverse(1e-300).ok())
        .map(|inv| inv * s2)
        .unwrap_or_else(|| DMatrix::from_element(m, m, f64::INFINITY));
    let sigma = (0..m).map(|k| covariance[(k, k)].max(0.0).sqrt()).collect();
    Ok(LmFit { params: p, sigma, covariance, residual_norm: cost.sqrt(), iterations, converged })
}

/// Central-difference Jacobian of the model (not the residual).
fn jacobian(model: &impl Fn(&[f64], f64) -> f64, x: &[f64], p: &[f64]) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(x.len(), p.len());
    let mut q = p.to_vec();
    for k in 0..p.len() {
        let h = 1e-6 * p[k].abs().max(1e-8);
        q[k] = p[k] + h;
        let up: Vec<f64> = x.iter().map(|&xi| model(&q, xi)).collect();
        q[k] = p[k] - h;
        for (i, &xi) in x.iter().enumerate() {
            j[(i, k)] = (up[i] - model(&q, xi)) / (2.0 * h);
        }
        q[k] = p[k];
    }
    j
}

/// Median of a slice (NaN-free input).
pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Noise σ from the median absolute second difference, insensitive to
/// smooth signal and isolated outliers.
pub(crate) fn difference_noise(y: &[f64]) -> f64 {
    if y.len() < 4 {
        return 0.0;
    }
    let d: Vec<f64> = y.windows(3).map(|w| (w[2] - 2.0 * w[1] + w[0]).abs()).collect();
    1.4826 * median(&d) / 6f64.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_exponential() {
        let x: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let f = |p: &[f64], t: f64| p[0] * (-t / p[1]).exp() + p[2];
        let y: Vec<f64> = x.iter().map(|&t| f(&[2.0, 0.7, 0.3], t)).collect();
        let fit = levenberg_marquardt(f, &x, &y, &[1.0, 1.5, 0.0], &LmOptions::default()).unwrap();
        assert!(fit.converged);
        for (a, b) in fit.params.iter().zip([2.0, 0.7, 0.3]) {
            assert!((a - b).abs() < 1e-9, "{:?}", fit.params);
        }
        assert!(fit.residual_norm < 1e-9);
    }

    #[test]
    fn linear_model_covariance_matches_textbook() {
        // y = a + b x with known residuals: σ_b² = s² / Σ(x - x̄)².
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let noise = [0.1, -0.2, 0.05, 0.0, 0.15, -0.1, -0.05, 0.2, -0.15, 0.0];
        let y: Vec<f64> = x.iter().zip(noise).map(|(x, e)| 1.0 + 2.0 * x + e).collect();
        let fit = levenberg_marquardt(|p, x| p[0] + p[1] * x, &x, &y, &[0.0, 0.0], &LmOptions::default()).unwrap();
        let xm = 4.5;
        let sxx: f64 = x.iter().map(|v| (v - xm) * (v - xm)).sum();
        let s2 = fit.residual_norm.powi(2) / 8.0;
        assert!((fit.sigma[1] - (s2 / sxx).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn rejects_underdetermined() {
        assert!(levenberg_marquardt(|p, _| p[0], &[1.0], &[1.0], &[0.0], &LmOptions::default()).is_err());
    }

    #[test]
    fn noise_estimate() {
        assert_eq!(difference_noise(&[1.0; 20]), 0.0);
        assert_eq!(median(&[3.0, 1.0, 2.0, 10.0]), 2.5);
    }
}
