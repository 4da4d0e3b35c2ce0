//! Independent analytic oracles shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

pub mod photon;
pub mod spin;
pub mod taper;

use std::f64::consts::PI;

/// Bisection on a continuous function with a sign change on `[lo, hi]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Fundamental even mode of a symmetric slab of thickness `d`.
///
/// `tm = false` solves `u tan u = w`, `tm = true` solves
/// `u tan u = (n1/n0)^2 w`, with `u^2 + w^2 = V^2`.
pub fn slab_fundamental(d: f64, n1: f64, n0: f64, wavelength: f64, tm: bool) -> f64 {
    let k0 = 2.0 * PI / wavelength;
    let v = 0.5 * k0 * d * (n1 * n1 - n0 * n0).sqrt();
    let ratio = if tm { (n1 / n0).powi(2) } else { 1.0 };
    let hi = v.min(PI / 2.0) * (1.0 - 1e-15);
    let u = bisect(|u| u * u.tan() - ratio * (v * v - u * u).max(0.0).sqrt(), 1e-15, hi);
    let kappa = 2.0 * u / d;
    (n1 * n1 - (kappa / k0).powi(2)).sqrt()
}

/// Bessel J_n by its power series (adequate for |x| < 15).
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..80 {
        term *= -half * half / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn bessel_i(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..200 {
        term *= half * half / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// Modified Bessel K_0 and K_1 (Abramowitz & Stegun 9.8.5-9.8.8).
pub fn bessel_k01(x: f64) -> (f64, f64) {
    if x <= 2.0 {
        let t = x * x / 4.0;
        let k0 = -(x / 2.0).ln() * bessel_i(0, x)
            + (-0.57721566
                + t * (0.42278420
                    + t * (0.23069756 + t * (0.03488590 + t * (0.00262698 + t * (0.00010750 + t * 0.0000074))))));
        let k1 = (x * (x / 2.0).ln() * bessel_i(1, x)
            + (1.0
                + t * (0.15443144
                    + t * (-0.67278579 + t * (-0.18156897 + t * (-0.01919402 + t * (-0.00110404 - t * 0.00004686)))))))
            / x;
        (k0, k1)
    } else {
        let t = 2.0 / x;
        let pre = (-x).exp() / x.sqrt();
        let k0 = pre
            * (1.25331414
                + t * (-0.07832358
                    + t * (0.02189568 + t * (-0.01062446 + t * (0.00587872 + t * (-0.00251540 + t * 0.00053208))))));
        let k1 = pre
            * (1.25331414
                + t * (0.23498619
                    + t * (-0.03655620 + t * (0.01504268 + t * (-0.00780353 + t * (0.00325614 - t * 0.00068245))))));
        (k0, k1)
    }
}

/// LP01 effective index of a step-index fibre from the scalar dispersion
/// relation `u J1(u)/J0(u) = w K1(w)/K0(w)`.
pub fn lp01(radius: f64, n_core: f64, n_clad: f64, wavelength: f64) -> f64 {
    let k0 = 2.0 * PI / wavelength;
    let v = k0 * radius * (n_core * n_core - n_clad * n_clad).sqrt();
    // first zero of J0 bounds the fundamental branch
    let hi = v.min(2.404825557695773) * (1.0 - 1e-12);
    let u = bisect(
        |u| {
            let w = (v * v - u * u).max(1e-300).sqrt();
            let (k0w, k1w) = bessel_k01(w);
            u * bessel_j(1, u) / bessel_j(0, u) - w * k1w / k0w
        },
        1e-9,
        hi,
    );
    (n_core * n_core - (u / (k0 * radius)).powi(2)).sqrt()
}

/// Eigenvalues (ascending) of a real symmetric matrix by cyclic Jacobi.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let scale: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum::<f64>().max(1e-300);
        if off <= 1e-32 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    d.sort_by(f64::total_cmp);
    d
}

/// Eigenvalues of a Hermitian matrix `re + i im` via the real embedding
/// `[[re, -im], [im, re]]`, whose spectrum is each eigenvalue twice.
pub fn hermitian_eigenvalues(re: &[Vec<f64>], im: &[Vec<f64>]) -> Vec<f64> {
    let n = re.len();
    let mut a = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = re[i][j];
            a[i + n][j + n] = re[i][j];
            a[i][j + n] = -im[i][j];
            a[i + n][j] = im[i][j];
        }
    }
    jacobi_eigenvalues(a).into_iter().step_by(2).collect()
}
