use serde::{Deserialize, Serialize};

use super::{PeakLabel, RamanError, RamanSpectrum};
use crate::fit::{difference_noise, levenberg_marquardt, median, LmOptions};
use crate::Estimate;

/// Pseudo-Voigt fit of one phonon line on a linear baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakFit {
    pub label: PeakLabel,
    /// cm⁻¹.
    pub center: Estimate,
    /// FWHM of the Gaussian and Lorentzian components, cm⁻¹.
    pub gaussian_fwhm: Estimate,
    pub lorentzian_fwhm: Estimate,
    /// Peak height above the baseline, counts.
    pub amplitude: Estimate,
    /// Baseline `offset + slope (ν - pivot)`.
    pub baseline_offset: Estimate,
    pub baseline_slope: Estimate,
    pub pivot: f64,
    pub window: (f64, f64),
    pub residual_norm: f64,
    /// Samples replaced by the cosmic-ray filter inside the window.
    pub rejected: usize,
}

impl PeakFit {
    #[cfg(test)]
    pub(crate) fn synthetic(label: PeakLabel, center: f64, sigma: f64) -> Self {
        Self {
            label,
            center: Estimate::new(center, sigma),
            gaussian_fwhm: Estimate::exact(1.0),
            lorentzian_fwhm: Estimate::exact(1.0),
            amplitude: Estimate::exact(1.0),
            baseline_offset: Estimate::exact(0.0),
            baseline_slope: Estimate::exact(0.0),
            pivot: center,
            window: (center - 1.0, center + 1.0),
            residual_norm: 0.0,
            rejected: 0,
        }
    }

    /// Model value at `nu`.
    pub fn evaluate(&self, nu: f64) -> f64 {
        self.baseline_offset.value
            + self.baseline_slope.value * (nu - self.pivot)
            + self.amplitude.value
                * pseudo_voigt(nu, self.center.value, self.gaussian_fwhm.value, self.lorentzian_fwhm.value)
    }
}

/// Unit-height pseudo-Voigt with Thompson-Cox-Hastings width and mixing.
pub fn pseudo_voigt(x: f64, center: f64, fwhm_g: f64, fwhm_l: f64) -> f64 {
    let (g, l) = (fwhm_g.abs().max(1e-12), fwhm_l.abs().max(1e-12));
    let f = (g.powi(5)
        + 2.69269 * g.powi(4) * l
        + 2.42843 * g.powi(3) * l * l
        + 4.47163 * g * g * l.powi(3)
        + 0.07842 * g * l.powi(4)
        + l.powi(5))
    .powf(0.2);
    let q = l / f;
    let eta = 1.36603 * q - 0.47719 * q * q + 0.11116 * q * q * q;
    let u = 2.0 * (x - center) / f;
    eta / (1.0 + u * u) + (1.0 - eta) * (-std::f64::consts::LN_2 * u * u).exp()
}

/// Replace cosmic-ray spikes with the 7-point rolling median.
///
/// Candidates exceed the rolling median by more than 6σ (σ from the median
/// absolute deviation of all residuals). Only runs of one or two candidates
/// that also stand 6σ clear of both neighbours are replaced: a genuine line
/// spreads its excess over several samples. Returns the cleaned counts and
/// the indices replaced.
pub fn reject_cosmic_rays(counts: &[f64]) -> (Vec<f64>, Vec<usize>) {
    const HALF: usize = 3;
    const MAX_RUN: usize = 2;
    let n = counts.len();
    if n < 2 * HALF + 1 {
        return (counts.to_vec(), Vec::new());
    }
    let med: Vec<f64> = (0..n).map(|i| median(&counts[i.saturating_sub(HALF)..(i + HALF + 1).min(n)])).collect();
    let resid: Vec<f64> = counts.iter().zip(&med).map(|(y, m)| y - m).collect();
    let centre = median(&resid);
    let dev: Vec<f64> = resid.iter().map(|r| (r - centre).abs()).collect();
    let threshold = 6.0 * 1.4826 * median(&dev);

    let mut cleaned = counts.to_vec();
    let mut flagged = Vec::new();
    let mut i = 0;
    while i < n {
        if resid[i] <= threshold {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && resid[i] > threshold {
            i += 1;
        }
        let run = start..i;
        if run.len() > MAX_RUN {
            continue;
        }
        let low = run.clone().map(|k| counts[k]).fold(f64::INFINITY, f64::min);
        let left = start.checked_sub(1).map_or(f64::NEG_INFINITY, |k| counts[k]);
        let right = if i < n { counts[i] } else { f64::NEG_INFINITY };
        if low - left.max(right) > threshold {
            for k in run {
                cleaned[k] = med[k];
                flagged.push(k);
            }
        }
    }
    (cleaned, flagged)
}

/// Fit one line inside `window` (cm⁻¹) after cosmic-ray rejection.
pub fn fit_peak(spectrum: &RamanSpectrum, window: (f64, f64), label: PeakLabel) -> Result<PeakFit, RamanError> {
    let axis = &spectrum.wavenumber;
    let (lo, hi) = window;
    if !(lo < hi) || axis.is_empty() || lo < axis[0] || hi > axis[axis.len() - 1] {
        return Err(RamanError::InvalidWindow(window, "must lie within the wavenumber axis".into()));
    }
    let idx: Vec<usize> = (0..axis.len()).filter(|&k| axis[k] >= lo && axis[k] <= hi).collect();
    if idx.len() < 10 {
        return Err(RamanError::InvalidWindow(window, format!("only {} samples (need 10)", idx.len())));
    }
    let (cleaned, flagged) = reject_cosmic_rays(&spectrum.counts);
    let rejected = flagged.iter().filter(|k| idx.contains(k)).count();
    let x: Vec<f64> = idx.iter().map(|&k| axis[k]).collect();
    let y: Vec<f64> = idx.iter().map(|&k| cleaned[k]).collect();
    let n = x.len();
    let pivot = 0.5 * (x[0] + x[n - 1]);

    // Baseline through the mean of three samples at each end.
    let end = 3.min(n / 2);
    let (xl, yl) = (x[..end].iter().sum::<f64>() / end as f64, y[..end].iter().sum::<f64>() / end as f64);
    let (xr, yr) = (x[n - end..].iter().sum::<f64>() / end as f64, y[n - end..].iter().sum::<f64>() / end as f64);
    let slope0 = (yr - yl) / (xr - xl);
    let offset0 = yl + slope0 * (pivot - xl);
    let above: Vec<f64> = x.iter().zip(&y).map(|(&xi, &yi)| yi - offset0 - slope0 * (xi - pivot)).collect();

    let noise = difference_noise(&y);
    let smooth: Vec<f64> = (0..n)
        .map(|k| {
            let s = &above[k.saturating_sub(2)..(k + 3).min(n)];
            s.iter().sum::<f64>() / s.len() as f64
        })
        .collect();
    let (kmax, _) = smooth.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("window has samples");
    let height = above[kmax].max(smooth[kmax]);
    if !(smooth[kmax] > 3.0 * noise && height > 0.0) {
        return Err(RamanError::NoPeak(window));
    }

    // Half-maximum crossings on either side of the maximum.
    let half = 0.5 * height;
    let left = (0..kmax).rev().find(|&k| above[k] < half).map_or(x[0], |k| x[k]);
    let right = (kmax + 1..n).find(|&k| above[k] < half).map_or(x[n - 1], |k| x[k]);
    let spacing = (x[n - 1] - x[0]) / (n - 1) as f64;
    let fwhm0 = (right - left).max(2.0 * spacing);

    let model = |p: &[f64], nu: f64| p[4] + p[5] * (nu - pivot) + p[3] * pseudo_voigt(nu, p[0], p[1], p[2]);
    let p0 = [x[kmax], fwhm0 / 1.64, fwhm0 / 1.64, height, offset0, slope0];
    let fit = levenberg_marquardt(model, &x, &y, &p0, &LmOptions::default())?;
    let p = &fit.params;
    if !fit.converged || !p.iter().all(|v| v.is_finite()) || p[0] < lo || p[0] > hi {
        return Err(RamanError::FitFailed(fit.residual_norm));
    }
    if !(p[3] > 3.0 * noise) {
        return Err(RamanError::NoPeak(window));
    }
    let e = |k: usize| Estimate::new(p[k], fit.sigma[k]);
    Ok(PeakFit {
        label,
        center: e(0),
        gaussian_fwhm: Estimate::new(p[1].abs(), fit.sigma[1]),
        lorentzian_fwhm: Estimate::new(p[2].abs(), fit.sigma[2]),
        amplitude: e(3),
        baseline_offset: e(4),
        baseline_slope: e(5),
        pivot,
        window,
        residual_norm: fit.residual_norm,
        rejected,
    })
}
