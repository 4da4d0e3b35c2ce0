use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::PhotonError;
use crate::fit::{difference_noise, levenberg_marquardt, median, LmFit, LmOptions};
use crate::Estimate;

/// Repetition rates at or above this use the hyperbolic saturation law.
pub const SATURATION_MODEL_THRESHOLD_HZ: f64 = 20e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelId {
    /// `I_s P / (P + P_s) + b P`
    SaturationHyperbolic,
    /// `I_s (1 - exp(-P / P_s)) + b P`
    SaturationExponential,
    /// `C + A (Γ/2)² / ((f - f0)² + (Γ/2)²)`
    Lorentzian,
    /// `A cos(2π f t + φ) exp(-t / τ) + C`
    DampedCosine,
    /// `A exp(-t / T2) + C`
    Exponential,
    /// `A exp(-(t / T2)^n) + C`
    StretchedExponential,
}

impl std::fmt::Display for ModelId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = serde_json::to_value(self).expect("unit variant");
        f.write_str(s.as_str().expect("string"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParameter {
    pub name: String,
    pub value: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: ModelId,
    pub parameters: Vec<FitParameter>,
    pub residual_norm: f64,
    pub converged: bool,
    /// Non-fatal conditions worth reading, e.g. `decay_time_exceeds_trace`.
    pub flags: Vec<String>,
    /// Abscissa the decay of a damped model is measured from.
    #[serde(default)]
    pub origin: f64,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<Estimate> {
        self.parameters.iter().find(|p| p.name == name).map(|p| Estimate::new(p.value, p.sigma))
    }

    fn value(&self, name: &str) -> f64 {
        self.get(name).map_or(0.0, |e| e.value)
    }

    /// Fitted model at `x`.
    pub fn evaluate(&self, x: f64) -> f64 {
        let v = |name| self.value(name);
        match self.model {
            ModelId::SaturationHyperbolic => v("i_s") * SaturationModel::Hyperbolic.shape(x, v("p_s")) + v("b") * x,
            ModelId::SaturationExponential => v("i_s") * SaturationModel::Exponential.shape(x, v("p_s")) + v("b") * x,
            ModelId::Lorentzian => {
                let hw2 = 0.25 * v("fwhm").powi(2);
                v("offset") + v("contrast") * hw2 / ((x - v("center")).powi(2) + hw2)
            }
            ModelId::DampedCosine => {
                let phase = 2.0 * PI * v("f_rabi") * x + v("phase");
                v("amplitude") * phase.cos() * (-v("decay_rate") * (x - self.origin)).exp() + v("offset")
            }
            ModelId::Exponential => v("amplitude") * (-x / v("t2")).exp() + v("offset"),
            ModelId::StretchedExponential => {
                v("amplitude") * (-(x / v("t2")).abs().powf(v("stretch"))).exp() + v("offset")
            }
        }
    }

    fn new(model: ModelId, named: Vec<(&str, f64, f64)>, fit: &LmFit) -> Self {
        let parameters: Vec<FitParameter> = named
            .into_iter()
            .map(|(name, value, sigma)| FitParameter {
                name: name.into(),
                value,
                sigma: if sigma.is_nan() { f64::INFINITY } else { sigma.abs() },
            })
            .collect();
        let finite = parameters.iter().all(|p| p.value.is_finite());
        Self {
            model,
            parameters,
            residual_norm: fit.residual_norm,
            converged: fit.converged && finite,
            flags: Vec::new(),
            origin: 0.0,
        }
    }
}

fn check_points(x: &[f64], y: &[f64], need: usize) -> Result<(), PhotonError> {
    if x.len() != y.len() {
        return Err(PhotonError::InvalidParameter(format!("{} abscissae vs {} values", x.len(), y.len())));
    }
    if x.len() < need {
        return Err(PhotonError::TooFewPoints { got: x.len(), need });
    }
    if !x.iter().chain(y).all(|v| v.is_finite()) {
        return Err(PhotonError::InvalidParameter("non-finite sample".into()));
    }
    Ok(())
}

/// Linear least squares `y ≈ Σ c_k basis_k(x)`; returns coefficients and SSR.
fn linear_fit(x: &[f64], y: &[f64], basis: &[&dyn Fn(f64) -> f64]) -> Option<(Vec<f64>, f64)> {
    let a = DMatrix::from_fn(x.len(), basis.len(), |i, k| basis[k](x[i]));
    let b = DVector::from_column_slice(y);
    let c = a.clone().svd(true, true).solve(&b, 1e-12).ok()?;
    let ssr = (a * &c - b).norm_squared();
    ssr.is_finite().then(|| (c.iter().copied().collect(), ssr))
}

fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(move |k| lo * (step * k as f64).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SaturationModel {
    Hyperbolic,
    Exponential,
}

impl SaturationModel {
    /// Hyperbolic for cw (`None`) and for repetition rates at or above
    /// [`SATURATION_MODEL_THRESHOLD_HZ`], exponential below.
    pub fn for_rep_rate(rep_rate_hz: Option<f64>) -> Self {
        match rep_rate_hz {
            Some(r) if r < SATURATION_MODEL_THRESHOLD_HZ => Self::Exponential,
            _ => Self::Hyperbolic,
        }
    }

    /// Shape with unit saturation intensity.
    pub fn shape(self, power: f64, p_s: f64) -> f64 {
        match self {
            Self::Hyperbolic => power / (power + p_s),
            Self::Exponential => -(-power / p_s).exp_m1(),
        }
    }

    pub fn id(self) -> ModelId {
        match self {
            Self::Hyperbolic => ModelId::SaturationHyperbolic,
            Self::Exponential => ModelId::SaturationExponential,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SaturationOptions {
    /// Overrides the repetition-rate rule.
    pub model: Option<SaturationModel>,
    /// Fit a linear background `b P` alongside the emitter term.
    pub linear_background: bool,
}

/// Fit `I(P)`; returns `i_s`, `p_s` and `b` (zero when no background term).
pub fn fit_saturation(
    power: &[f64],
    intensity: &[f64],
    rep_rate_hz: Option<f64>,
    options: &SaturationOptions,
) -> Result<FitResult, PhotonError> {
    check_points(power, intensity, 5)?;
    let model = options.model.unwrap_or_else(|| SaturationModel::for_rep_rate(rep_rate_hz));
    let bg = options.linear_background;
    let p_max = power.iter().copied().fold(0.0, f64::max);
    let p_min = power.iter().copied().filter(|&p| p > 0.0).fold(f64::INFINITY, f64::min);
    if !(p_max > 0.0) || power.iter().any(|&p| p < 0.0) {
        return Err(PhotonError::InvalidParameter("powers must be non-negative with some positive".into()));
    }

    // Variable projection over P_s: I_s (and b) are linear for fixed P_s.
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    for p_s in log_grid(p_min / 10.0, p_max * 20.0, 120) {
        let g = move |p: f64| model.shape(p, p_s);
        let lin = |p: f64| p;
        let basis: Vec<&dyn Fn(f64) -> f64> = if bg { vec![&g, &lin] } else { vec![&g] };
        if let Some((c, ssr)) = linear_fit(power, intensity, &basis) {
            if best.as_ref().is_none_or(|b| ssr < b.2) {
                best = Some((p_s, c, ssr));
            }
        }
    }
    let (p_s0, c0, _) = best.ok_or_else(|| PhotonError::Unidentifiable("no admissible starting point".into()))?;
    let mut p0 = vec![c0[0], p_s0];
    if bg {
        p0.push(c0[1]);
    }
    let f = |p: &[f64], x: f64| p[0] * model.shape(x, p[1]) + if bg { p[2] * x } else { 0.0 };
    let fit = levenberg_marquardt(f, power, intensity, &p0, &LmOptions::default())?;
    let p = &fit.params;
    let (i_s, p_s) = (p[0], p[1]);
    // Curvature test: the saturating term must beat a straight line through
    // the origin by more than noise (F statistic).
    let ssr_line = linear_fit(power, intensity, &[&|p: f64| p]).map_or(f64::INFINITY, |(_, s)| s);
    let ssr = fit.residual_norm.powi(2);
    let dof = (power.len() - p.len()) as f64;
    let extra = (p.len() - 1) as f64;
    let scale: f64 = intensity.iter().map(|v| v * v).sum();
    let curved = ssr_line > 1e-20 * scale && (ssr_line - ssr) / extra > 10.0 * ssr / dof;
    if !curved || !(p_s > 0.0) || p_s > 5.0 * p_max || !(i_s > 3.0 * fit.sigma[0]) {
        return Err(PhotonError::Unidentifiable(format!(
            "no saturation curvature (P_s = {p_s:.3e}, I_s = {i_s:.3e} ± {:.1e})",
            fit.sigma[0]
        )));
    }
    let b = if bg { (p[2], fit.sigma[2]) } else { (0.0, 0.0) };
    let mut out =
        FitResult::new(model.id(), vec![("i_s", i_s, fit.sigma[0]), ("p_s", p_s, fit.sigma[1]), ("b", b.0, b.1)], &fit);
    if p_s > p_max || p_s < p_min {
        out.flags.push("p_s_outside_measured_powers".into());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrDefinition {
    /// `signal / background`.
    #[default]
    Ratio,
    /// `signal / sqrt(signal + background)`.
    ShotNoise,
}

/// Signal-to-noise of count rates; zero signal gives zero.
pub fn snr(signal_rate: f64, background_rate: f64, definition: SnrDefinition) -> f64 {
    if signal_rate == 0.0 {
        return 0.0;
    }
    match definition {
        SnrDefinition::Ratio => signal_rate / background_rate,
        SnrDefinition::ShotNoise => signal_rate / (signal_rate + background_rate).sqrt(),
    }
}

/// Single Lorentzian on a constant offset; `contrast` is signed (negative for
/// a dip).
pub fn fit_odmr(frequency: &[f64], signal: &[f64]) -> Result<FitResult, PhotonError> {
    check_points(frequency, signal, 10)?;
    let mut order: Vec<usize> = (0..frequency.len()).collect();
    order.sort_by(|&a, &b| frequency[a].total_cmp(&frequency[b]));
    let x: Vec<f64> = order.iter().map(|&k| frequency[k]).collect();
    let y: Vec<f64> = order.iter().map(|&k| signal[k]).collect();
    let n = x.len();

    let noise = difference_noise(&y);
    let offset0 = median(&y);
    let dev: Vec<f64> = y.iter().map(|v| v - offset0).collect();
    let smooth: Vec<f64> = (0..n)
        .map(|k| {
            let s = &dev[k.saturating_sub(1)..(k + 2).min(n)];
            s.iter().sum::<f64>() / s.len() as f64
        })
        .collect();
    let (k0, _) = smooth.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).expect("points");
    let amp0 = smooth[k0];
    if !(amp0.abs() > 3.0 * noise) {
        return Err(PhotonError::NoPeak);
    }
    let half = 0.5 * amp0.abs();
    let left = (0..k0).rev().find(|&k| dev[k] * amp0.signum() < half).map_or(x[0], |k| x[k]);
    let right = (k0 + 1..n).find(|&k| dev[k] * amp0.signum() < half).map_or(x[n - 1], |k| x[k]);
    let spacing = (x[n - 1] - x[0]) / (n - 1) as f64;
    let width0 = (right - left).max(2.0 * spacing);

    let model = |p: &[f64], f: f64| {
        let hw = 0.5 * p[1];
        p[3] + p[2] * hw * hw / ((f - p[0]).powi(2) + hw * hw)
    };
    let fit = levenberg_marquardt(model, &x, &y, &[x[k0], width0, amp0, offset0], &LmOptions::default())?;
    let p = &fit.params;
    if !(p[2].abs() > 3.0 * noise) {
        return Err(PhotonError::NoPeak);
    }
    if p[0] < x[0] || p[0] > x[n - 1] {
        return Err(PhotonError::Unidentifiable(format!("centre {:.4e} outside the sweep", p[0])));
    }
    Ok(FitResult::new(
        ModelId::Lorentzian,
        vec![
            ("center", p[0], fit.sigma[0]),
            ("fwhm", p[1].abs(), fit.sigma[1]),
            ("contrast", p[2], fit.sigma[2]),
            ("offset", p[3], fit.sigma[3]),
        ],
        &fit,
    ))
}

/// Sum `Σ y_j exp(-2πi f t_j)`.
fn dft(t: &[f64], y: &[f64], f: f64) -> Complex64 {
    t.iter().zip(y).map(|(&tj, &yj)| Complex64::from_polar(yj, -2.0 * PI * f * tj)).sum()
}

/// Damped Rabi oscillation. The decay is fitted as a rate, so an undamped
/// trace stays well posed; `tau` is then a lower bound and flagged.
pub fn fit_rabi(time: &[f64], signal: &[f64]) -> Result<FitResult, PhotonError> {
    check_points(time, signal, 12)?;
    let n = time.len();
    let (t0, t1) = time.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)));
    let span = t1 - t0;
    if !(span > 0.0) {
        return Err(PhotonError::InvalidParameter("zero time span".into()));
    }
    let mean = signal.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = signal.iter().map(|v| v - mean).collect();

    // Oversampled periodogram up to the mean Nyquist frequency.
    let df = 0.25 / span;
    let f_nyq = 0.5 * (n - 1) as f64 / span;
    let freqs: Vec<f64> = (1..).map(|k| k as f64 * df).take_while(|&f| f <= f_nyq).collect();
    let power: Vec<f64> = freqs.iter().map(|&f| dft(time, &centred, f).norm_sqr()).collect();
    let (kmax, &pmax) = power.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("frequencies");
    let floor = median(&power);
    if !(pmax > 25.0 * floor) || freqs[kmax] < 1.0 / span {
        return Err(PhotonError::Unidentifiable("no oscillation above the noise".into()));
    }

    // Refine f with (A, φ, C) linear, assuming decay over the trace.
    let gamma0 = 1.0 / span;
    let mut best = (f64::INFINITY, 0.0, vec![0.0; 3]);
    for k in 0..=80 {
        let f = freqs[kmax] + (k as f64 - 40.0) / 40.0 * 2.0 * df;
        let c = move |t: f64| (2.0 * PI * f * t).cos() * (-gamma0 * (t - t0)).exp();
        let s = move |t: f64| (2.0 * PI * f * t).sin() * (-gamma0 * (t - t0)).exp();
        let one = |_: f64| 1.0;
        if let Some((coef, ssr)) = linear_fit(time, signal, &[&c, &s, &one]) {
            if ssr < best.0 {
                best = (ssr, f, coef);
            }
        }
    }
    let (_, f0, coef) = best;
    // a cos + b sin = A cos(x + φ) with A = |(a, b)|, φ = atan2(-b, a).
    let amp0 = coef[0].hypot(coef[1]);
    let phi0 = (-coef[1]).atan2(coef[0]);

    // Decay measured from the first sample keeps A and γ decoupled.
    let model = move |p: &[f64], t: f64| p[0] * (2.0 * PI * p[1] * t + p[2]).cos() * (-p[3] * (t - t0)).exp() + p[4];
    let fit = levenberg_marquardt(model, time, signal, &[amp0, f0, phi0, gamma0, coef[2]], &LmOptions::default())?;
    let p = &fit.params;
    let s = &fit.sigma;
    let f_rabi = p[1].abs();
    if f_rabi * span < 3.0 {
        return Err(PhotonError::Unidentifiable(format!("only {:.2} periods sampled (need 3)", f_rabi * span)));
    }
    let (mut amp, mut phase) = (p[0], p[2] * p[1].signum());
    if amp < 0.0 {
        amp = -amp;
        phase += PI;
    }
    phase = (phase + PI).rem_euclid(2.0 * PI) - PI;
    let gamma = p[3];
    let resolved = gamma > s[3];
    let (tau, tau_sigma) = if resolved {
        (1.0 / gamma, s[3] / (gamma * gamma))
    } else {
        let bound = 1.0 / (gamma.max(0.0) + s[3]);
        (bound, bound)
    };
    let mut out = FitResult::new(
        ModelId::DampedCosine,
        vec![
            ("f_rabi", f_rabi, s[1]),
            ("tau", tau, tau_sigma),
            ("decay_rate", gamma, s[3]),
            ("amplitude", amp, s[0]),
            ("phase", phase, s[2]),
            ("offset", p[4], s[4]),
        ],
        &fit,
    );
    out.origin = t0;
    if !resolved {
        out.flags.push("decay_unresolved".into());
    }
    if tau > span {
        out.flags.push("decay_time_exceeds_trace".into());
    }
    Ok(out)
}

/// Hahn-echo decay `A exp(-(τ/T2)^n) + C`; `n = 1` unless `stretched`.
pub fn fit_hahn_echo(delay: &[f64], signal: &[f64], stretched: bool) -> Result<FitResult, PhotonError> {
    check_points(delay, signal, if stretched { 6 } else { 5 })?;
    let (d0, d1) = delay.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)));
    let span = d1 - d0.min(0.0);
    if !(span > 0.0) || d0 < 0.0 {
        return Err(PhotonError::InvalidParameter("delays must be non-negative and distinct".into()));
    }
    let mut order: Vec<usize> = (0..delay.len()).collect();
    order.sort_by(|&a, &b| delay[a].total_cmp(&delay[b]));
    let sorted: Vec<f64> = order.iter().map(|&k| signal[k]).collect();
    let scale = sorted.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let noise = difference_noise(&sorted).max(1e-12 * scale);

    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    for t2 in log_grid(span / 100.0, span * 20.0, 150) {
        let e = move |t: f64| (-t / t2).exp();
        let one = |_: f64| 1.0;
        if let Some((c, ssr)) = linear_fit(delay, signal, &[&e, &one]) {
            if best.as_ref().is_none_or(|b| ssr < b.0) {
                best = Some((ssr, t2, c));
            }
        }
    }
    let (_, t2_0, c0) = best.ok_or_else(|| PhotonError::Unidentifiable("no admissible starting point".into()))?;

    let fit = if stretched {
        let model = |p: &[f64], t: f64| p[0] * (-(t / p[1]).abs().powf(p[2])).exp() + p[3];
        levenberg_marquardt(model, delay, signal, &[c0[0], t2_0, 1.0, c0[1]], &LmOptions::default())?
    } else {
        let model = |p: &[f64], t: f64| p[0] * (-t / p[1]).exp() + p[2];
        levenberg_marquardt(model, delay, signal, &[c0[0], t2_0, c0[1]], &LmOptions::default())?
    };
    let p = &fit.params;
    let s = &fit.sigma;
    let (amp, t2) = (p[0], p[1].abs());
    if !(amp.abs() > 3.0 * s[0]) || !(amp.abs() > 3.0 * noise) || t2 > 5.0 * span {
        return Err(PhotonError::Unidentifiable(format!(
            "no decay resolved (A = {amp:.3e} ± {:.1e}, T2 = {t2:.3e})",
            s[0]
        )));
    }
    let mut named = vec![("t2", t2, s[1]), ("amplitude", amp, s[0])];
    let model = if stretched {
        named.push(("stretch", p[2], s[2]));
        named.push(("offset", p[3], s[3]));
        ModelId::StretchedExponential
    } else {
        named.push(("offset", p[2], s[2]));
        ModelId::Exponential
    };
    let mut out = FitResult::new(model, named, &fit);
    if span < t2 {
        out.flags.push("delays_shorter_than_t2".into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn sample(x: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
        x.iter().map(|&v| f(v)).collect()
    }

    #[test]
    fn model_rule_is_inclusive_at_threshold() {
        assert_eq!(SaturationModel::for_rep_rate(Some(20e6)), SaturationModel::Hyperbolic);
        assert_eq!(SaturationModel::for_rep_rate(Some(19.999e6)), SaturationModel::Exponential);
        assert_eq!(SaturationModel::for_rep_rate(None), SaturationModel::Hyperbolic);
        assert_eq!(ModelId::DampedCosine.to_string(), "damped_cosine");
    }

    #[test]
    fn exact_saturation_curves() {
        let p: Vec<f64> = (1..=12).map(|k| 0.25 * k as f64).collect();
        for (model, rep) in [(SaturationModel::Hyperbolic, Some(40e6)), (SaturationModel::Exponential, Some(5e6))] {
            let y = sample(&p, |x| 181.0 * model.shape(x, 0.8) + 12.0 * x);
            let opts = SaturationOptions { linear_background: true, ..Default::default() };
            let fit = fit_saturation(&p, &y, rep, &opts).unwrap();
            assert_eq!(fit.model, model.id());
            assert!((fit.get("i_s").unwrap().value - 181.0).abs() < 1e-6, "{fit:?}");
            assert!((fit.get("p_s").unwrap().value - 0.8).abs() < 1e-8);
            assert!((fit.get("b").unwrap().value - 12.0).abs() < 1e-6);
        }
    }

    #[test]
    fn linear_data_is_unidentifiable() {
        let p: Vec<f64> = (1..=10).map(|k| k as f64).collect();
        let y = sample(&p, |x| 3.0 * x);
        for bg in [false, true] {
            let opts = SaturationOptions { linear_background: bg, ..Default::default() };
            assert!(matches!(fit_saturation(&p, &y, None, &opts), Err(PhotonError::Unidentifiable(_))), "bg {bg}");
        }
    }

    #[test]
    fn snr_definitions() {
        assert_eq!(snr(500.0, 100.0, SnrDefinition::Ratio), 5.0);
        assert_eq!(snr(0.0, 7.0, SnrDefinition::Ratio), 0.0);
        assert_eq!(snr(300.0, 600.0, SnrDefinition::ShotNoise), 10.0);
    }

    #[test]
    fn exact_lorentzian_dip() {
        let f: Vec<f64> = (0..81).map(|k| 50.0 + 0.5 * k as f64).collect();
        let y = sample(&f, |x| 1.0 - 0.04 * 36.0 / ((x - 71.6).powi(2) + 36.0));
        let fit = fit_odmr(&f, &y).unwrap();
        assert!((fit.get("center").unwrap().value - 71.6).abs() < 1e-8);
        assert!((fit.get("fwhm").unwrap().value - 12.0).abs() < 1e-7);
        assert!((fit.get("contrast").unwrap().value + 0.04).abs() < 1e-9);
        assert!(matches!(fit_odmr(&f, &vec![1.0; 81]), Err(PhotonError::NoPeak)));
    }

    #[test]
    fn exact_rabi_and_limits() {
        let t: Vec<f64> = (0..250).map(|k| 4.0 * k as f64).collect();
        let y = sample(&t, |x| 0.1 * (2.0 * PI * 6.65e-3 * x + 0.3).cos() * (-x / 234.0).exp() + 1.0);
        let fit = fit_rabi(&t, &y).unwrap();
        assert!((fit.get("f_rabi").unwrap().value - 6.65e-3).abs() < 1e-10, "{fit:?}");
        assert!((fit.get("tau").unwrap().value - 234.0).abs() < 1e-5);
        assert!((fit.get("phase").unwrap().value - 0.3).abs() < 1e-7);
        assert!(fit.flags.is_empty());

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let wobble: Vec<f64> = (0..250).map(|_| 1e-3 * rng.sample::<f64, _>(StandardNormal)).collect();
        let pure: Vec<f64> = t.iter().zip(&wobble).map(|(&x, w)| 0.1 * (2.0 * PI * 6.65e-3 * x).cos() + w).collect();
        let fit = fit_rabi(&t, &pure).unwrap();
        assert!(fit.get("tau").unwrap().value > 1000.0);
        assert!(fit.flags.contains(&"decay_time_exceeds_trace".to_string()), "{fit:?}");

        let flat: Vec<f64> = wobble.iter().map(|w| 1.0 + w).collect();
        assert!(matches!(fit_rabi(&t, &flat), Err(PhotonError::Unidentifiable(_))));
    }

    #[test]
    fn exact_echo() {
        let d: Vec<f64> = (0..40).map(|k| 4.0 * k as f64).collect();
        let y = sample(&d, |x| 0.05 * (-x / 42.5).exp() + 0.3);
        let fit = fit_hahn_echo(&d, &y, false).unwrap();
        assert!((fit.get("t2").unwrap().value - 42.5).abs() < 1e-6, "{fit:?}");
        let y = sample(&d, |x| 0.05 * (-(x / 42.5).powi(2)).exp() + 0.3);
        let fit = fit_hahn_echo(&d, &y, true).unwrap();
        assert!((fit.get("stretch").unwrap().value - 2.0).abs() < 1e-6, "{fit:?}");
        assert!(matches!(fit_hahn_echo(&d, &vec![0.3; 40], false), Err(PhotonError::Unidentifiable(_))));
    }

    #[test]
    fn evaluate_reproduces_exact_data() {
        let t: Vec<f64> = (0..250).map(|k| 2.0 + 4.0 * k as f64).collect();
        let rabi = |x: f64| 0.1 * (2.0 * PI * 6.65e-3 * x + 0.3).cos() * (-x / 234.0).exp() + 1.0;
        let fit = fit_rabi(&t, &sample(&t, rabi)).unwrap();
        assert_eq!(fit.origin, 2.0);
        let echo = |x: f64| 0.05 * (-(x / 42.5).powf(1.5)).exp() + 0.3;
        let echo_fit = fit_hahn_echo(&t[..40], &sample(&t[..40], echo), true).unwrap();
        let p: Vec<f64> = (1..=12).map(|k| 0.25 * k as f64).collect();
        let sat = |x: f64| 181.0 * SaturationModel::Exponential.shape(x, 0.8) + 12.0 * x;
        let opts = SaturationOptions { linear_background: true, ..Default::default() };
        let sat_fit = fit_saturation(&p, &sample(&p, sat), Some(5e6), &opts).unwrap();
        for &x in &t[..40] {
            assert!((fit.evaluate(x) - rabi(x)).abs() < 1e-9);
            assert!((echo_fit.evaluate(x) - echo(x)).abs() < 1e-9);
        }
        for &x in &p {
            assert!((sat_fit.evaluate(x) - sat(x)).abs() < 1e-6);
        }
    }
}
