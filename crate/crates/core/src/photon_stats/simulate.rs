//! Seeded generators: a Monte-Carlo three-level emitter producing time tags,
//! and noisy traces for each fitter. Every generator owns its RNG.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Geometric, Normal, Poisson};
use serde::{Deserialize, Serialize};

use super::{PhotonError, SaturationModel, TimeTag, TimeTagStream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Excitation {
    /// Ground → excited at a constant rate.
    Continuous { rate_hz: f64 },
    /// Short pulses, each exciting a ground-state emitter with `probability`.
    Pulsed { rep_rate_hz: f64, probability: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Background {
    /// Uniform Poisson clicks, total over both detectors.
    Rate { cps: f64 },
    /// Uniform clicks sized after the emitter run so that all uncorrelated
    /// light gives `g²(0) = 1 - ρ²`, `ρ` the emitter fraction of clicks.
    G2Target { g2_zero: f64 },
}

/// Fast-decaying fluorescent defects excited by the same laser.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceBackground {
    /// Detected clicks per second, both detectors.
    pub rate_cps: f64,
    pub lifetime_ps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmitterParams {
    pub excitation: Excitation,
    pub lifetime_ps: f64,
    /// Chance that a decay from the excited state goes to the metastable level.
    pub shelving_probability: f64,
    pub metastable_lifetime_ps: f64,
    /// Probability that an emitted photon is detected (either detector).
    pub detection_efficiency: f64,
    pub background: Background,
    pub surface: Option<SurfaceBackground>,
    /// Gaussian σ of the click timing.
    pub jitter_ps: f64,
    pub duration_ps: u64,
    pub seed: u64,
}

impl Default for EmitterParams {
    fn default() -> Self {
        Self {
            excitation: Excitation::Pulsed { rep_rate_hz: 10e6, probability: 0.5 },
            lifetime_ps: 9_000.0,
            shelving_probability: 0.005,
            metastable_lifetime_ps: 100_000.0,
            detection_efficiency: 0.05,
            background: Background::Rate { cps: 0.0 },
            surface: None,
            jitter_ps: 100.0,
            duration_ps: 1_000_000_000_000,
            seed: 0,
        }
    }
}

impl EmitterParams {
    fn validate(&self) -> Result<(), PhotonError> {
        let bad = |what: &str| Err(PhotonError::InvalidParameter(what.into()));
        match self.excitation {
            Excitation::Continuous { rate_hz } if !(rate_hz > 0.0) => return bad("excitation rate must be positive"),
            Excitation::Pulsed { rep_rate_hz, probability }
                if !(rep_rate_hz > 0.0) || !(probability > 0.0 && probability <= 1.0) =>
            {
                return bad("pulsed excitation needs a positive rate and probability in (0, 1]");
            }
            _ => {}
        }
        if !(self.lifetime_ps > 0.0 && self.metastable_lifetime_ps > 0.0) {
            return bad("lifetimes must be positive");
        }
        if !(0.0..1.0).contains(&self.shelving_probability) || !(0.0..=1.0).contains(&self.detection_efficiency) {
            return bad("probabilities must lie in [0, 1)");
        }
        match self.background {
            Background::Rate { cps } if !(cps >= 0.0) => return bad("background rate must be non-negative"),
            Background::G2Target { g2_zero } if !(0.0..1.0).contains(&g2_zero) => {
                return bad("g2 target must lie in [0, 1)")
            }
            _ => {}
        }
        if let Some(s) = self.surface {
            if !(s.rate_cps >= 0.0 && s.lifetime_ps > 0.0) {
                return bad("surface background needs a non-negative rate and positive lifetime");
            }
        }
        if !(self.jitter_ps >= 0.0) || self.duration_ps == 0 {
            return bad("jitter must be non-negative and duration positive");
        }
        Ok(())
    }
}

fn exp(mean: f64) -> Exp<f64> {
    Exp::new(1.0 / mean).expect("positive mean")
}

/// Emission times of the three-level emitter (ground, excited, metastable).
fn emitter_photons(p: &EmitterParams, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let end = p.duration_ps as f64;
    let decay = exp(p.lifetime_ps);
    let dark = exp(p.metastable_lifetime_ps);
    let mut out = Vec::new();
    match p.excitation {
        Excitation::Continuous { rate_hz } => {
            let pump = exp(1e12 / rate_hz);
            let mut t = 0.0;
            loop {
                t += pump.sample(rng);
                if t >= end {
                    break;
                }
                t += decay.sample(rng);
                if rng.random_bool(p.shelving_probability) {
                    t += dark.sample(rng);
                } else if t < end {
                    out.push(t);
                }
            }
        }
        Excitation::Pulsed { rep_rate_hz, probability } => {
            let period = 1e12 / rep_rate_hz;
            let misses = Geometric::new(probability).expect("valid probability");
            let mut next = 0u64;
            loop {
                let pulse = next + misses.sample(rng);
                let mut t = pulse as f64 * period;
                if t >= end {
                    break;
                }
                t += decay.sample(rng);
                if rng.random_bool(p.shelving_probability) {
                    t += dark.sample(rng);
                } else if t < end {
                    out.push(t);
                }
                next = (t / period).floor() as u64 + 1;
            }
        }
    }
    out
}

/// Monte-Carlo emitter behind a 50:50 splitter onto channels 0 and 1.
/// Deterministic for a given seed.
pub fn simulate_emitter(p: &EmitterParams) -> Result<TimeTagStream, PhotonError> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let end = p.duration_ps as f64;
    let emitted = emitter_photons(p, &mut rng);
    let mut clicks: Vec<f64> = emitted.into_iter().filter(|_| rng.random_bool(p.detection_efficiency)).collect();
    let signal = clicks.len();

    if let Some(s) = p.surface {
        let count = poisson(s.rate_cps * end * 1e-12, &mut rng);
        let decay = exp(s.lifetime_ps);
        for _ in 0..count {
            let t = match p.excitation {
                Excitation::Pulsed { rep_rate_hz, .. } => {
                    let period = 1e12 / rep_rate_hz;
                    let pulses = (end / period).ceil() as u64;
                    rng.random_range(0..pulses) as f64 * period + decay.sample(&mut rng)
                }
                Excitation::Continuous { .. } => rng.random_range(0.0..end),
            };
            if t < end {
                clicks.push(t);
            }
        }
    }
    let uniform = match p.background {
        Background::Rate { cps } => poisson(cps * end * 1e-12, &mut rng),
        Background::G2Target { g2_zero } => {
            let rho = (1.0 - g2_zero).sqrt();
            let total = signal as f64 * (1.0 / rho - 1.0);
            (total - (clicks.len() - signal) as f64).max(0.0).round() as u64
        }
    };
    for _ in 0..uniform {
        clicks.push(rng.random_range(0.0..end));
    }

    let jitter = Normal::new(0.0, p.jitter_ps).expect("finite jitter");
    let mut events: Vec<TimeTag> = clicks
        .into_iter()
        .map(|t| {
            let t = (t + jitter.sample(&mut rng)).clamp(0.0, end - 1.0);
            TimeTag { channel: rng.random_range(0..2), time_ps: t as u64 }
        })
        .collect();
    events.sort_unstable_by_key(|e| (e.time_ps, e.channel));
    TimeTagStream::new([0, 1], events, p.duration_ps)
}

fn poisson(mean: f64, rng: &mut ChaCha8Rng) -> u64 {
    if mean <= 0.0 {
        0
    } else {
        Poisson::new(mean).expect("positive mean").sample(rng) as u64
    }
}

fn with_noise(clean: impl Iterator<Item = f64>, sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma.max(0.0)).expect("finite sigma");
    clean.map(|v| v + noise.sample(&mut rng)).collect()
}

/// Count rates `I_s shape(P) + b P` measured for `integration_s` each, with
/// Poisson counting noise.
pub fn saturation_curve(
    powers: &[f64],
    model: SaturationModel,
    i_s: f64,
    p_s: f64,
    b: f64,
    integration_s: f64,
    seed: u64,
) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    powers
        .iter()
        .map(|&p| {
            let rate = i_s * model.shape(p, p_s) + b * p;
            poisson(rate * integration_s, &mut rng) as f64 / integration_s
        })
        .collect()
}

/// Lorentzian `offset + contrast (Γ/2)² / ((f - center)² + (Γ/2)²)` plus
/// Gaussian noise.
pub fn odmr_spectrum(
    freqs: &[f64],
    center: f64,
    fwhm: f64,
    contrast: f64,
    offset: f64,
    noise: f64,
    seed: u64,
) -> Vec<f64> {
    let hw2 = 0.25 * fwhm * fwhm;
    with_noise(freqs.iter().map(|&f| offset + contrast * hw2 / ((f - center).powi(2) + hw2)), noise, seed)
}

/// `A cos(2π f t + φ) exp(-t/τ) + C` plus Gaussian noise; `tau = ∞` gives
/// an undamped trace.
#[allow(clippy::too_many_arguments)]
pub fn rabi_trace(
    times: &[f64],
    f_rabi: f64,
    tau: f64,
    amplitude: f64,
    phase: f64,
    offset: f64,
    noise: f64,
    seed: u64,
) -> Vec<f64> {
    with_noise(
        times.iter().map(|&t| amplitude * (2.0 * PI * f_rabi * t + phase).cos() * (-t / tau).exp() + offset),
        noise,
        seed,
    )
}

/// `A exp(-(τ/T2)^n) + C` plus Gaussian noise.
pub fn echo_trace(
    delays: &[f64],
    t2: f64,
    stretch: f64,
    amplitude: f64,
    offset: f64,
    noise: f64,
    seed: u64,
) -> Vec<f64> {
    with_noise(delays.iter().map(|&t| amplitude * (-(t / t2).powf(stretch)).exp() + offset), noise, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_sorted() {
        let p = EmitterParams {
            duration_ps: 2_000_000_000,
            background: Background::Rate { cps: 5e4 },
            seed: 9,
            ..Default::default()
        };
        let a = simulate_emitter(&p).unwrap();
        assert_eq!(a, simulate_emitter(&p).unwrap());
        assert!(!a.is_empty());
        assert_ne!(a, simulate_emitter(&EmitterParams { seed: 10, ..p }).unwrap());
    }

    #[test]
    fn pulsed_emitter_never_double_fires() {
        let p = EmitterParams {
            excitation: Excitation::Pulsed { rep_rate_hz: 10e6, probability: 1.0 },
            detection_efficiency: 1.0,
            shelving_probability: 0.0,
            jitter_ps: 0.0,
            duration_ps: 10_000_000_000,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = emitter_photons(&p, &mut rng);
        // One photon per pulse at most, emitted after its pulse.
        let pulses: Vec<u64> = t.iter().map(|&x| (x / 1e5) as u64).collect();
        assert!(pulses.windows(2).all(|w| w[1] > w[0]));
        assert!(t.len() > 90_000 && t.len() <= 100_000, "{}", t.len());
    }

    #[test]
    fn invalid_parameters_rejected() {
        let p = EmitterParams { background: Background::G2Target { g2_zero: 1.0 }, ..Default::default() };
        assert!(simulate_emitter(&p).is_err());
    }
}
