//! Brute-force correlator and seeded Monte-Carlo recovery suites.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sicwfi::photon_stats::*;

/// All-pairs histogram: nearest multiple of the bin width, ties away from
/// zero (`f64::round`), `|k| ≤ window / width`.
pub fn brute_force(stream: &TimeTagStream, a: u8, b: u8, window: u64, width: u64) -> Vec<u64> {
    let k_max = (window / width) as i64;
    let mut counts = vec![0u64; (2 * k_max + 1) as usize];
    let ev = stream.events();
    for (i, x) in ev.iter().enumerate() {
        for (j, y) in ev.iter().enumerate() {
            if x.channel != a || y.channel != b || i == j {
                continue;
            }
            let k = ((y.time_ps as f64 - x.time_ps as f64) / width as f64).round() as i64;
            if k.abs() <= k_max {
                counts[(k + k_max) as usize] += 1;
            }
        }
    }
    counts
}

/// Up to 20 clicks on channels 0..3 with deliberately colliding times.
pub fn small_stream(rng: &mut ChaCha8Rng) -> TimeTagStream {
    let n = rng.random_range(1..=20);
    let span = rng.random_range(1..400u64);
    let mut events: Vec<TimeTag> =
        (0..n).map(|_| TimeTag { channel: rng.random_range(0..3), time_ps: rng.random_range(0..span) }).collect();
    events.sort_by_key(|e| e.time_ps);
    TimeTagStream::new([0, 1, 2], events, span).unwrap()
}

/// Recovered values and their reported 1σ over seeded repetitions.
#[derive(Debug, Clone)]
pub struct Runs {
    pub truth: f64,
    pub values: Vec<f64>,
    pub sigmas: Vec<f64>,
}

fn median(v: &[f64]) -> f64 {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

impl Runs {
    fn new(truth: f64) -> Self {
        Self { truth, values: Vec::new(), sigmas: Vec::new() }
    }

    fn push(&mut self, e: sicwfi::Estimate) {
        self.values.push(e.value);
        self.sigmas.push(e.sigma);
    }

    pub fn max_abs_error(&self) -> f64 {
        self.values.iter().map(|v| (v - self.truth).abs()).fold(0.0, f64::max)
    }

    pub fn max_rel_error(&self) -> f64 {
        self.max_abs_error() / self.truth.abs()
    }

    /// Median recovered value lies within the median reported σ of truth.
    pub fn unbiased(&self) -> bool {
        (median(&self.values) - self.truth).abs() <= median(&self.sigmas)
    }
}

pub const RUNS: u64 = 50;

/// Saturation with a linear background, powers in mW, rates in cps.
pub fn saturation_runs(model: SaturationModel, i_s: f64, runs: u64) -> Runs {
    let powers: Vec<f64> = (1..=20).map(|k| 0.2 * k as f64).collect();
    let rep = match model {
        SaturationModel::Hyperbolic => 40e6,
        SaturationModel::Exponential => 5e6,
    };
    let mut out = Runs::new(i_s);
    for seed in 0..runs {
        let y = saturation_curve(&powers, model, i_s, 1.25, 16e3, 30.0, seed);
        let opts = SaturationOptions { linear_background: true, ..Default::default() };
        let fit = fit_saturation(&powers, &y, Some(rep), &opts).unwrap();
        assert_eq!(fit.model, model.id());
        out.push(fit.get("i_s").unwrap());
    }
    out
}

/// ODMR in MHz: returns centre and FWHM recoveries.
pub fn odmr_runs(center: f64, fwhm: f64, runs: u64) -> (Runs, Runs) {
    let freqs: Vec<f64> = (0..161).map(|k| center - 40.0 + 0.5 * k as f64).collect();
    let (mut c, mut w) = (Runs::new(center), Runs::new(fwhm));
    for seed in 0..runs {
        let y = odmr_spectrum(&freqs, center, fwhm, 0.05, 1.0, 0.00025, seed);
        let fit = fit_odmr(&freqs, &y).unwrap();
        c.push(fit.get("center").unwrap());
        w.push(fit.get("fwhm").unwrap());
    }
    (c, w)
}

/// Rabi in µs / MHz: returns frequency and decay-time recoveries.
pub fn rabi_runs(f: f64, tau: f64, runs: u64) -> (Runs, Runs) {
    let t: Vec<f64> = (0..300).map(|k| 0.004 * k as f64).collect();
    let (mut rf, mut rt) = (Runs::new(f), Runs::new(tau));
    for seed in 0..runs {
        let y = rabi_trace(&t, f, tau, 0.1, 0.0, 1.0, 0.003, seed);
        let fit = fit_rabi(&t, &y).unwrap();
        rf.push(fit.get("f_rabi").unwrap());
        rt.push(fit.get("tau").unwrap());
    }
    (rf, rt)
}

/// Hahn echo in µs; `stretch` is both generated and, if not 1, fitted free.
pub fn echo_runs(t2: f64, stretch: f64, runs: u64) -> (Runs, Runs) {
    let d: Vec<f64> = (0..121).map(|k| 1.25 * k as f64).collect();
    let (mut rt, mut rn) = (Runs::new(t2), Runs::new(stretch));
    for seed in 0..runs {
        let y = echo_trace(&d, t2, stretch, 0.1, 0.5, 0.001, seed);
        let fit = fit_hahn_echo(&d, &y, stretch != 1.0).unwrap();
        rt.push(fit.get("t2").unwrap());
        if let Some(n) = fit.get("stretch") {
            rn.push(n);
        }
    }
    (rt, rn)
}

/// Pulsed single emitter at 10 MHz with uncorrelated light set for `g2`.
pub fn pulsed_g2_runs(g2: f64, runs: u64) -> Runs {
    let mut out = Runs::new(g2);
    for seed in 0..runs {
        let p = EmitterParams {
            excitation: Excitation::Pulsed { rep_rate_hz: 10e6, probability: 0.5 },
            detection_efficiency: 0.1,
            background: Background::G2Target { g2_zero: g2 },
            duration_ps: 500_000_000_000,
            seed,
            ..Default::default()
        };
        let stream = simulate_emitter(&p).unwrap();
        let hist = correlate(&stream, 0, 1, 650_000, 1_000).unwrap();
        let env = pulsed_g2_envelope(&hist, 100_000.0, &EnvelopeOptions::default()).unwrap();
        out.push(env.g2_zero);
    }
    out
}
