use serde::{Deserialize, Serialize};

use super::{PhotonError, TimeTagStream};
use crate::Estimate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Normalization {
    Raw,
    /// Divided by the mean of the bins at `|τ| ≥ min_delay_ps`.
    LongDelay {
        min_delay_ps: f64,
        scale: f64,
    },
    /// Divided by the coincidences expected per bin from uncorrelated
    /// streams with the same totals, `N_a N_b Δτ / T`.
    Poisson {
        scale: f64,
    },
}

/// Coincidences of `t_b - t_a` in bins centred on multiples of the bin width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationHistogram {
    /// `2K + 2` edges at `(k - 1/2) Δτ`, ps.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub normalization: Normalization,
    pub rep_period_ps: Option<f64>,
    pub binwidth_ps: u64,
    pub events_a: usize,
    pub events_b: usize,
    pub duration_ps: u64,
    /// Auto-correlation of one channel (zero-lag self-pairs excluded).
    pub auto: bool,
}

impl CorrelationHistogram {
    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect()
    }

    fn scale(&self) -> f64 {
        match self.normalization {
            Normalization::Raw => 1.0,
            Normalization::LongDelay { scale, .. } | Normalization::Poisson { scale } => scale,
        }
    }

    /// Counts divided by the normalization (g²(τ) once normalized).
    pub fn values(&self) -> Vec<f64> {
        let s = self.scale();
        self.counts.iter().map(|&c| c as f64 / s).collect()
    }

    /// One-sigma counting error of each value.
    pub fn errors(&self) -> Vec<f64> {
        let s = self.scale();
        self.counts.iter().map(|&c| (c as f64).max(1.0).sqrt() / s).collect()
    }

    pub fn normalize_long_delay(mut self, min_delay_ps: f64) -> Result<Self, PhotonError> {
        let far: Vec<u64> =
            self.centers().iter().zip(&self.counts).filter(|(c, _)| c.abs() >= min_delay_ps).map(|(_, &n)| n).collect();
        let mean = far.iter().sum::<u64>() as f64 / far.len() as f64;
        if far.is_empty() || mean <= 0.0 {
            return Err(PhotonError::InvalidParameter(format!("no coincidences beyond |τ| = {min_delay_ps} ps")));
        }
        self.normalization = Normalization::LongDelay { min_delay_ps, scale: mean };
        Ok(self)
    }

    pub fn normalize_poisson(mut self) -> Result<Self, PhotonError> {
        let pairs = if self.auto {
            self.events_a as f64 * (self.events_a as f64 - 1.0)
        } else {
            self.events_a as f64 * self.events_b as f64
        };
        let scale = pairs * self.binwidth_ps as f64 / self.duration_ps as f64;
        if !(scale > 0.0) {
            return Err(PhotonError::InvalidParameter("no pairs to normalize against".into()));
        }
        self.normalization = Normalization::Poisson { scale };
        Ok(self)
    }
}

/// Bin index of a delay: nearest multiple of `width`, ties away from zero.
fn bin_of(delay: i128, width: i128) -> i128 {
    delay.signum() * ((2 * delay.abs() + width) / (2 * width))
}

/// Full (start-stop free) correlation of `ch_b` against `ch_a`: every pair
/// with `|t_b - t_a|` inside the window lands in a bin of width `binwidth_ps`
/// centred on `k binwidth`, `|k| ≤ window / binwidth`. With `ch_a == ch_b`
/// an event is never paired with itself.
pub fn correlate(
    stream: &TimeTagStream,
    ch_a: u8,
    ch_b: u8,
    window_ps: u64,
    binwidth_ps: u64,
) -> Result<CorrelationHistogram, PhotonError> {
    if binwidth_ps == 0 {
        return Err(PhotonError::InvalidParameter("bin width must be positive".into()));
    }
    let a = stream.times(ch_a)?;
    let b = if ch_a == ch_b { a.clone() } else { stream.times(ch_b)? };
    for (ch, t) in [(ch_a, &a), (ch_b, &b)] {
        if t.is_empty() {
            return Err(PhotonError::EmptyChannel(ch));
        }
    }
    let half_bins = (window_ps / binwidth_ps) as i128;
    let width = binwidth_ps as i128;
    // Pairs are kept while 2|τ| < (2K + 1) Δτ.
    let reach2 = (2 * half_bins + 1) * width;
    let mut counts = vec![0u64; (2 * half_bins + 1) as usize];
    let auto = ch_a == ch_b;
    let mut lo = 0;
    for (i, &ta) in a.iter().enumerate() {
        let ta = ta as i128;
        while lo < b.len() && 2 * (b[lo] as i128 - ta) <= -reach2 {
            lo += 1;
        }
        for (j, &tb) in b.iter().enumerate().skip(lo) {
            let d = tb as i128 - ta;
            if 2 * d >= reach2 {
                break;
            }
            if auto && i == j {
                continue;
            }
            counts[(bin_of(d, width) + half_bins) as usize] += 1;
        }
    }
    let edges = (-half_bins..=half_bins + 1).map(|k| (k as f64 - 0.5) * binwidth_ps as f64).collect();
    Ok(CorrelationHistogram {
        edges,
        counts,
        normalization: Normalization::Raw,
        rep_period_ps: None,
        binwidth_ps,
        events_a: a.len(),
        events_b: b.len(),
        duration_ps: stream.duration_ps(),
        auto,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeOptions {
    /// Side peaks `1..=exclude_nearest` on each side are left out of the
    /// reference mean.
    pub exclude_nearest: usize,
    /// Integration half-window around each peak; `None` uses half a period.
    pub half_window_ps: Option<f64>,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        Self { exclude_nearest: 2, half_window_ps: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct G2Envelope {
    /// Peak order `k` (delay `k T`) and integrated raw counts.
    pub orders: Vec<i64>,
    pub areas: Vec<f64>,
    pub side_mean: Estimate,
    pub g2_zero: Estimate,
}

/// Integrate the pulsed histogram peak by peak; g²(0) is the centre area
/// over the mean area of the side peaks beyond the excluded nearest ones.
pub fn pulsed_g2_envelope(
    hist: &CorrelationHistogram,
    rep_period_ps: f64,
    options: &EnvelopeOptions,
) -> Result<G2Envelope, PhotonError> {
    let width = hist.binwidth_ps as f64;
    if !(rep_period_ps > 2.0 * width) {
        return Err(PhotonError::InvalidParameter(format!(
            "repetition period {rep_period_ps} ps vs bin width {width} ps"
        )));
    }
    let h = options.half_window_ps.unwrap_or(0.5 * rep_period_ps);
    if !(h > 0.0 && h <= 0.5 * rep_period_ps) {
        return Err(PhotonError::InvalidParameter(format!("half window {h} ps")));
    }
    let (lo, hi) = (hist.edges[0], hist.edges[hist.edges.len() - 1]);
    let reach = ((hi.min(-lo) - h) / rep_period_ps).floor().max(-1.0) as i64;
    if reach < 0 {
        return Err(PhotonError::InsufficientSidePeaks { found: 0 });
    }
    let centers = hist.centers();
    let orders: Vec<i64> = (-reach..=reach).collect();
    let areas: Vec<f64> = orders
        .iter()
        .map(|&k| {
            let c = k as f64 * rep_period_ps;
            centers.iter().zip(&hist.counts).filter(|(x, _)| **x >= c - h && **x < c + h).map(|(_, &n)| n as f64).sum()
        })
        .collect();
    let side: Vec<f64> = orders
        .iter()
        .zip(&areas)
        .filter(|(k, _)| k.unsigned_abs() as usize > options.exclude_nearest)
        .map(|(_, &a)| a)
        .collect();
    if side.len() < 4 {
        return Err(PhotonError::InsufficientSidePeaks { found: side.len() });
    }
    let total: f64 = side.iter().sum();
    let mean = total / side.len() as f64;
    if mean <= 0.0 {
        return Err(PhotonError::InvalidParameter("side peaks are empty".into()));
    }
    let center = areas[reach as usize];
    let g2 = center / mean;
    let sigma = if center > 0.0 { g2 * (1.0 / center + 1.0 / total).sqrt() } else { 1.0 / mean };
    Ok(G2Envelope {
        orders,
        areas,
        side_mean: Estimate::new(mean, total.sqrt() / side.len() as f64),
        g2_zero: Estimate::new(g2, sigma),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photon_stats::TimeTag;

    fn stream(raw: &[(u8, u64)]) -> TimeTagStream {
        let mut v: Vec<TimeTag> = raw.iter().map(|&(channel, time_ps)| TimeTag { channel, time_ps }).collect();
        v.sort_by_key(|e| e.time_ps);
        TimeTagStream::from_events(v).unwrap()
    }

    #[test]
    fn ties_go_away_from_zero() {
        assert_eq!(bin_of(5, 10), 1);
        assert_eq!(bin_of(-5, 10), -1);
        assert_eq!(bin_of(4, 10), 0);
        assert_eq!(bin_of(-15, 10), -2);
    }

    #[test]
    fn hand_counted_pairs() {
        let s = stream(&[(0, 100), (1, 103), (1, 95), (0, 200), (1, 260)]);
        let h = correlate(&s, 0, 1, 60, 10).unwrap();
        // Delays: -5 → -1, 3 → 0, 160 out, -105 out, -97 out, 60 → 6.
        assert_eq!(h.counts.len(), 13);
        assert_eq!(h.counts[6], 1);
        assert_eq!(h.counts[5], 1);
        assert_eq!(h.counts[12], 1);
        assert_eq!(h.counts.iter().sum::<u64>(), 3);
    }

    #[test]
    fn auto_correlation_excludes_self_pairs() {
        let s = stream(&[(0, 10), (0, 10), (0, 30)]);
        let h = correlate(&s, 0, 0, 40, 10).unwrap();
        // The two simultaneous clicks pair with each other, both ways.
        assert_eq!(h.counts[4], 2);
        assert_eq!(h.counts, h.counts.iter().rev().copied().collect::<Vec<_>>());
    }

    #[test]
    fn errors() {
        let s = TimeTagStream::new([0, 1], vec![TimeTag { channel: 0, time_ps: 1 }], 10).unwrap();
        assert!(matches!(correlate(&s, 0, 1, 10, 1), Err(PhotonError::EmptyChannel(1))));
        assert!(matches!(correlate(&s, 0, 2, 10, 1), Err(PhotonError::UnknownChannel(2))));
        assert!(correlate(&s, 0, 0, 10, 0).is_err());
    }

    #[test]
    fn envelope_limits() {
        let h = CorrelationHistogram {
            edges: (-70..=71).map(|i| (i as f64 - 0.5) * 10.0).collect(),
            counts: vec![3; 141],
            normalization: Normalization::Raw,
            rep_period_ps: None,
            binwidth_ps: 10,
            events_a: 1,
            events_b: 1,
            duration_ps: 1,
            auto: false,
        };
        let e = pulsed_g2_envelope(&h, 100.0, &EnvelopeOptions::default()).unwrap();
        assert_eq!(e.orders, (-6..=6).collect::<Vec<_>>());
        assert!((e.g2_zero.value - 1.0).abs() < 1e-12);
        let mut empty = h.clone();
        for c in &mut empty.counts[65..75] {
            *c = 0;
        }
        assert_eq!(pulsed_g2_envelope(&empty, 100.0, &EnvelopeOptions::default()).unwrap().g2_zero.value, 0.0);
        assert!(matches!(
            pulsed_g2_envelope(&h, 200.0, &EnvelopeOptions::default()),
            Err(PhotonError::InsufficientSidePeaks { found: 2 })
        ));
    }
}
