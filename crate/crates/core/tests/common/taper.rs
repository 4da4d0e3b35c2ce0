//! Coarse EME settings and random taper profiles for the property suites.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sicwfi::mode_solver::Polarization;
use sicwfi::taper_coupler::{EmeSettings, TaperProfile};

/// Coarse but qualitatively faithful discretization for the property suites.
pub fn coarse() -> EmeSettings {
    EmeSettings {
        spacing: 40e-9,
        margin: Some(0.6e-6),
        subsamples: 4,
        modes_per_segment: 3,
        segments: None,
        polarization: Polarization::QuasiTm,
    }
}

pub fn random_profile(rng: &mut ChaCha8Rng) -> TaperProfile {
    let mut p = TaperProfile::nominal(rng.random_range(4e-6..10e-6));
    p.waveguide_angle_deg = rng.random_range(1.5..6.0);
    p.fiber_angle_deg = rng.random_range(1.5..6.0);
    p.tip_radius = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(50e-9..300e-9) };
    p.gap = rng.random_range(0.0..50e-9);
    p
}
