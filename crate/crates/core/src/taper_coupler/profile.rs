use serde::{Deserialize, Serialize};

use crate::mode_solver::CrossSectionGeometry;

use super::TaperError;

/// Overlap region of a tapered nanobeam and a tapered fibre.
///
/// `z` runs from the fibre tip (`z = 0`) to the nanobeam tip (`z = L`). The
/// beam narrows linearly to zero width at its tip; the fibre cone grows from
/// `tip_radius`. The fibre rests on the flat top face, axes parallel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaperProfile {
    /// Full opening angle of the nanobeam taper, degrees.
    pub waveguide_angle_deg: f64,
    /// Full opening angle of the fibre cone, degrees.
    pub fiber_angle_deg: f64,
    pub fiber_index: f64,
    /// Radius where a broken cone is truncated; 0 for an ideal tip.
    pub tip_radius: f64,
    pub overlap_length: f64,
    /// Air gap between the top face and the fibre surface.
    pub gap: f64,
    pub wavelength: f64,
    /// Untapered beam cross-section.
    pub waveguide: CrossSectionGeometry,
}

impl TaperProfile {
    /// α = 2°, β = 1.95°, ideal tip, 490 nm beam at 960 nm.
    pub fn nominal(overlap_length: f64) -> Self {
        Self {
            waveguide_angle_deg: 2.0,
            fiber_angle_deg: 1.95,
            fiber_index: 1.45,
            tip_radius: 0.0,
            overlap_length,
            gap: 0.0,
            wavelength: 960e-9,
            waveguide: CrossSectionGeometry::with_width(490e-9).expect("nominal geometry is valid"),
        }
    }

    pub fn validate(&self) -> Result<(), TaperError> {
        let bad = |msg: String| Err(TaperError::InvalidProfile(msg));
        if !(self.waveguide_angle_deg > 0.0 && self.waveguide_angle_deg < 180.0) {
            return bad(format!("waveguide taper angle {} out of range", self.waveguide_angle_deg));
        }
        if !(self.fiber_angle_deg > 0.0 && self.fiber_angle_deg < 180.0) {
            return bad(format!("fibre cone angle {} out of range", self.fiber_angle_deg));
        }
        if !(self.tip_radius >= 0.0 && self.overlap_length >= 0.0 && self.gap >= 0.0) {
            return bad("tip radius, overlap length and gap must be non-negative".into());
        }
        if !(self.wavelength > 0.0) {
            return bad(format!("wavelength {} must be positive", self.wavelength));
        }
        self.waveguide.validate()?;
        let n_core = self.waveguide.core_index.at(self.wavelength);
        if !(n_core > self.fiber_index && self.fiber_index > self.waveguide.cladding_index) {
            return bad(format!(
                "need n_core > n_fiber > n_clad, got {n_core} / {} / {}",
                self.fiber_index, self.waveguide.cladding_index
            ));
        }
        Ok(())
    }

    pub fn waveguide_width_at(&self, z: f64) -> f64 {
        let half = (self.waveguide_angle_deg / 2.0).to_radians().tan();
        (2.0 * (self.overlap_length - z) * half).clamp(0.0, self.waveguide.width)
    }

    pub fn fiber_radius_at(&self, z: f64) -> f64 {
        self.tip_radius + z.max(0.0) * (self.fiber_angle_deg / 2.0).to_radians().tan()
    }

    /// Cone length lost to the break, `r_tip / tan(β/2)`.
    pub fn missing_cone_length(&self) -> f64 {
        self.tip_radius / (self.fiber_angle_deg / 2.0).to_radians().tan()
    }

    pub fn section_at(&self, z: f64) -> CompositeSection {
        CompositeSection { waveguide_width: self.waveguide_width_at(z), fiber_radius: self.fiber_radius_at(z) }
    }

    /// Bare nanobeam feeding the overlap region.
    pub fn entrance(&self) -> CompositeSection {
        CompositeSection { waveguide_width: self.waveguide_width_at(0.0), fiber_radius: 0.0 }
    }

    /// Bare fibre leaving the overlap region.
    pub fn exit(&self) -> CompositeSection {
        CompositeSection { waveguide_width: 0.0, fiber_radius: self.fiber_radius_at(self.overlap_length) }
    }
}

/// Cross-section of the overlap region; a zero width or radius drops that
/// core.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeSection {
    pub waveguide_width: f64,
    pub fiber_radius: f64,
}

/// One z-invariant piece of the staircase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub section: CompositeSection,
    pub length: f64,
}

/// Staircase of the overlap region between a launch and an exit section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentStack {
    pub profile: TaperProfile,
    pub entrance: CompositeSection,
    pub segments: Vec<Segment>,
    pub exit: CompositeSection,
}

impl SegmentStack {
    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| s.length).sum()
    }

    /// Widest beam and fattest fibre anywhere in the stack.
    pub fn extent(&self) -> (f64, f64) {
        std::iter::once(&self.entrance)
            .chain(self.segments.iter().map(|s| &s.section))
            .chain(std::iter::once(&self.exit))
            .fold((0.0f64, 0.0f64), |(w, r), s| (w.max(s.waveguide_width), r.max(s.fiber_radius)))
    }
}

/// Default staircase resolution: four steps per vacuum wavelength.
pub fn default_segment_count(profile: &TaperProfile) -> usize {
    ((profile.overlap_length / profile.wavelength).ceil() as usize * 4).max(1)
}

/// Piecewise-constant staircase with cross-sections taken at segment midpoints.
pub fn build_segments(profile: &TaperProfile, n_segments: usize) -> Result<SegmentStack, TaperError> {
    profile.validate()?;
    if n_segments == 0 {
        return Err(TaperError::InvalidProfile("need at least one segment".into()));
    }
    let length = profile.overlap_length;
    if length == 0.0 && n_segments > 1 {
        return Err(TaperError::DegenerateStack(n_segments));
    }
    let dz = length / n_segments as f64;
    let segments =
        (0..n_segments).map(|k| Segment { section: profile.section_at((k as f64 + 0.5) * dz), length: dz }).collect();
    Ok(SegmentStack { profile: profile.clone(), entrance: profile.entrance(), segments, exit: profile.exit() })
}

/// Outcome of [`adiabaticity_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticityReport {
    pub adiabatic: bool,
    pub overlap_in_wavelengths: f64,
    /// Beam width change per unit length, `2 tan(α/2)`.
    pub width_rate: f64,
    /// Fibre diameter change per unit length, `2 tan(β/2)`.
    pub diameter_rate: f64,
    pub rate_threshold: f64,
}

/// `L > λ` and both cross-sections change by less than `rate_threshold`
/// wavelengths per wavelength of propagation.
pub fn adiabaticity_check(profile: &TaperProfile, rate_threshold: f64) -> AdiabaticityReport {
    let rate = |deg: f64| 2.0 * (deg / 2.0).to_radians().tan();
    let width_rate = rate(profile.waveguide_angle_deg);
    let diameter_rate = rate(profile.fiber_angle_deg);
    let overlap_in_wavelengths = profile.overlap_length / profile.wavelength;
    AdiabaticityReport {
        adiabatic: overlap_in_wavelengths > 1.0 && width_rate <= rate_threshold && diameter_rate <= rate_threshold,
        overlap_in_wavelengths,
        width_rate,
        diameter_rate,
        rate_threshold,
    }
}

pub const DEFAULT_RATE_THRESHOLD: f64 = 0.1;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn width_change_across_overlap() {
        let mut p = TaperProfile::nominal(15e-6);
        p.waveguide.width = 10e-6;
        let change = p.waveguide_width_at(0.0) - p.waveguide_width_at(15e-6);
        assert!((change - 523.6e-9).abs() < 0.5e-9, "{change}");
    }

    #[test]
    fn broken_tip_shortens_cone() {
        let mut p = TaperProfile::nominal(15e-6);
        p.tip_radius = 170e-9;
        assert!((p.missing_cone_length() - 9.99e-6).abs() < 0.02e-6);
        assert_eq!(p.fiber_radius_at(0.0), 170e-9);
    }

    #[test]
    fn zero_length_stack() {
        let stack = build_segments(&TaperProfile::nominal(0.0), 1).unwrap();
        assert_eq!(stack.segments.len(), 1);
        assert_eq!(stack.total_length(), 0.0);
        assert_eq!(build_segments(&TaperProfile::nominal(0.0), 3), Err(TaperError::DegenerateStack(3)));
    }

    #[test]
    fn staircase_is_monotone_and_sums_to_length() {
        let p = TaperProfile::nominal(20e-6);
        let stack = build_segments(&p, default_segment_count(&p)).unwrap();
        assert_eq!(stack.segments.len(), 84);
        assert!((stack.total_length() - 20e-6).abs() < 1e-15);
        for pair in stack.segments.windows(2) {
            assert!(pair[1].section.waveguide_width <= pair[0].section.waveguide_width);
            assert!(pair[1].section.fiber_radius > pair[0].section.fiber_radius);
        }
        assert_eq!(stack.entrance.fiber_radius, 0.0);
        assert_eq!(stack.exit.waveguide_width, 0.0);
    }

    #[test]
    fn adiabaticity_examples() {
        let th = DEFAULT_RATE_THRESHOLD;
        assert!(adiabaticity_check(&TaperProfile::nominal(15e-6), th).adiabatic);
        assert!(!adiabaticity_check(&TaperProfile::nominal(0.5e-6), th).adiabatic);
        for l in [15e-6, 100e-6, 1e-3] {
            let mut p = TaperProfile::nominal(l);
            p.waveguide_angle_deg = 20.0;
            assert!(!adiabaticity_check(&p, th).adiabatic);
        }
    }

    #[test]
    fn index_ordering_enforced() {
        let mut p = TaperProfile::nominal(10e-6);
        p.fiber_index = 3.0;
        assert!(p.validate().is_err());
        p.fiber_index = 1.45;
        p.tip_radius = -1.0;
        assert!(p.validate().is_err());
    }
}
