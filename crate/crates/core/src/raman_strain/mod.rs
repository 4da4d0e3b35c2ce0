//! Raman phonon shifts to stress and strain in 4H-SiC.
//!
//! Peak shifts relate to the stress components through
//! `Δν = 2a σ_perp + b σ_para` for each of E1(TO), E2(TO) and A1(LO); stress
//! converts to strain with the hexagonal stiffness constants.

mod map;
mod peak;

use nalgebra::{Matrix2, Matrix2x3, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fit::LmError;
use crate::Estimate;

pub use map::{build_strain_map, MapCell, MapSettings, StrainMap};
pub use peak::{fit_peak, pseudo_voigt, reject_cosmic_rays, PeakFit};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RamanError {
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("fit window {0:?} is invalid: {1}")]
    InvalidWindow((f64, f64), String),
    #[error("no peak above 3x noise in window {0:?}")]
    NoPeak((f64, f64)),
    #[error("peak fit did not converge (residual {0:.3e})")]
    FitFailed(f64),
    #[error(transparent)]
    Lm(#[from] LmError),
    #[error("label mismatch: {0} vs {1}")]
    LabelMismatch(PeakLabel, PeakLabel),
    #[error("singular stress system for the {0} pair")]
    DegenerateSystem(String),
    #[error("stress states are collinear; cannot separate a and b")]
    RankDeficient,
    #[error("invalid constants: {0}")]
    InvalidConstants(String),
    #[error("reference spectrum: {0}")]
    Reference(Box<RamanError>),
    #[error("scan positions are not rectilinear: {0}")]
    NotRectilinear(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PeakLabel {
    E1,
    E2,
    A1,
}

impl PeakLabel {
    pub const ALL: [PeakLabel; 3] = [PeakLabel::E1, PeakLabel::E2, PeakLabel::A1];

    /// Unstrained position in 4H-SiC, cm⁻¹.
    pub fn nominal_center(self) -> f64 {
        match self {
            PeakLabel::E1 => 797.0,
            PeakLabel::E2 => 776.0,
            PeakLabel::A1 => 964.0,
        }
    }

    pub fn default_window(self) -> (f64, f64) {
        match self {
            PeakLabel::E1 => (788.0, 806.0),
            PeakLabel::E2 => (766.0, 786.0),
            PeakLabel::A1 => (944.0, 984.0),
        }
    }
}

impl std::fmt::Display for PeakLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PeakLabel::E1 => "E1(TO)",
            PeakLabel::E2 => "E2(TO)",
            PeakLabel::A1 => "A1(LO)",
        })
    }
}

impl std::str::FromStr for PeakLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "E1" | "E1(TO)" => Ok(PeakLabel::E1),
            "E2" | "E2(TO)" => Ok(PeakLabel::E2),
            "A1" | "A1(LO)" => Ok(PeakLabel::A1),
            _ => Err(format!("unknown peak label {s:?} (E1, E2, A1)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamanSpectrum {
    /// cm⁻¹, strictly increasing.
    pub wavenumber: Vec<f64>,
    pub counts: Vec<f64>,
    /// Scan position (x, y) in µm.
    pub position: Option<(f64, f64)>,
}

impl RamanSpectrum {
    pub fn new(wavenumber: Vec<f64>, counts: Vec<f64>, position: Option<(f64, f64)>) -> Result<Self, RamanError> {
        if wavenumber.len() != counts.len() {
            return Err(RamanError::InvalidSpectrum(format!(
                "{} wavenumbers but {} counts",
                wavenumber.len(),
                counts.len()
            )));
        }
        if let Some(k) = wavenumber.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(RamanError::InvalidSpectrum(format!("wavenumbers not strictly increasing at row {}", k + 1)));
        }
        if let Some(k) = counts.iter().position(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(RamanError::InvalidSpectrum(format!("negative or non-finite count at row {k}")));
        }
        Ok(Self { wavenumber, counts, position })
    }
}

/// Phonon deformation potentials, cm⁻¹/GPa.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformationPotentials {
    pub a_e1: f64,
    pub b_e1: f64,
    pub a_e2: f64,
    pub b_e2: f64,
    pub a_a1: f64,
    pub b_a1: f64,
}

impl Default for DeformationPotentials {
    fn default() -> Self {
        Self { a_e1: -2.06, b_e1: -0.43, a_e2: -1.55, b_e2: -0.74, a_a1: -1.124, b_a1: -0.651 }
    }
}

impl DeformationPotentials {
    /// Rows `(2a, b)` acting on `(σ_perp, σ_para)`, in E1, E2, A1 order.
    fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(2.0 * self.a_e1, self.b_e1, 0.0, 2.0 * self.a_e2, self.b_e2, 0.0, 2.0 * self.a_a1, self.b_a1, 0.0)
    }
}

/// Elastic stiffness constants, GPa.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StiffnessConstants {
    pub c11: f64,
    pub c12: f64,
    pub c13: f64,
    pub c33: f64,
}

impl Default for StiffnessConstants {
    fn default() -> Self {
        Self { c11: 501.0, c12: 111.0, c13: 52.0, c33: 553.0 }
    }
}

impl StiffnessConstants {
    pub fn validate(&self) -> Result<(), RamanError> {
        let all = [self.c11, self.c12, self.c13, self.c33];
        if !all.iter().all(|c| c.is_finite() && *c > 0.0) {
            return Err(RamanError::InvalidConstants(format!("stiffness constants must be positive: {all:?}")));
        }
        let (d_perp, d_para) = self.denominators();
        if d_perp.abs() < 1e-9 || d_para.abs() < 1e-9 {
            return Err(RamanError::InvalidConstants("vanishing stress-strain denominator".into()));
        }
        Ok(())
    }

    fn denominators(&self) -> (f64, f64) {
        (
            self.c11 * self.c33 + self.c12 * self.c33 - self.c13 * self.c13,
            2.0 * self.c13 * self.c13 - self.c33 * (self.c11 + self.c12),
        )
    }

    /// `(ε_perp, ε_para) = M (σ_perp, σ_para)`.
    fn compliance(&self) -> Matrix2<f64> {
        let (d_perp, d_para) = self.denominators();
        let c1112 = self.c11 + self.c12;
        Matrix2::new(self.c33 / d_perp, -self.c13 / d_perp, 2.0 * self.c13 / d_para, -c1112 / d_para)
    }
}

/// Stress in GPa with 1σ uncertainties.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StressState {
    pub para: Estimate,
    pub perp: Estimate,
}

/// Dimensionless strain with 1σ uncertainties.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StrainState {
    pub para: Estimate,
    pub perp: Estimate,
}

/// `Δν = ν_sample - ν_reference`, uncertainties in quadrature.
pub fn shifts_from_reference(fit: &PeakFit, reference: &PeakFit) -> Result<Estimate, RamanError> {
    if fit.label != reference.label {
        return Err(RamanError::LabelMismatch(fit.label, reference.label));
    }
    Ok(Estimate::new(fit.center.value - reference.center.value, fit.center.sigma.hypot(reference.center.sigma)))
}

/// `(Δν_E1, Δν_E2, Δν_A1)` in cm⁻¹ for a stress state in GPa.
pub fn forward_shifts(para: f64, perp: f64, potentials: &DeformationPotentials) -> [f64; 3] {
    let v = potentials.matrix() * Vector3::new(perp, para, 0.0);
    [v[0], v[1], v[2]]
}

/// Peak shifts of one spectrum; `a1` may be absent (two-peak mode).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakShifts {
    pub e1: Estimate,
    pub e2: Estimate,
    pub a1: Option<Estimate>,
}

impl PeakShifts {
    pub fn exact(shifts: [f64; 3]) -> Self {
        Self { e1: Estimate::exact(shifts[0]), e2: Estimate::exact(shifts[1]), a1: Some(Estimate::exact(shifts[2])) }
    }
}

/// Stress from peak shifts, averaging the pairwise 2×2 solutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressSolution {
    pub stress: StressState,
    /// `(σ_para, σ_perp)` from each pair, in (E1,E2), (E1,A1), (E2,A1) order.
    pub pairwise: Vec<(f64, f64)>,
    /// Propagated 1σ of `(σ_para, σ_perp)`.
    pub propagated: (f64, f64),
    /// Sample standard deviation of the pairwise solutions.
    pub spread: (f64, f64),
}

const PAIR_NAMES: [&str; 3] = ["E1/E2", "E1/A1", "E2/A1"];

/// Invert the shift equations: every available pair of peaks gives a 2×2
/// system; solutions are averaged and the uncertainty is the larger of the
/// propagated and the inter-pair spread.
pub fn shifts_to_stress(shifts: &PeakShifts, potentials: &DeformationPotentials) -> Result<StressSolution, RamanError> {
    let full = potentials.matrix();
    let pairs: &[(usize, usize)] = if shifts.a1.is_some() { &[(0, 1), (0, 2), (1, 2)] } else { &[(0, 1)] };
    let values = Vector3::new(shifts.e1.value, shifts.e2.value, shifts.a1.map_or(0.0, |e| e.value));
    let sigmas = [shifts.e1.sigma, shifts.e2.sigma, shifts.a1.map_or(0.0, |e| e.sigma)];

    // Averaged solution as a linear map of the three shifts.
    let mut map = Matrix2x3::zeros();
    let mut pairwise = Vec::with_capacity(pairs.len());
    for (k, &(i, j)) in pairs.iter().enumerate() {
        let m = Matrix2::new(full[(i, 0)], full[(i, 1)], full[(j, 0)], full[(j, 1)]);
        let scale = full.row(i).norm() * full.row(j).norm();
        if m.determinant().abs() < 1e-12 * scale {
            let name = if pairs.len() == 1 { PAIR_NAMES[0] } else { PAIR_NAMES[k] };
            return Err(RamanError::DegenerateSystem(name.to_string()));
        }
        let inv = m.try_inverse().expect("determinant checked");
        let s = inv * Vector2::new(values[i], values[j]);
        pairwise.push((s[1], s[0]));
        for r in 0..2 {
            map[(r, i)] += inv[(r, 0)] / pairs.len() as f64;
            map[(r, j)] += inv[(r, 1)] / pairs.len() as f64;
        }
    }
    let mean = map * values;
    let prop = |r: usize| (0..3).map(|c| (map[(r, c)] * sigmas[c]).powi(2)).sum::<f64>().sqrt();
    let propagated = (prop(1), prop(0));
    let spread = if pairwise.len() > 1 {
        let sd = |f: &dyn Fn(&(f64, f64)) -> f64, m: f64| {
            (pairwise.iter().map(|p| (f(p) - m).powi(2)).sum::<f64>() / (pairwise.len() - 1) as f64).sqrt()
        };
        (sd(&|p| p.0, mean[1]), sd(&|p| p.1, mean[0]))
    } else {
        (0.0, 0.0)
    };
    Ok(StressSolution {
        stress: StressState {
            para: Estimate::new(mean[1], propagated.0.max(spread.0)),
            perp: Estimate::new(mean[0], propagated.1.max(spread.1)),
        },
        pairwise,
        propagated,
        spread,
    })
}

/// Strain from stress with the stress-strain relations
/// `ε_perp = (C33 σ_perp - C13 σ_para) / (C11 C33 + C12 C33 - C13²)` and
/// `ε_para = (2 C13 σ_perp - (C11 + C12) σ_para) / (2 C13² - C33 (C11 + C12))`.
pub fn stress_to_strain(stress: &StressState, c: &StiffnessConstants) -> Result<StrainState, RamanError> {
    c.validate()?;
    let m = c.compliance();
    let s = Vector2::new(stress.perp.value, stress.para.value);
    let e = m * s;
    let sig = |r: usize| ((m[(r, 0)] * stress.perp.sigma).powi(2) + (m[(r, 1)] * stress.para.sigma).powi(2)).sqrt();
    Ok(StrainState { perp: Estimate::new(e[0], sig(0)), para: Estimate::new(e[1], sig(1)) })
}

/// Linear inverse of [`stress_to_strain`] (values only), GPa.
pub fn strain_to_stress(para: f64, perp: f64, c: &StiffnessConstants) -> Result<(f64, f64), RamanError> {
    c.validate()?;
    let inv = c.compliance().try_inverse().ok_or_else(|| RamanError::InvalidConstants("singular compliance".into()))?;
    let s = inv * Vector2::new(perp, para);
    Ok((s[1], s[0]))
}

/// A1(LO) potentials fitted from E1/E2-derived stresses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct A1Constants {
    pub a: Estimate,
    pub b: Estimate,
    /// Root-sum-square residual of the A1 shifts, cm⁻¹.
    pub residual: f64,
}

/// For each `(Δν_E1, Δν_E2, Δν_A1)` solve the stress from the E pair, then
/// least-squares fit `Δν_A1 = 2a σ_perp + b σ_para`.
pub fn derive_a1_constants(
    datasets: &[[f64; 3]],
    potentials: &DeformationPotentials,
) -> Result<A1Constants, RamanError> {
    if datasets.len() < 2 {
        return Err(RamanError::RankDeficient);
    }
    let n = datasets.len();
    let mut design = nalgebra::DMatrix::zeros(n, 2);
    let mut rhs = nalgebra::DVector::zeros(n);
    for (k, d) in datasets.iter().enumerate() {
        let shifts = PeakShifts { e1: Estimate::exact(d[0]), e2: Estimate::exact(d[1]), a1: None };
        let s = shifts_to_stress(&shifts, potentials)?.stress;
        design[(k, 0)] = 2.0 * s.perp.value;
        design[(k, 1)] = s.para.value;
        rhs[k] = d[2];
    }
    let svd = design.clone().svd(true, true);
    let (smax, smin) = (svd.singular_values.max(), svd.singular_values.min());
    if !(smin > 1e-10 * smax) {
        return Err(RamanError::RankDeficient);
    }
    let coef = svd.solve(&rhs, 0.0).map_err(|_| RamanError::RankDeficient)?;
    let residual = (&design * &coef - &rhs).norm();
    let cov = (design.transpose() * &design).try_inverse().ok_or(RamanError::RankDeficient)?;
    let s2 = if n > 2 { residual * residual / (n - 2) as f64 } else { 0.0 };
    Ok(A1Constants {
        a: Estimate::new(coef[0], (s2 * cov[(0, 0)]).sqrt()),
        b: Estimate::new(coef[1], (s2 * cov[(1, 1)]).sqrt()),
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forward_examples() {
        let p = DeformationPotentials::default();
        assert_eq!(forward_shifts(0.0, 0.0, &p), [0.0; 3]);
        let s = forward_shifts(0.0, -1.0, &p);
        assert!((s[0] - 4.12).abs() < 1e-12 && (s[1] - 3.10).abs() < 1e-12);
        let s = forward_shifts(-1.0, 0.0, &p);
        assert!((s[0] - 0.43).abs() < 1e-12 && (s[1] - 0.74).abs() < 1e-12);
    }

    #[test]
    fn consistent_shifts_collapse_spread() {
        let p = DeformationPotentials::default();
        let sol = shifts_to_stress(&PeakShifts::exact(forward_shifts(-0.5, -1.0, &p)), &p).unwrap();
        assert!((sol.stress.para.value + 0.5).abs() < 1e-12);
        assert!((sol.stress.perp.value + 1.0).abs() < 1e-12);
        assert!(sol.spread.0 < 1e-12 && sol.spread.1 < 1e-12);
        assert_eq!(sol.stress.para.sigma, sol.spread.0.max(0.0));
        let zero = shifts_to_stress(&PeakShifts::exact([0.0; 3]), &p).unwrap();
        assert_eq!((zero.stress.para.value, zero.stress.perp.value), (0.0, 0.0));
    }

    #[test]
    fn degenerate_pair_is_named() {
        let p = DeformationPotentials { a_a1: -2.06, b_a1: -0.43, ..Default::default() };
        let err = shifts_to_stress(&PeakShifts::exact([1.0, 1.0, 1.0]), &p).unwrap_err();
        assert_eq!(err, RamanError::DegenerateSystem("E1/A1".into()));
    }

    #[test]
    fn hand_evaluated_strain() {
        // σ_perp = -1 GPa: ε_perp = -553 / (501·553 + 111·553 - 52²),
        // ε_para = -104 / (2·52² - 553·612).
        let c = StiffnessConstants::default();
        let st = StressState { para: Estimate::exact(0.0), perp: Estimate::exact(-1.0) };
        let e = stress_to_strain(&st, &c).unwrap();
        assert!((e.perp.value - (-553.0 / 335_732.0)).abs() < 1e-15);
        assert!((e.para.value - (-104.0 / -333_028.0)).abs() < 1e-15);
        let (para, perp) = strain_to_stress(e.para.value, e.perp.value, &c).unwrap();
        assert!(para.abs() < 1e-12 && (perp + 1.0).abs() < 1e-12);
    }

    #[test]
    fn shift_uncertainty_in_quadrature() {
        let mk = |c: f64, s: f64| PeakFit::synthetic(PeakLabel::E2, c, s);
        let d = shifts_from_reference(&mk(778.1, 0.03), &mk(776.5, 0.04)).unwrap();
        assert!((d.value - 1.6).abs() < 1e-9 && (d.sigma - 0.05).abs() < 1e-12);
        assert!(shifts_from_reference(&PeakFit::synthetic(PeakLabel::E1, 0.0, 0.0), &mk(0.0, 0.0)).is_err());
    }

    #[test]
    fn a1_needs_two_independent_states() {
        let p = DeformationPotentials::default();
        let one = forward_shifts(-0.3, -0.8, &p);
        assert_eq!(derive_a1_constants(&[one], &p), Err(RamanError::RankDeficient));
        let two = forward_shifts(-0.6, -1.6, &p);
        assert_eq!(derive_a1_constants(&[one, two], &p), Err(RamanError::RankDeficient));
    }
}
