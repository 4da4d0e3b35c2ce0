//! Spin-3/2 ground state of the silicon monovacancy: zero-field splitting,
//! strain coupling and Zeeman terms, and the ODMR lines they produce.
//!
//! `H = D (Sz² - 5/4) + Σ_αβ Ξ_αβ u_αβ {Sα Sβ} + γ_e B·S` in Hz, with
//! `Ξ_zz = Ξ_para`, every other component `Ξ_perp`, and `{Sα Sβ}` the
//! symmetrized product.

mod profile;

use nalgebra::{Complex, Matrix4, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use profile::{odmr_vs_position, StrainProfile, StrainRow};

pub type C64 = Complex<f64>;
pub type Mat4 = Matrix4<C64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpinError {
    #[error("invalid deformation tensor: {0}")]
    InvalidTensor(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty strain profile")]
    EmptyProfile,
}

/// Spin-3/2 matrices in the `m = +3/2, +1/2, -1/2, -3/2` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOperators {
    pub x: Mat4,
    pub y: Mat4,
    pub z: Mat4,
}

impl SpinOperators {
    pub fn new() -> Self {
        let m = [1.5, 0.5, -0.5, -1.5];
        // <m+1|S+|m> = sqrt(s(s+1) - m(m+1))
        let mut plus = Mat4::zeros();
        for k in 1..4 {
            let mk = m[k];
            plus[(k - 1, k)] = C64::new((15.0f64 / 4.0 - mk * (mk + 1.0)).sqrt(), 0.0);
        }
        let minus = plus.adjoint();
        let half = C64::new(0.5, 0.0);
        let x = (plus + minus) * half;
        let y = (plus - minus) * C64::new(0.0, -0.5);
        let z = Mat4::from_diagonal(&m.map(|v| C64::new(v, 0.0)).into());
        Self { x, y, z }
    }

    pub fn component(&self, axis: usize) -> &Mat4 {
        match axis {
            0 => &self.x,
            1 => &self.y,
            _ => &self.z,
        }
    }

    /// `(Sα Sβ + Sβ Sα) / 2`.
    pub fn sym_product(&self, a: usize, b: usize) -> Mat4 {
        let (sa, sb) = (self.component(a), self.component(b));
        (sa * sb + sb * sa) * C64::new(0.5, 0.0)
    }
}

impl Default for SpinOperators {
    fn default() -> Self {
        Self::new()
    }
}

/// Symmetric strain tensor, z along the crystal c-axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformationTensor(pub [[f64; 3]; 3]);

impl DeformationTensor {
    pub const LINEAR_LIMIT: f64 = 0.05;

    pub fn new(u: [[f64; 3]; 3]) -> Result<Self, SpinError> {
        let scale = u.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for a in 0..3 {
            for b in 0..a {
                if (u[a][b] - u[b][a]).abs() > 1e-12 * scale.max(1e-300) {
                    return Err(SpinError::InvalidTensor(format!("u[{a}][{b}] != u[{b}][{a}]")));
                }
            }
        }
        if !(scale < Self::LINEAR_LIMIT) {
            return Err(SpinError::InvalidTensor(format!(
                "|u| = {scale} outside the linear regime (< {})",
                Self::LINEAR_LIMIT
            )));
        }
        Ok(Self(u))
    }

    pub fn zero() -> Self {
        Self([[0.0; 3]; 3])
    }

    /// `diag(ε_perp, ε_perp, ε_para)`.
    pub fn uniaxial(eps_para: f64, eps_perp: f64) -> Result<Self, SpinError> {
        Self::new([[eps_perp, 0.0, 0.0], [0.0, eps_perp, 0.0], [0.0, 0.0, eps_para]])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundStateParams {
    /// Zero-field splitting parameter D, Hz (the splitting is 2D).
    pub d: f64,
    /// Hz per unit strain.
    pub xi_para: f64,
    pub xi_perp: f64,
    /// Electron gyromagnetic ratio, Hz/T.
    pub gamma_e: f64,
    /// ODMR shift per applied field, Hz per V/cm.
    pub stark: f64,
}

impl Default for GroundStateParams {
    fn default() -> Self {
        Self { d: 35e6, xi_para: 2.8e9, xi_perp: -1.9e9, gamma_e: 2.8e10, stark: 13.0 }
    }
}

impl GroundStateParams {
    pub fn validate(&self) -> Result<(), SpinError> {
        if !(self.d > 0.0) {
            return Err(SpinError::InvalidParameter(format!("D must be positive, got {}", self.d)));
        }
        Ok(())
    }

    pub fn coupling(&self, a: usize, b: usize) -> f64 {
        if a == 2 && b == 2 {
            self.xi_para
        } else {
            self.xi_perp
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    pub hamiltonian: Mat4,
    pub params: GroundStateParams,
    pub strain: DeformationTensor,
    /// Magnetic field, tesla.
    pub field: [f64; 3],
}

pub fn build_hamiltonian(
    params: &GroundStateParams,
    strain: &DeformationTensor,
    field: [f64; 3],
) -> Result<SpinSystem, SpinError> {
    params.validate()?;
    let s = SpinOperators::new();
    let re = |v: f64| C64::new(v, 0.0);
    let mut h = (s.z * s.z - Mat4::identity() * re(1.25)) * re(params.d);
    h += strain_term(params, strain, &s);
    for (axis, b) in field.iter().enumerate() {
        h += s.component(axis) * re(params.gamma_e * b);
    }
    Ok(SpinSystem { hamiltonian: h, params: *params, strain: *strain, field })
}

fn strain_term(params: &GroundStateParams, strain: &DeformationTensor, s: &SpinOperators) -> Mat4 {
    let mut h = Mat4::zeros();
    for a in 0..3 {
        for b in 0..3 {
            let c = params.coupling(a, b) * strain.0[a][b];
            if c != 0.0 {
                h += s.sym_product(a, b) * C64::new(c, 0.0);
            }
        }
    }
    h
}

/// Eigenvalues (ascending, Hz) and the `|m| = 3/2` weight of each eigenvector.
pub fn levels(system: &SpinSystem) -> ([f64; 4], [f64; 4]) {
    let eig = SymmetricEigen::new(system.hamiltonian);
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut values = [0.0; 4];
    let mut weights = [0.0; 4];
    for (k, &i) in order.iter().enumerate() {
        values[k] = eig.eigenvalues[i];
        let v = eig.eigenvectors.column(i);
        weights[k] = v[0].norm_sqr() + v[3].norm_sqr();
    }
    (values, weights)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    /// Index into the ascending eigenvalues of the `|m| = 3/2`-like level.
    pub outer: usize,
    /// Index of the `|m| = 1/2`-like level.
    pub inner: usize,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdmrLines {
    /// Distinct inter-manifold transition frequencies, ascending, Hz.
    pub frequencies: Vec<f64>,
    pub transitions: Vec<Transition>,
    /// Some level has more than 45 % admixture of the other manifold.
    pub ambiguous: bool,
}

/// Fraction of the minority manifold above which labels are flagged.
pub const MIXING_THRESHOLD: f64 = 0.45;

/// Transitions between the `|m| = 3/2`-like and `|m| = 1/2`-like levels.
///
/// The two levels with the largest `|m| = 3/2` character form the outer
/// manifold. Frequencies closer than `1e-9 D` are reported once.
pub fn odmr_frequencies(system: &SpinSystem) -> OdmrLines {
    let (values, weights) = levels(system);
    let mut by_weight = [0usize, 1, 2, 3];
    by_weight.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));
    let outer = [by_weight[0], by_weight[1]];
    let inner = [by_weight[2], by_weight[3]];
    let ambiguous = weights.iter().any(|&w| w.min(1.0 - w) > MIXING_THRESHOLD);

    let mut transitions = Vec::with_capacity(4);
    for &o in &outer {
        for &i in &inner {
            transitions.push(Transition { outer: o, inner: i, frequency: (values[o] - values[i]).abs() });
        }
    }
    let tol = 1e-9 * system.params.d.abs();
    let mut frequencies: Vec<f64> = transitions.iter().map(|t| t.frequency).collect();
    frequencies.sort_by(f64::total_cmp);
    frequencies.dedup_by(|a, b| (*a - *b).abs() <= tol);
    OdmrLines { frequencies, transitions, ambiguous }
}

/// ODMR shift under uniaxial strain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrainShift {
    /// From diagonalizing the Hamiltonian, Hz.
    pub shift: f64,
    /// `2 (Ξ_para ε_para - Ξ_perp ε_perp)`, Hz.
    pub closed_form: f64,
}

/// Shift of the zero-field ODMR line for `u = diag(ε_perp, ε_perp, ε_para)`.
///
/// The closed form is signed; the numerical shift is that of the observable
/// (positive) line and agrees while `2D` plus the closed form stays positive.
///
/// With `Sx² + Sy² = 15/4 - Sz²` the strain term is
/// `(Ξ_para ε_para - Ξ_perp ε_perp) Sz²` plus a constant, and `Sz²` differs by
/// 2 between the manifolds.
pub fn strain_shift(params: &GroundStateParams, eps_para: f64, eps_perp: f64) -> Result<StrainShift, SpinError> {
    let u = DeformationTensor::uniaxial(eps_para, eps_perp)?;
    let system = build_hamiltonian(params, &u, [0.0; 3])?;
    let (values, _) = levels(&system);
    // Two Kramers pairs; the line is the gap between their centres.
    let line = 0.5 * (values[2] + values[3]) - 0.5 * (values[0] + values[1]);
    Ok(StrainShift {
        shift: line - 2.0 * params.d,
        closed_form: 2.0 * (params.xi_para * eps_para - params.xi_perp * eps_perp),
    })
}

/// ODMR shift from an applied electric field (V/cm), `k_E E`.
pub fn stark_shift(params: &GroundStateParams, field_v_per_cm: f64) -> Result<f64, SpinError> {
    if !(field_v_per_cm >= 0.0) {
        return Err(SpinError::InvalidParameter(format!("electric field must be non-negative, got {field_v_per_cm}")));
    }
    Ok(params.stark * field_v_per_cm)
}
