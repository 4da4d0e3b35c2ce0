use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{
    rasterize_cross_section, solve_modes, CrossSectionGeometry, GridFrame, GuidedMode, ModeError, ModeSolverConfig,
    Polarization,
};

/// Single-direction coupling fraction of a point dipole at every grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingMap {
    pub frame: GridFrame,
    pub beta: Vec<f64>,
    /// Cells whose centre lies inside the core.
    pub core: Vec<bool>,
    pub wavelength: f64,
    /// Unit dipole orientation `(x, y, z)`, z along propagation.
    pub dipole: [f64; 3],
}

impl CouplingMap {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.beta[j * self.frame.nx + i]
    }

    /// Core cell of the largest coupling; ties resolve to the lowest index.
    ///
    /// Emitters live in the core. Air cells next to the top face carry a
    /// larger normal field and are excluded.
    pub fn argmax(&self) -> (usize, usize) {
        let best = (0..self.beta.len())
            .filter(|&k| self.core[k])
            .fold(None, |best: Option<usize>, k| match best {
                Some(b) if self.beta[b] >= self.beta[k] => Some(b),
                _ => Some(k),
            })
            .unwrap_or(0);
        (best % self.frame.nx, best / self.frame.nx)
    }

    /// Largest coupling over core cells.
    pub fn max(&self) -> f64 {
        let (i, j) = self.argmax();
        self.at(i, j)
    }

    /// Depth of a row below the top face (`y = 0`).
    pub fn depth(&self, j: usize) -> f64 {
        -self.frame.y_center(j)
    }

    /// Value at the nearest cell to `(x, y)`, if inside the grid.
    pub fn value_near(&self, x: f64, y: f64) -> Option<f64> {
        let fi = x / self.frame.dx + (self.frame.nx as f64 - 1.0) / 2.0;
        let fj = (y - self.frame.y0) / self.frame.dy;
        let (i, j) = (fi.round(), fj.round());
        if i < 0.0 || j < 0.0 || i >= self.frame.nx as f64 || j >= self.frame.ny as f64 {
            return None;
        }
        Some(self.at(i as usize, j as usize))
    }
}

/// Coupling of a dipole into one propagation direction of the fundamental mode.
///
/// For a unit-power field `e` with effective index `n_eff`, the emission rate
/// into one direction relative to the rate in bulk core material is
/// `3 lambda^2 |d.e(r)|^2 / (8 pi n_core n_eff)`, which already folds in the
/// scalar group index `n_g = <eps> / n_eff`. Each transverse dipole component
/// couples to the semi-vectorial mode polarized along it; the contributions
/// add incoherently. The longitudinal component does not couple.
pub fn dipole_coupling_map(
    geometry: &CrossSectionGeometry,
    wavelength: f64,
    dipole: [f64; 3],
    config: &ModeSolverConfig,
) -> Result<CouplingMap, ModeError> {
    let norm = dipole.iter().map(|d| d * d).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(ModeError::InvalidGeometry("dipole orientation must be non-zero".into()));
    }
    let d = dipole.map(|c| c / norm);
    let grid = rasterize_cross_section(geometry, wavelength, &config.raster_options(wavelength))?;
    let n_core = geometry.core_index.at(wavelength);
    let frame = grid.frame();
    let mut beta = vec![0.0; grid.len()];

    let components: [(f64, Polarization); 2] = match config.solve.polarization {
        Polarization::Scalar => [(d[0], Polarization::Scalar), (d[1], Polarization::Scalar)],
        _ => [(d[0], Polarization::QuasiTe), (d[1], Polarization::QuasiTm)],
    };
    let mut any = false;
    for (weight, polarization) in components {
        if weight == 0.0 {
            continue;
        }
        let options = super::SolveOptions { polarization, ..config.solve };
        let modes = solve_modes(&grid, wavelength, 1, &options)?;
        let fundamental: &GuidedMode = modes.first().ok_or(ModeError::NoGuidedMode)?;
        any = true;
        let prefactor = 3.0 * wavelength * wavelength / (8.0 * PI * n_core * fundamental.n_eff);
        for (b, e) in beta.iter_mut().zip(&fundamental.field) {
            *b += prefactor * (weight * e).powi(2);
        }
    }
    if !any {
        return Err(ModeError::NoGuidedMode);
    }
    let shape = geometry.as_shape();
    let core =
        (0..grid.len()).map(|k| shape.contains(frame.x_center(k % frame.nx), frame.y_center(k / frame.nx))).collect();
    Ok(CouplingMap { frame, beta, core, wavelength, dipole: d })
}
