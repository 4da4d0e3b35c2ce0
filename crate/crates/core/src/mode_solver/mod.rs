//! Guided modes of triangular nanobeam cross-sections.
//!
//! Cross-sections are rasterized onto a uniform grid and the transverse
//! Helmholtz operator is discretized with five-point finite differences. Modes
//! are the eigenvectors whose `n_eff` lies between the cladding and core
//! indices, found by shift-invert Arnoldi with the shift at the core index.

mod coupling;
pub mod eigen;
mod geometry;
mod grid;
mod index;
mod operator;
mod transmission;
mod vector;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use coupling::{dipole_coupling_map, CouplingMap};
pub use eigen::ArnoldiSettings;
pub use geometry::{CrossSectionGeometry, Inclusion, Shape};
pub use grid::{
    rasterize, rasterize_cross_section, rasterize_in_window, rasterize_slab, DielectricGrid, EdgeCondition,
    RasterOptions,
};
pub use index::IndexModel;
pub use operator::{Polarization, Stencil};
pub use transmission::{weighted_transmission, Curve};
pub use vector::{solve_vector_modes, VectorGrid, VectorMode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModeError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid wavelength {0} m")]
    InvalidWavelength(f64),
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
    #[error("eigensolver did not converge within {budget} restarts (best residual {residual:.3e})")]
    NotConverged { residual: f64, budget: usize },
    #[error("no guided mode at this geometry and wavelength")]
    NoGuidedMode,
}

/// Placement of a field on its grid (everything but the permittivity).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridFrame {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub y0: f64,
}

impl GridFrame {
    pub fn x_center(&self, i: usize) -> f64 {
        (i as f64 - (self.nx as f64 - 1.0) / 2.0) * self.dx
    }

    pub fn y_center(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.dy
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }
}

impl DielectricGrid {
    pub fn frame(&self) -> GridFrame {
        GridFrame { nx: self.nx, ny: self.ny, dx: self.dx, dy: self.dy, y0: self.y0 }
    }
}

/// One guided eigenmode.
///
/// The field holds the dominant transverse component (real-valued) and is
/// normalized to unit discrete power, `sum |e|^2 dx dy = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuidedMode {
    pub n_eff: f64,
    pub wavelength: f64,
    pub polarization: Polarization,
    pub frame: GridFrame,
    pub field: Vec<f64>,
    /// Largest |e| on the outer ring of cells relative to the peak |e|.
    pub boundary_ratio: f64,
    /// `false` when the field has not decayed below the floor at the edge.
    pub decayed: bool,
}

impl GuidedMode {
    pub fn propagation_constant(&self) -> f64 {
        2.0 * PI * self.n_eff / self.wavelength
    }

    /// Discrete overlap `sum e_a e_b dA` with another mode on the same grid.
    pub fn overlap(&self, other: &GuidedMode) -> f64 {
        eigen::dot(&self.field, &other.field) * self.frame.cell_area()
    }

    pub fn power(&self) -> f64 {
        self.overlap(self)
    }

    pub fn value_at(&self, i: usize, j: usize) -> f64 {
        self.field[j * self.frame.nx + i]
    }

    /// Cell index of the peak |e|.
    pub fn peak_cell(&self) -> (usize, usize) {
        let k = self.field.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).map_or(0, |(k, _)| k);
        (k % self.frame.nx, k / self.frame.nx)
    }
}

/// Settings of a single eigensolve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub polarization: Polarization,
    pub decay_floor: f64,
    /// Arnoldi restarts before reporting non-convergence.
    pub max_restarts: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            polarization: Polarization::default(),
            decay_floor: 0.05,
            max_restarts: ArnoldiSettings::default().max_restarts,
        }
    }
}

/// Solve for up to `count` guided modes, highest `n_eff` first.
///
/// An empty list means nothing is guided; it is not an error.
pub fn solve_modes(
    grid: &DielectricGrid,
    wavelength: f64,
    count: usize,
    options: &SolveOptions,
) -> Result<Vec<GuidedMode>, ModeError> {
    solve_modes_from(grid, wavelength, count, options, None)
}

/// As [`solve_modes`], seeding the eigensolver with `start` (typically the
/// sum of the modes of a neighbouring cross-section on the same grid).
///
/// A seeded solve checks convergence early, so modes that the seed does not
/// excite may be missed; use it for continuation, not for mode counting.
pub fn solve_modes_from(
    grid: &DielectricGrid,
    wavelength: f64,
    count: usize,
    options: &SolveOptions,
    start: Option<&[f64]>,
) -> Result<Vec<GuidedMode>, ModeError> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(ModeError::InvalidWavelength(wavelength));
    }
    grid.validate()?;
    if count == 0 {
        return Ok(Vec::new());
    }
    let k0 = 2.0 * PI / wavelength;
    let eps_max = grid.max_eps();
    let eps_clad = grid.cladding_eps;
    if eps_max <= eps_clad {
        return Ok(Vec::new());
    }
    let stencil = Stencil::assemble(grid, k0, options.polarization);
    let shift = k0 * k0 * eps_max;
    let floor = k0 * k0 * eps_clad;
    let mut settings = ArnoldiSettings { max_restarts: options.max_restarts, ..ArnoldiSettings::default() };
    settings.initial_dim = settings.initial_dim.max(2 * count + 20);
    settings.min_dim = match start {
        Some(_) => (2 * count + 8).min(settings.initial_dim),
        None => settings.initial_dim,
    };
    let pairs = eigen::eigenpairs_above_from(&stencil.to_matrix(), shift, floor, count, &settings, start)?;

    let frame = grid.frame();
    let area = frame.cell_area();
    let mut modes: Vec<GuidedMode> = pairs
        .into_iter()
        .filter_map(|pair| {
            let n_eff = pair.value.sqrt() / k0;
            if !(n_eff > eps_clad.sqrt() && n_eff < eps_max.sqrt()) {
                return None;
            }
            let mut field = pair.vector;
            normalize_field(&mut field, area);
            let boundary_ratio = boundary_ratio(&field, &frame, grid.x_edges);
            Some(GuidedMode {
                n_eff,
                wavelength,
                polarization: options.polarization,
                frame,
                field,
                boundary_ratio,
                decayed: boundary_ratio <= options.decay_floor,
            })
        })
        .collect();
    modes.sort_by(|a, b| b.n_eff.total_cmp(&a.n_eff));
    modes.truncate(count);
    Ok(modes)
}

/// Unit discrete power with the largest-magnitude sample made positive.
pub(crate) fn normalize_field(field: &mut [f64], area: f64) {
    let norm = (eigen::dot(field, field) * area).sqrt();
    let peak = field.iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap_or(1.0);
    let scale = peak.signum() / norm;
    field.iter_mut().for_each(|v| *v *= scale);
}

fn boundary_ratio(field: &[f64], frame: &GridFrame, x_edges: EdgeCondition) -> f64 {
    let peak = field.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    let (nx, ny) = (frame.nx, frame.ny);
    let mut edge = 0.0f64;
    for i in 0..nx {
        edge = edge.max(field[i].abs()).max(field[(ny - 1) * nx + i].abs());
    }
    if x_edges == EdgeCondition::Zero {
        for j in 0..ny {
            edge = edge.max(field[j * nx].abs()).max(field[j * nx + nx - 1].abs());
        }
    }
    edge / peak
}

/// Grid and solver settings shared by the geometry-level operations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSolverConfig {
    pub spacing: f64,
    /// Vacuum margin; `None` uses one vacuum wavelength.
    pub margin: Option<f64>,
    pub subsamples: u32,
    pub max_modes: usize,
    /// Modes closer than this in `n_eff` count as one family.
    pub degeneracy_tol: f64,
    pub solve: SolveOptions,
}

impl Default for ModeSolverConfig {
    fn default() -> Self {
        Self {
            spacing: 10e-9,
            margin: None,
            subsamples: 8,
            max_modes: 6,
            degeneracy_tol: 1e-4,
            solve: SolveOptions::default(),
        }
    }
}

impl ModeSolverConfig {
    pub fn raster_options(&self, wavelength: f64) -> RasterOptions {
        RasterOptions { spacing: self.spacing, margin: self.margin.unwrap_or(wavelength), subsamples: self.subsamples }
    }
}

/// Guided modes of a nanobeam cross-section at one wavelength.
pub fn solve_cross_section(
    geometry: &CrossSectionGeometry,
    wavelength: f64,
    config: &ModeSolverConfig,
) -> Result<Vec<GuidedMode>, ModeError> {
    let grid = rasterize_cross_section(geometry, wavelength, &config.raster_options(wavelength))?;
    solve_modes(&grid, wavelength, config.max_modes, &config.solve)
}

/// Number of distinct, decayed guided mode families.
pub fn count_guided_modes(
    geometry: &CrossSectionGeometry,
    wavelength: f64,
    config: &ModeSolverConfig,
) -> Result<usize, ModeError> {
    let modes = solve_cross_section(geometry, wavelength, config)?;
    Ok(count_families(&modes, config.degeneracy_tol))
}

/// Count decayed modes, merging neighbours within `tol` in `n_eff`.
pub fn count_families(modes: &[GuidedMode], tol: f64) -> usize {
    let mut n_effs: Vec<f64> = modes.iter().filter(|m| m.decayed).map(|m| m.n_eff).collect();
    n_effs.sort_by(|a, b| b.total_cmp(a));
    let mut families = 0;
    let mut last = f64::INFINITY;
    for n in n_effs {
        if (last - n).abs() >= tol {
            families += 1;
        }
        last = n;
    }
    families
}
