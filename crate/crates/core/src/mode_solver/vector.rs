//! Full-vectorial modes on a Yee-staggered grid.
//!
//! Unknowns are the transverse magnetic field `(H_x, H_y)`; eliminating `E_z`
//! and `H_z` (the latter through `div H = 0`) leaves
//!
//! ```text
//! b^2 Hx = [k^2 ey + dx dx + ey dy ez^-1 dy] Hx + [dx dy - ey dy ez^-1 dx] Hy
//! b^2 Hy = [dy dx - ex dx ez^-1 dy] Hx + [k^2 ex + dy dy + ex dx ez^-1 dx] Hy
//! ```
//!
//! Node `(i, j)` carries `E_z`; `E_x, H_y` sit half a cell east of it and
//! `E_y, H_x` half a cell north. Fields vanish outside the window.

use std::f64::consts::PI;

use faer::sparse::{SparseColMat, Triplet};
use serde::{Deserialize, Serialize};

use super::eigen::{self, ArnoldiSettings};
use super::geometry::Inclusion;
use super::grid::{cell_average, point_sampler, DielectricGrid};
use super::{GridFrame, ModeError};

/// Component-wise permittivities on the staggered grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorGrid {
    pub frame: GridFrame,
    /// At the `E_x` sites: harmonic mean along x, arithmetic along y.
    pub eps_x: Vec<f64>,
    /// At the `E_y` sites: harmonic mean along y, arithmetic along x.
    pub eps_y: Vec<f64>,
    /// At the nodes: arithmetic mean.
    pub eps_z: Vec<f64>,
    pub cladding_eps: f64,
}

impl VectorGrid {
    /// Re-rasterize `inclusions` on the window of an existing node grid.
    pub fn on_window_of(grid: &DielectricGrid, inclusions: &[Inclusion], subsamples: u32) -> Result<Self, ModeError> {
        grid.validate()?;
        let frame = grid.frame();
        let background = grid.cladding_eps;
        let eps_of = point_sampler(inclusions, background);
        let cell = |x: f64, y: f64| cell_average(&eps_of, x, y, frame.dx, frame.dy, subsamples);
        let n = frame.nx * frame.ny;
        let (mut eps_x, mut eps_y, mut eps_z) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for j in 0..frame.ny {
            let y = frame.y_center(j);
            for i in 0..frame.nx {
                let x = frame.x_center(i);
                let p = j * frame.nx + i;
                eps_z[p] = cell(x, y)[0];
                eps_x[p] = cell(x + frame.dx / 2.0, y)[1];
                eps_y[p] = cell(x, y + frame.dy / 2.0)[2];
            }
        }
        Ok(Self { frame, eps_x, eps_y, eps_z, cladding_eps: background })
    }

    pub fn max_eps(&self) -> f64 {
        self.eps_z.iter().chain(&self.eps_x).chain(&self.eps_y).copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Operator on `[Hx; Hy]` whose eigenvalues are `beta^2`.
    pub fn operator(&self, k0: f64) -> SparseColMat<usize, f64> {
        let GridFrame { nx, ny, dx, dy, .. } = self.frame;
        let n = nx * ny;
        let (hx, hy) = (1.0 / dx, 1.0 / dy);
        let k2 = k0 * k0;
        let (ex, ey, ez) = (&self.eps_x, &self.eps_y, &self.eps_z);
        let mut t: Vec<Triplet<usize, usize, f64>> = Vec::with_capacity(18 * n);
        let mut push = |r: usize, c: usize, v: f64| {
            if v != 0.0 {
                t.push(Triplet::new(r, c, v));
            }
        };
        let at = |i: usize, j: usize| j * nx + i;
        for j in 0..ny {
            for i in 0..nx {
                let p = at(i, j);
                let (west, east) = (i >= 1, i + 1 < nx);
                let (south, north) = (j >= 1, j + 1 < ny);
                let (rx, ry) = (p, n + p);

                // Hx row
                let e = ey[p];
                let mut diag = k2 * e - hx * hx - e * hy * hy / ez[p];
                if east {
                    push(rx, at(i + 1, j), hx * hx);
                }
                if west {
                    diag -= hx * hx;
                    push(rx, at(i - 1, j), hx * hx);
                }
                if north {
                    let c = e * hy * hy / ez[at(i, j + 1)];
                    push(rx, at(i, j + 1), c);
                    diag -= c;
                }
                if south {
                    push(rx, at(i, j - 1), e * hy * hy / ez[p]);
                }
                push(rx, p, diag);
                let hxy = hx * hy;
                let own = -hxy + e * hxy / ez[p];
                if north {
                    let zn = ez[at(i, j + 1)];
                    push(rx, n + at(i, j + 1), hxy - e * hxy / zn);
                    if west {
                        push(rx, n + at(i - 1, j + 1), -hxy + e * hxy / zn);
                    }
                }
                if west {
                    push(rx, n + at(i - 1, j), hxy - e * hxy / ez[p]);
                }
                push(rx, n + p, own);

                // Hy row
                let e = ex[p];
                let mut diag = k2 * e - hy * hy - e * hx * hx / ez[p];
                if north {
                    push(ry, n + at(i, j + 1), hy * hy);
                }
                if south {
                    diag -= hy * hy;
                    push(ry, n + at(i, j - 1), hy * hy);
                }
                if east {
                    let c = e * hx * hx / ez[at(i + 1, j)];
                    push(ry, n + at(i + 1, j), c);
                    diag -= c;
                }
                if west {
                    push(ry, n + at(i - 1, j), e * hx * hx / ez[p]);
                }
                push(ry, n + p, diag);
                push(ry, p, -hxy + e * hxy / ez[p]);
                if east {
                    let ze = ez[at(i + 1, j)];
                    push(ry, at(i + 1, j), hxy - e * hxy / ze);
                    if south {
                        push(ry, at(i + 1, j - 1), -hxy + e * hxy / ze);
                    }
                }
                if south {
                    push(ry, at(i, j - 1), hxy - e * hxy / ez[p]);
                }
            }
        }
        SparseColMat::try_new_from_triplets(2 * n, 2 * n, &t).expect("indices are in range")
    }
}

/// One full-vectorial guided mode, normalized to unit power
/// `sum (Ex Hy - Ey Hx) dA = 1` (H in units of the vacuum impedance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorMode {
    pub n_eff: f64,
    pub wavelength: f64,
    pub frame: GridFrame,
    pub hx: Vec<f64>,
    pub hy: Vec<f64>,
    /// `E_x` at its staggered sites.
    pub ex: Vec<f64>,
    /// `E_y` at its staggered sites.
    pub ey: Vec<f64>,
}

impl VectorMode {
    /// `(E_x, E_y)` interpolated onto node `(i, j)`.
    pub fn transverse_e_at_node(&self, i: usize, j: usize) -> (f64, f64) {
        let nx = self.frame.nx;
        let p = j * nx + i;
        let ex_w = if i >= 1 { self.ex[p - 1] } else { 0.0 };
        let ey_s = if j >= 1 { self.ey[p - nx] } else { 0.0 };
        (0.5 * (self.ex[p] + ex_w), 0.5 * (self.ey[p] + ey_s))
    }

    /// Fraction of `sum |E_t|^2` carried by `E_y`.
    pub fn ey_fraction(&self) -> f64 {
        let sx: f64 = self.ex.iter().map(|v| v * v).sum();
        let sy: f64 = self.ey.iter().map(|v| v * v).sum();
        sy / (sx + sy)
    }
}

/// Up to `count` full-vectorial guided modes, highest `n_eff` first.
pub fn solve_vector_modes(grid: &VectorGrid, wavelength: f64, count: usize) -> Result<Vec<VectorMode>, ModeError> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(ModeError::InvalidWavelength(wavelength));
    }
    let k0 = 2.0 * PI / wavelength;
    let eps_max = grid.max_eps();
    if count == 0 || eps_max <= grid.cladding_eps {
        return Ok(Vec::new());
    }
    let op = grid.operator(k0);
    let mut settings = ArnoldiSettings::default();
    settings.initial_dim = settings.initial_dim.max(2 * count + 20);
    let pairs = eigen::eigenpairs_above(&op, k0 * k0 * eps_max, k0 * k0 * grid.cladding_eps, count, &settings)?;
    let n = grid.frame.nx * grid.frame.ny;
    let mut modes: Vec<VectorMode> = pairs
        .into_iter()
        .filter_map(|pair| {
            let n_eff = pair.value.sqrt() / k0;
            if !(n_eff > grid.cladding_eps.sqrt() && n_eff < eps_max.sqrt()) {
                return None;
            }
            let (hx, hy) = pair.vector.split_at(n);
            Some(electric_field(grid, k0, pair.value.sqrt(), hx.to_vec(), hy.to_vec(), wavelength, n_eff))
        })
        .collect();
    modes.sort_by(|a, b| b.n_eff.total_cmp(&a.n_eff));
    modes.truncate(count);
    Ok(modes)
}

/// `E_x, E_y` from `H` via Ampere's law with `H_z = (i/beta) div_t H`.
fn electric_field(
    grid: &VectorGrid,
    k0: f64,
    beta: f64,
    mut hx: Vec<f64>,
    mut hy: Vec<f64>,
    wavelength: f64,
    n_eff: f64,
) -> VectorMode {
    let GridFrame { nx, ny, dx, dy, .. } = grid.frame;
    let at = |i: usize, j: usize| j * nx + i;
    // div_t H at the H_z sites (i + 1/2, j + 1/2)
    let mut div = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let hx_e = if i + 1 < nx { hx[at(i + 1, j)] } else { 0.0 };
            let hy_n = if j + 1 < ny { hy[at(i, j + 1)] } else { 0.0 };
            div[at(i, j)] = (hx_e - hx[at(i, j)]) / dx + (hy_n - hy[at(i, j)]) / dy;
        }
    }
    let mut ex = vec![0.0; nx * ny];
    let mut ey = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let p = at(i, j);
            let div_s = if j >= 1 { div[at(i, j - 1)] } else { 0.0 };
            let div_w = if i >= 1 { div[at(i - 1, j)] } else { 0.0 };
            ex[p] = (beta * hy[p] - (div[p] - div_s) / (dy * beta)) / (k0 * grid.eps_x[p]);
            ey[p] = (-beta * hx[p] + (div[p] - div_w) / (dx * beta)) / (k0 * grid.eps_y[p]);
        }
    }
    let area = dx * dy;
    let power: f64 = (0..nx * ny).map(|p| ex[p] * hy[p] - ey[p] * hx[p]).sum::<f64>() * area;
    // Sign convention: the dominant E component is positive at its peak.
    let peak = ex.iter().chain(&ey).copied().max_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap_or(1.0);
    let scale = peak.signum() / power.abs().sqrt();
    for v in ex.iter_mut().chain(ey.iter_mut()).chain(hx.iter_mut()).chain(hy.iter_mut()) {
        *v *= scale;
    }
    VectorMode { n_eff, wavelength, frame: grid.frame, hx, hy, ex, ey }
}
