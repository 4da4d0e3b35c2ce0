use faer::sparse::{SparseColMat, Triplet};
use serde::{Deserialize, Serialize};

use super::grid::{DielectricGrid, EdgeCondition};

/// Field component carried by the discretized operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Polarization {
    /// Scalar Helmholtz operator; no interface conditions.
    Scalar,
    /// Semi-vectorial, `E_x` dominant: permittivity-weighted derivatives along x.
    QuasiTe,
    /// Semi-vectorial, `E_y` dominant (normal to the top face).
    #[default]
    QuasiTm,
}

impl Polarization {
    pub fn name(self) -> &'static str {
        match self {
            Polarization::Scalar => "scalar",
            Polarization::QuasiTe => "quasi-te",
            Polarization::QuasiTm => "quasi-tm",
        }
    }
}

/// Five-point stencil of the transverse operator
/// `L e = (d2/dx2 + d2/dy2) e + k0^2 eps e`, whose eigenvalues are `beta^2`.
///
/// Along the weighted axis of a semi-vectorial operator the second derivative
/// becomes `d/ds (1/eps) d/ds (eps e)` with arithmetic-mean interface
/// permittivities. In the `k0^2 eps` term a semi-vectorial operator uses the
/// cell permittivity averaged harmonically along its field direction, which
/// keeps partially filled cells at an interface from biasing `n_eff`.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub nx: usize,
    pub ny: usize,
    pub diag: Vec<f64>,
    pub west: Vec<f64>,
    pub east: Vec<f64>,
    pub south: Vec<f64>,
    pub north: Vec<f64>,
}

impl Stencil {
    pub fn assemble(grid: &DielectricGrid, k0: f64, polarization: Polarization) -> Self {
        let (nx, ny) = (grid.nx, grid.ny);
        let n = nx * ny;
        let mut s = Stencil {
            nx,
            ny,
            diag: vec![0.0; n],
            west: vec![0.0; n],
            east: vec![0.0; n],
            south: vec![0.0; n],
            north: vec![0.0; n],
        };
        let (ix2, iy2) = (1.0 / (grid.dx * grid.dx), 1.0 / (grid.dy * grid.dy));
        let weight_x = polarization == Polarization::QuasiTe;
        let weight_y = polarization == Polarization::QuasiTm;
        let eps = &grid.eps;
        let eps_k = match polarization {
            Polarization::Scalar => &grid.eps,
            Polarization::QuasiTe => &grid.eps_xx,
            Polarization::QuasiTm => &grid.eps_yy,
        };

        // (off-diagonal, diagonal) contribution of one neighbour.
        let couple = |ep: f64, eq: f64, weighted: bool| -> (f64, f64) {
            if weighted {
                let s = ep + eq;
                (2.0 * eq / s, -2.0 * ep / s)
            } else {
                (1.0, -1.0)
            }
        };

        for j in 0..ny {
            for i in 0..nx {
                let p = j * nx + i;
                let ep = eps[p];
                let mut d = k0 * k0 * eps_k[p];

                // x neighbours
                for (exists, q, slot) in [(i > 0, p.wrapping_sub(1), 0u8), (i + 1 < nx, p + 1, 1)] {
                    if exists {
                        let (off, dd) = couple(ep, eps[q], weight_x);
                        d += dd * ix2;
                        if slot == 0 {
                            s.west[p] = off * ix2;
                        } else {
                            s.east[p] = off * ix2;
                        }
                    } else if grid.x_edges == EdgeCondition::Zero {
                        d -= ix2;
                    }
                }
                // y neighbours; y edges always carry a zero field
                for (exists, q, slot) in [(j > 0, p.wrapping_sub(nx), 0u8), (j + 1 < ny, p + nx, 1)] {
                    if exists {
                        let (off, dd) = couple(ep, eps[q], weight_y);
                        d += dd * iy2;
                        if slot == 0 {
                            s.south[p] = off * iy2;
                        } else {
                            s.north[p] = off * iy2;
                        }
                    } else {
                        d -= iy2;
                    }
                }
                s.diag[p] = d;
            }
        }
        s
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let nx = self.nx;
        for p in 0..self.len() {
            let mut acc = self.diag[p] * x[p];
            if self.west[p] != 0.0 {
                acc += self.west[p] * x[p - 1];
            }
            if self.east[p] != 0.0 {
                acc += self.east[p] * x[p + 1];
            }
            if self.south[p] != 0.0 {
                acc += self.south[p] * x[p - nx];
            }
            if self.north[p] != 0.0 {
                acc += self.north[p] * x[p + nx];
            }
            y[p] = acc;
        }
    }

    /// Sparse `L - shift * I` in compressed-column form.
    pub fn to_matrix(&self) -> SparseColMat<usize, f64> {
        self.shifted_matrix(0.0)
    }

    pub fn shifted_matrix(&self, shift: f64) -> SparseColMat<usize, f64> {
        let nx = self.nx;
        let mut triplets = Vec::with_capacity(5 * self.len());
        for p in 0..self.len() {
            triplets.push(Triplet::new(p, p, self.diag[p] - shift));
            if self.west[p] != 0.0 {
                triplets.push(Triplet::new(p, p - 1, self.west[p]));
            }
            if self.east[p] != 0.0 {
                triplets.push(Triplet::new(p, p + 1, self.east[p]));
            }
            if self.south[p] != 0.0 {
                triplets.push(Triplet::new(p, p - nx, self.south[p]));
            }
            if self.north[p] != 0.0 {
                triplets.push(Triplet::new(p, p + nx, self.north[p]));
            }
        }
        SparseColMat::try_new_from_triplets(self.len(), self.len(), &triplets).expect("stencil indices are in range")
    }
}
