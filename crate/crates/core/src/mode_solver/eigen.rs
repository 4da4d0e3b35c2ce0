//! Shift-invert Arnoldi for the few eigenvalues of a sparse real operator
//! closest to (and below) a real shift.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ModeError;

#[derive(Debug, Clone, Copy)]
pub struct ArnoldiSettings {
    pub initial_dim: usize,
    /// Smallest Krylov dimension at which convergence is checked; below
    /// `initial_dim` it lets a good start vector finish early.
    pub min_dim: usize,
    pub max_dim: usize,
    pub max_restarts: usize,
    /// Relative residual `|L x - lambda x| / |lambda|` accepted as converged.
    pub tol: f64,
}

impl Default for ArnoldiSettings {
    fn default() -> Self {
        Self { initial_dim: 40, min_dim: 40, max_dim: 160, max_restarts: 6, tol: 1e-8 }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

/// Eigenpairs of `op` with eigenvalue above `floor`, nearest the shift first.
///
/// At most `wanted` pairs are returned; all returned pairs have converged.
pub fn eigenpairs_above(
    op: &SparseColMat<usize, f64>,
    shift: f64,
    floor: f64,
    wanted: usize,
    settings: &ArnoldiSettings,
) -> Result<Vec<EigenPair>, ModeError> {
    eigenpairs_above_from(op, shift, floor, wanted, settings, None)
}

/// As [`eigenpairs_above`], starting the Krylov space from `start` (plus a
/// small random component) when given.
pub fn eigenpairs_above_from(
    op: &SparseColMat<usize, f64>,
    shift: f64,
    floor: f64,
    wanted: usize,
    settings: &ArnoldiSettings,
    start: Option<&[f64]>,
) -> Result<Vec<EigenPair>, ModeError> {
    let n = op.nrows();
    let lu = shifted(op, shift).sp_lu().map_err(|e| ModeError::Factorization(format!("{e:?}")))?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0fa4);
    let mut start: Vec<f64> = match start {
        Some(s) if s.len() == n && norm2(s) > 0.0 => {
            let scale = norm2(s) / (n as f64).sqrt();
            s.iter().map(|v| v + 1e-3 * scale * (rng.random::<f64>() - 0.5)).collect()
        }
        _ => (0..n).map(|_| rng.random::<f64>() - 0.5).collect(),
    };
    let mut dim = settings.initial_dim.min(n).max(2.min(n));
    let mut last_residual = f64::INFINITY;

    for _ in 0..=settings.max_restarts {
        let mut krylov = Krylov::new(&start, dim);
        let mut checkpoint = settings.min_dim.clamp(2.min(n), dim);
        let (accepted, pending) = loop {
            krylov.extend(&lu, checkpoint);
            let kdim = krylov.kdim;
            let (mut accepted, pending, residual) = candidates(op, &krylov, shift, floor, wanted, settings.tol);
            last_residual = last_residual.min(residual);
            dedupe(&mut accepted);
            if pending.is_empty() || krylov.broke_down || kdim >= dim {
                break (accepted, pending);
            }
            checkpoint = (checkpoint + 8.max(checkpoint / 2)).min(dim);
        };
        if pending.is_empty() || krylov.broke_down {
            let mut accepted = accepted;
            accepted.truncate(wanted);
            return Ok(accepted);
        }
        // Explicit restart from the unconverged and converged wanted vectors.
        start = vec![0.0; n];
        for x in pending.iter().chain(accepted.iter().map(|p| &p.vector)) {
            start.iter_mut().zip(x).for_each(|(s, v)| *s += v);
        }
        for s in start.iter_mut() {
            *s += 1e-3 * (rng.random::<f64>() - 0.5);
        }
        dim = (dim * 2).min(settings.max_dim).min(n);
    }
    Err(ModeError::NotConverged { residual: last_residual, budget: settings.max_restarts })
}

/// Converged and unconverged wanted Ritz vectors of the current Krylov space,
/// with the smallest unconverged residual.
fn candidates(
    op: &SparseColMat<usize, f64>,
    krylov: &Krylov,
    shift: f64,
    floor: f64,
    wanted: usize,
    tol: f64,
) -> (Vec<EigenPair>, Vec<Vec<f64>>, f64) {
    let n = krylov.basis[0].len();
    let mut accepted = Vec::new();
    let mut pending = Vec::new();
    let mut best = f64::INFINITY;
    // Candidates ordered by closeness to the shift.
    for (mu, y) in ritz_pairs(&krylov.h, krylov.kdim) {
        let lambda = shift + 1.0 / mu;
        if !(lambda > floor) {
            continue;
        }
        let mut x = vec![0.0; n];
        for (k, &yk) in y.iter().enumerate() {
            let v = &krylov.basis[k];
            x.iter_mut().zip(v).for_each(|(xi, vi)| *xi += yk * vi);
        }
        let norm = norm2(&x);
        x.iter_mut().for_each(|v| *v /= norm);
        let (value, residual) = refine(op, &x);
        if residual <= tol && value > floor {
            accepted.push(EigenPair { value, vector: x, residual });
        } else {
            best = best.min(residual);
            pending.push(x);
        }
        if accepted.len() + pending.len() >= wanted {
            break;
        }
    }
    (accepted, pending, best)
}

/// Arnoldi factorization of the inverse shifted operator, grown on demand.
struct Krylov {
    basis: Vec<Vec<f64>>,
    h: DMatrix<f64>,
    kdim: usize,
    broke_down: bool,
}

impl Krylov {
    fn new(start: &[f64], max_dim: usize) -> Self {
        let norm = norm2(start);
        Self {
            basis: vec![start.iter().map(|v| v / norm).collect()],
            h: DMatrix::zeros(max_dim + 1, max_dim),
            kdim: 0,
            broke_down: false,
        }
    }

    fn extend(&mut self, lu: &faer::sparse::linalg::solvers::Lu<usize, f64>, target: usize) {
        let n = self.basis[0].len();
        let mut rhs = Mat::<f64>::zeros(n, 1);
        while self.kdim < target && !self.broke_down {
            let k = self.kdim;
            for (i, v) in self.basis[k].iter().enumerate() {
                rhs[(i, 0)] = *v;
            }
            lu.solve_in_place(&mut rhs);
            let mut w: Vec<f64> = (0..n).map(|i| rhs[(i, 0)]).collect();
            // Classical Gram-Schmidt, applied twice.
            for _ in 0..2 {
                for (i, v) in self.basis.iter().enumerate() {
                    let c = dot(v, &w);
                    self.h[(i, k)] += c;
                    w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= c * vi);
                }
            }
            let beta = norm2(&w);
            self.h[(k + 1, k)] = beta;
            self.kdim = k + 1;
            if beta < 1e-14 * self.h[(k, k)].abs().max(1e-300) {
                self.broke_down = true;
                break;
            }
            self.basis.push(w.iter().map(|v| v / beta).collect());
        }
    }
}

/// Real Ritz pairs of the leading `k x k` Hessenberg block, largest |mu| first.
fn ritz_pairs(h: &DMatrix<f64>, k: usize) -> Vec<(f64, Vec<f64>)> {
    let hk = h.view((0, 0), (k, k)).into_owned();
    let scale = hk.amax().max(1e-300);
    let mut values: Vec<f64> = hk
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-8 * z.re.abs().max(1e-12 * scale))
        .map(|z| z.re)
        .filter(|v| v.abs() > 1e-14 * scale)
        .collect();
    values.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    values.into_iter().filter_map(|mu| inverse_iteration(&hk, mu).map(|y| (mu, y))).collect()
}

fn inverse_iteration(hk: &DMatrix<f64>, mu: f64) -> Option<Vec<f64>> {
    let k = hk.nrows();
    let scale = hk.amax().max(1e-300);
    let perturbed = mu + 1e-10 * mu.abs().max(scale * 1e-6);
    let mut m = hk.clone();
    for i in 0..k {
        m[(i, i)] -= perturbed;
    }
    let lu = m.lu();
    let mut y = nalgebra::DVector::<f64>::from_fn(k, |i, _| 1.0 + 0.1 * (i as f64).sin());
    for _ in 0..3 {
        y = lu.solve(&y)?;
        let n = y.norm();
        if !n.is_finite() || n == 0.0 {
            return None;
        }
        y /= n;
    }
    Some(y.iter().copied().collect())
}

/// `op - shift * I`.
fn shifted(op: &SparseColMat<usize, f64>, shift: f64) -> SparseColMat<usize, f64> {
    let mut triplets: Vec<Triplet<usize, usize, f64>> = Vec::with_capacity(op.compute_nnz() + op.nrows());
    triplets.extend(op.as_ref().triplet_iter().map(|t| Triplet::new(t.row, t.col, *t.val)));
    triplets.extend((0..op.nrows()).map(|k| Triplet::new(k, k, -shift)));
    SparseColMat::try_new_from_triplets(op.nrows(), op.ncols(), &triplets).expect("indices taken from a valid matrix")
}

pub(crate) fn apply(op: &SparseColMat<usize, f64>, x: &[f64]) -> Vec<f64> {
    let xm = Mat::from_fn(x.len(), 1, |i, _| x[i]);
    let y = op * &xm;
    (0..x.len()).map(|i| y[(i, 0)]).collect()
}

/// Rayleigh quotient and relative residual of a unit vector.
fn refine(op: &SparseColMat<usize, f64>, x: &[f64]) -> (f64, f64) {
    let ax = apply(op, x);
    let lambda = dot(x, &ax);
    let res: f64 = ax.iter().zip(x).map(|(a, v)| (a - lambda * v).powi(2)).sum::<f64>().sqrt();
    (lambda, res / lambda.abs().max(1e-300))
}

/// Drop duplicate copies of the same eigenvector.
fn dedupe(pairs: &mut Vec<EigenPair>) {
    let mut kept: Vec<EigenPair> = Vec::with_capacity(pairs.len());
    for p in pairs.drain(..) {
        let dup = kept
            .iter()
            .any(|q| (q.value - p.value).abs() <= 1e-9 * p.value.abs() && dot(&q.vector, &p.vector).abs() > 0.99);
        if !dup {
            kept.push(p);
        }
    }
    kept.sort_by(|a, b| b.value.total_cmp(&a.value));
    *pairs = kept;
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
