//! Numerical toolkit for SiC triangular-nanobeam to tapered-fibre interfaces.

// `!(x > 0.0)` is the NaN-rejecting form of a positivity check.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli_io;
mod estimate;
pub mod fit;
pub mod mode_solver;
pub mod photon_stats;
pub mod raman_strain;
pub mod spin_strain;
pub mod taper_coupler;

pub use estimate::Estimate;
