//! Adiabatic power transfer between a tapered nanobeam and a tapered fibre.
//!
//! The overlap region is staircased into z-invariant composite sections.
//! Each section's supermodes come from the mode solver on one shared grid;
//! modal amplitudes are projected across every step (no reflections) and pick
//! up `exp(i beta dz)` inside each segment. Power that does not project onto a
//! guided mode is counted as lost, never renormalized.

mod analysis;
mod eme;
mod profile;

use thiserror::Error;

use crate::mode_solver::ModeError;

pub use analysis::{infer_interface_efficiency, per_support_loss, SupportLoss};
pub use eme::{
    efficiency_vs_overlap, local_supermodes, plateau_width, propagate_both, propagate_eme, Direction, EmeSettings,
    SweepPoint, TransferResult,
};
pub use profile::{
    adiabaticity_check, build_segments, default_segment_count, AdiabaticityReport, CompositeSection, Segment,
    SegmentStack, TaperProfile, DEFAULT_RATE_THRESHOLD,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TaperError {
    #[error("invalid taper profile: {0}")]
    InvalidProfile(String),
    #[error("zero-length overlap cannot be split into {0} segments")]
    DegenerateStack(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unphysical input: {0}")]
    Unphysical(String),
    #[error(transparent)]
    Mode(#[from] ModeError),
}
