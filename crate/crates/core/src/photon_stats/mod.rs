//! Photon time-tag statistics: correlation histograms, pulsed g²(0), and the
//! saturation / ODMR / Rabi / Hahn-echo fitters, with seeded generators that
//! double as oracles for them.

mod correlate;
mod fitters;
mod simulate;
mod stream;

use thiserror::Error;

use crate::fit::LmError;

pub use correlate::{correlate, pulsed_g2_envelope, CorrelationHistogram, EnvelopeOptions, G2Envelope, Normalization};
pub use fitters::{
    fit_hahn_echo, fit_odmr, fit_rabi, fit_saturation, snr, FitParameter, FitResult, ModelId, SaturationModel,
    SaturationOptions, SnrDefinition, SATURATION_MODEL_THRESHOLD_HZ,
};
pub use simulate::{
    echo_trace, odmr_spectrum, rabi_trace, saturation_curve, simulate_emitter, Background, EmitterParams, Excitation,
    SurfaceBackground,
};
pub use stream::{gate, TimeTag, TimeTagStream, RECORD_BYTES};

#[derive(Debug, Error)]
pub enum PhotonError {
    #[error("channel {0} has no events")]
    EmptyChannel(u8),
    #[error("channel {0} is not declared for this stream")]
    UnknownChannel(u8),
    #[error("timestamps of channel {channel} decrease at event {index}")]
    Unsorted { channel: u8, index: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("only {found} usable side peaks (need 4)")]
    InsufficientSidePeaks { found: usize },
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { got: usize, need: usize },
    #[error("no peak above 3x noise")]
    NoPeak,
    #[error("parameters not identifiable: {0}")]
    Unidentifiable(String),
    #[error(transparent)]
    Fit(#[from] LmError),
    #[error("truncated time-tag record: {0} trailing bytes")]
    TruncatedRecord(usize),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
