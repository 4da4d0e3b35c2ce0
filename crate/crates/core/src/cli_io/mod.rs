//! Run configuration, command dispatch and artifact persistence.
//!
//! A run is one command read from a unit-suffixed config file. It writes CSV
//! and JSON artifacts under a single output directory, a `result.json`
//! summary, and a `manifest.json` recording the resolved config, constants,
//! input digests and timings. Re-running a manifest reproduces every artifact
//! byte for byte.

mod commands;
mod config;
mod output;
mod schema;
pub mod units;

use std::path::PathBuf;

use thiserror::Error;

use crate::mode_solver::ModeError;
use crate::photon_stats::PhotonError;
use crate::raman_strain::RamanError;
use crate::spin_strain::SpinError;
use crate::taper_coupler::TaperError;

pub use commands::{run_command, RunReport};
pub use config::{parse_config, ConfigError, ConfigErrorKind, Provenance, RunConfig, Setting, Value};
pub use output::{digest, Artifact, ErrorReport, RunManifest, Software, MANIFEST_FILE, RESULT_FILE};
pub use schema::{Command, Fallback, KeySpec, Kind, Range, Section};
pub use units::Dimension;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("refusing to write {path}: {reason}")]
    Output { path: PathBuf, reason: String },
    #[error("worker pool: {0}")]
    Workers(String),
    #[error(transparent)]
    Mode(#[from] ModeError),
    #[error(transparent)]
    Taper(#[from] TaperError),
    #[error(transparent)]
    Spin(#[from] SpinError),
    #[error(transparent)]
    Raman(#[from] RamanError),
    #[error(transparent)]
    Photon(#[from] PhotonError),
}

fn mode_code(e: &ModeError) -> &'static str {
    match e {
        ModeError::InvalidGeometry(_) => "mode.invalid_geometry",
        ModeError::InvalidGrid(_) => "mode.invalid_grid",
        ModeError::InvalidWavelength(_) => "mode.invalid_wavelength",
        ModeError::Factorization(_) => "mode.factorization",
        ModeError::NotConverged { .. } => "mode.not_converged",
        ModeError::NoGuidedMode => "mode.no_guided_mode",
    }
}

impl CliError {
    /// Stable machine-readable identifier, `<area>.<condition>`.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Config(e) => e.code(),
            CliError::Io { .. } => "io.failed",
            CliError::Input { .. } => "input.malformed",
            CliError::Output { .. } => "output.refused",
            CliError::Workers(_) => "runtime.workers",
            CliError::Mode(e) => mode_code(e),
            CliError::Taper(e) => match e {
                TaperError::InvalidProfile(_) => "taper.invalid_profile",
                TaperError::DegenerateStack(_) => "taper.degenerate_stack",
                TaperError::InvalidInput(_) => "taper.invalid_input",
                TaperError::Unphysical(_) => "taper.unphysical",
                TaperError::Mode(m) => mode_code(m),
            },
            CliError::Spin(e) => match e {
                SpinError::InvalidTensor(_) => "spin.invalid_tensor",
                SpinError::InvalidParameter(_) => "spin.invalid_parameter",
                SpinError::EmptyProfile => "spin.empty_profile",
            },
            CliError::Raman(e) => match e {
                RamanError::InvalidSpectrum(_) => "raman.invalid_spectrum",
                RamanError::InvalidWindow(..) => "raman.invalid_window",
                RamanError::NoPeak(_) => "raman.no_peak",
                RamanError::FitFailed(_) | RamanError::Lm(_) => "raman.fit_failed",
                RamanError::LabelMismatch(..) => "raman.label_mismatch",
                RamanError::DegenerateSystem(_) => "raman.degenerate_system",
                RamanError::RankDeficient => "raman.rank_deficient",
                RamanError::InvalidConstants(_) => "raman.invalid_constants",
                RamanError::Reference(_) => "raman.reference",
                RamanError::NotRectilinear(_) => "raman.not_rectilinear",
            },
            CliError::Photon(e) => match e {
                PhotonError::EmptyChannel(_) => "photon.empty_channel",
                PhotonError::UnknownChannel(_) => "photon.unknown_channel",
                PhotonError::Unsorted { .. } => "photon.unsorted",
                PhotonError::InvalidParameter(_) => "photon.invalid_parameter",
                PhotonError::InsufficientSidePeaks { .. } => "photon.insufficient_side_peaks",
                PhotonError::TooFewPoints { .. } => "photon.too_few_points",
                PhotonError::NoPeak => "photon.no_peak",
                PhotonError::Unidentifiable(_) => "photon.unidentifiable",
                PhotonError::Fit(_) => "photon.fit_failed",
                PhotonError::TruncatedRecord(_) => "photon.truncated_record",
                PhotonError::Csv(_) => "photon.csv",
                PhotonError::Io(_) => "photon.io",
            },
        }
    }

    /// Process exit status: 2 config, 3 files, 4 computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } | CliError::Input { .. } | CliError::Output { .. } => 3,
            _ => 4,
        }
    }
}

/// Read a config file; relative paths inside resolve against its directory.
/// A run manifest (`.json`) is accepted in place of a config.
pub fn load_config(path: &std::path::Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    let text = if path.extension().is_some_and(|e| e == "json") {
        RunManifest::config_text_of(&text).map_err(|message| CliError::Input { path: path.into(), message })?
    } else {
        text
    };
    let base = path.parent().map(PathBuf::from).unwrap_or_default();
    Ok(parse_config(&text)?.with_base_dir(base))
}
