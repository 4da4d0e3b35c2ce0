use std::collections::BTreeMap;
use std::path::{Component, Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RESULT_FILE: &str = "result.json";

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A file read or written by a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Files read by a run, with their digests.
#[derive(Debug, Default)]
pub(crate) struct Inputs {
    pub files: Vec<Artifact>,
    pub canonical: Vec<PathBuf>,
}

impl Inputs {
    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = std::fs::read(path).map_err(|source| CliError::Io { path: path.into(), source })?;
        let shown = std::path::absolute(path).unwrap_or_else(|_| path.into());
        self.files.push(Artifact {
            path: shown.display().to_string(),
            bytes: bytes.len() as u64,
            sha256: digest(&bytes),
        });
        if let Ok(c) = path.canonicalize() {
            self.canonical.push(c);
        }
        Ok(bytes)
    }
}

/// Writer confined to one directory; never overwrites a file the run read.
#[derive(Debug)]
pub(crate) struct Outputs {
    root: PathBuf,
    pub written: Vec<Artifact>,
}

/// CSV cell for a number; empty when absent or not finite.
pub(crate) fn cell(v: f64) -> String {
    if v.is_finite() {
        super::units::format_number(v)
    } else {
        String::new()
    }
}

pub(crate) fn opt_cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, cell)
}

impl Outputs {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|source| CliError::Io { path: root.into(), source })?;
        Ok(Self { root: root.into(), written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8], inputs: &Inputs) -> Result<(), CliError> {
        let relative = Path::new(name);
        if !relative.components().all(|c| matches!(c, Component::Normal(_))) {
            return Err(CliError::Output { path: relative.into(), reason: "not a plain relative name".into() });
        }
        let path = self.root.join(relative);
        if let Ok(c) = path.canonicalize() {
            if inputs.canonical.contains(&c) {
                return Err(CliError::Output { path, reason: "it is an input of this run".into() });
            }
        }
        std::fs::write(&path, bytes).map_err(|source| CliError::Io { path: path.clone(), source })?;
        self.written.retain(|a| a.path != name);
        self.written.push(Artifact { path: name.into(), bytes: bytes.len() as u64, sha256: digest(bytes) });
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>], inputs: &Inputs) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Output { path: name.into(), reason: e.to_string() };
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Output { path: name.into(), reason: e.to_string() })?;
        self.write(name, &bytes, inputs)
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize, inputs: &Inputs) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
        bytes.push(b'\n');
        self.write(name, &bytes, inputs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Software {
    pub name: String,
    pub version: String,
}

impl Software {
    pub fn current() -> Self {
        Self { name: env!("CARGO_PKG_NAME").into(), version: env!("CARGO_PKG_VERSION").into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub code: String,
    pub message: String,
}

/// Everything needed to reproduce and audit one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// `ok` or `error`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
    pub software: Software,
    /// Resolved settings in canonical units, with provenance.
    pub config: serde_json::Value,
    /// The resolved config as parseable text.
    pub config_text: String,
    /// Physical constants and solver settings the command used.
    pub constants: serde_json::Value,
    pub seed: u64,
    pub workers: usize,
    pub timings_s: BTreeMap<String, f64>,
    pub inputs: Vec<Artifact>,
    pub outputs: Vec<Artifact>,
}

impl RunManifest {
    /// The embedded config of a manifest document.
    pub fn config_text_of(json: &str) -> Result<String, String> {
        let m: RunManifest = serde_json::from_str(json).map_err(|e| format!("not a run manifest: {e}"))?;
        Ok(m.config_text)
    }
}
