//! One function per command. Each writes its artifacts through the context
//! and returns the summary that becomes `result.json`.

mod optics;
mod photon;
mod raman;
mod spin;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value as Json};

use super::config::{ConfigError, ConfigErrorKind, RunConfig};
use super::output::{ErrorReport, Inputs, Outputs, RunManifest, Software, MANIFEST_FILE, RESULT_FILE};
use super::schema::Command;
use super::CliError;

/// What a successful run produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub summary: Json,
    pub manifest: RunManifest,
}

pub(crate) struct Context<'a> {
    pub config: &'a RunConfig,
    pub out: Outputs,
    pub inputs: Inputs,
    constants: serde_json::Map<String, Json>,
}

impl Context<'_> {
    pub fn constant(&mut self, name: &str, value: &impl Serialize) {
        self.constants.insert(name.into(), serde_json::to_value(value).expect("serializable"));
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        self.out.csv(name, header, rows, &self.inputs)
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        self.out.json(name, value, &self.inputs)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        self.out.write(name, bytes, &self.inputs)
    }

    /// Config inconsistency found after parsing, reported against `key`.
    pub fn conflict(&self, key: &str, message: impl Into<String>) -> CliError {
        CliError::Config(ConfigError {
            line: self.config.line_of(key),
            key: Some(key.into()),
            kind: ConfigErrorKind::InvalidValue(message.into()),
        })
    }

    pub fn read_input(&mut self, key: &str) -> Result<Option<(PathBuf, Vec<u8>)>, CliError> {
        let Some(path) = self.config.input_path(key) else { return Ok(None) };
        let bytes = self.inputs.read(&path)?;
        Ok(Some((path, bytes)))
    }

    /// Numeric CSV with a header row; at least `min_columns` columns.
    pub fn read_table(&mut self, key: &str, min_columns: usize) -> Result<Option<Table>, CliError> {
        let Some((path, bytes)) = self.read_input(key)? else { return Ok(None) };
        parse_table(&path, &bytes, min_columns).map(Some)
    }
}

/// Numeric CSV contents.
pub(crate) struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[k]).collect()
    }

    /// Index of a named column, if present.
    pub fn find(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

pub(crate) fn parse_table(path: &Path, bytes: &[u8], min_columns: usize) -> Result<Table, CliError> {
    let bad = |message: String| CliError::Input { path: path.into(), message };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let header: Vec<String> = reader.headers().map_err(|e| bad(e.to_string()))?.iter().map(str::to_string).collect();
    if header.len() < min_columns {
        return Err(bad(format!("expected at least {min_columns} columns, found {}", header.len())));
    }
    let mut rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let row = record
            .iter()
            .map(|c| c.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| bad(format!("row {} is not numeric", k + 2)))?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(bad("no data rows".into()));
    }
    Ok(Table { header, rows })
}

fn dispatch(ctx: &mut Context) -> Result<Json, CliError> {
    match ctx.config.command() {
        Command::ModeSolve => optics::mode_solve(ctx),
        Command::ModeSweep => optics::mode_sweep(ctx),
        Command::DipoleMap => optics::dipole_map(ctx),
        Command::TaperSweep => optics::taper_sweep(ctx),
        Command::EtaWfi => optics::eta_wfi(ctx),
        Command::SpinOdmr => spin::spin_odmr(ctx),
        Command::StrainShift => spin::strain_shift_command(ctx),
        Command::RamanFit => raman::raman_fit(ctx),
        Command::RamanMap => raman::raman_map(ctx),
        Command::G2 => photon::g2(ctx),
        Command::FitSaturation => photon::fit_saturation(ctx),
        Command::FitOdmr => photon::fit_odmr(ctx),
        Command::FitRabi => photon::fit_rabi(ctx),
        Command::FitEcho => photon::fit_echo(ctx),
        Command::SimulateEmitter => photon::simulate_emitter(ctx),
    }
}

/// Execute the configured command inside a pool of the configured size.
///
/// A manifest is written whether or not the command succeeds, as long as the
/// output directory can be created.
pub fn run_command(config: &RunConfig) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let workers = config.workers().unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let root = config.output();
    let mut ctx =
        Context { config, out: Outputs::create(&root)?, inputs: Inputs::default(), constants: serde_json::Map::new() };
    let result = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Workers(e.to_string()))
        .and_then(|pool| pool.install(|| dispatch(&mut ctx)))
        .and_then(|summary| {
            ctx.json(RESULT_FILE, &summary)?;
            Ok(summary)
        });

    let mut timings = BTreeMap::new();
    timings.insert("total".to_string(), start.elapsed().as_secs_f64());
    let manifest = RunManifest {
        command: config.command().name().into(),
        status: if result.is_ok() { "ok" } else { "error" }.into(),
        error: result.as_ref().err().map(|e| ErrorReport { code: e.code().into(), message: e.to_string() }),
        software: Software::current(),
        config: serde_json::to_value(config.settings()).expect("serializable"),
        config_text: config.to_text(),
        constants: Json::Object(std::mem::take(&mut ctx.constants)),
        seed: config.seed(),
        workers,
        timings_s: timings,
        inputs: std::mem::take(&mut ctx.inputs.files),
        outputs: std::mem::take(&mut ctx.out.written),
    };
    let path = root.join(MANIFEST_FILE);
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("serializable");
    bytes.push(b'\n');
    std::fs::write(&path, bytes).map_err(|source| CliError::Io { path, source })?;
    let summary = result?;
    Ok(RunReport { output_dir: root, summary, manifest })
}

/// `{"value": v, "sigma": s}` for JSON summaries.
pub(crate) fn estimate(e: crate::Estimate) -> Json {
    json!({ "value": e.value, "sigma": e.sigma })
}
