//! `sicwfi --config run.cfg` — run one configured command and write its
//! artifacts plus a manifest into the output directory.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use sicwfi::cli_io::{load_config, run_command, CliError, Provenance, MANIFEST_FILE};

/// Output root used when neither `--output` nor the config names one.
const OUTPUT_ENV: &str = "SICWFI_OUTPUT";

#[derive(Debug, Parser)]
#[command(name = "sicwfi", version, about = "SiC nanobeam-to-fiber interface toolkit")]
struct Args {
    /// Run configuration, or a manifest.json from an earlier run.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; overrides the config and $SICWFI_OUTPUT.
    #[arg(long, value_name = "DIR")]
    output: Option<PathBuf>,
    /// Worker threads (default: available cores).
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u32).range(1..))]
    workers: Option<u32>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Print the resolved settings and written artifacts to stderr.
    #[arg(long)]
    verbose: bool,
}

fn run(args: &Args) -> Result<(), CliError> {
    let mut config = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        config.override_seed(seed);
    }
    if let Some(n) = args.workers {
        config.override_workers(n as usize);
    }
    let from_config = config.get("output").is_some_and(|s| s.provenance != Provenance::Default);
    match (&args.output, std::env::var_os(OUTPUT_ENV)) {
        (Some(dir), _) => config.override_output(dir),
        (None, Some(dir)) if !from_config && !dir.is_empty() => config.override_output(&PathBuf::from(dir)),
        _ => {}
    }
    let replayed_into_itself = args.config.file_name().is_some_and(|n| n == MANIFEST_FILE)
        && args.config.parent().and_then(|d| d.canonicalize().ok()) == config.output().canonicalize().ok();
    if replayed_into_itself {
        return Err(CliError::Output {
            path: config.output(),
            reason: "replaying a manifest into its own run directory; pass --output".into(),
        });
    }
    if args.verbose {
        eprintln!("# {} -> {}", config.command().name(), config.output().display());
        eprint!("{}", config.to_text());
    }
    let report = run_command(&config)?;
    if args.verbose {
        for a in &report.manifest.outputs {
            eprintln!("wrote {} ({} bytes)", report.output_dir.join(&a.path).display(), a.bytes);
        }
        eprintln!("done in {:.3} s", report.manifest.timings_s.get("total").copied().unwrap_or_default());
    }
    println!("{}", serde_json::to_string_pretty(&report.summary).expect("serializable"));
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
