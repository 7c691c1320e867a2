//! Config-driven front end for the `procrustean` library.
//!
//! `pdistill <command> --config <file> [--seed N] [--out DIR]` parses a
//! strict JSON config (see [`config`]), runs one command, and writes CSV
//! tables, graymaps and a `metadata.json` into the output directory. On
//! failure it prints an [`ErrorRecord`] to stderr, writes it as
//! `error.json`, and exits with 2 for config errors and 1 otherwise.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use procrustean::ensemble::{NORMAL_SAMPLER, RNG_ALGORITHM};
use serde::Serialize;

pub use config::{load_config, parse_config, AngleUnit, Command, Parameters, RunConfig};
pub use error::{CliError, CliResult, ErrorRecord};
pub use output::{write_heatmap, write_table, ArtifactKind, Cell, Heatmap, OutputArtifact, SCHEMA_VERSION};

pub const TOOL: &str = "pdistill";

#[derive(Debug, Parser)]
#[command(name = TOOL, version, about = "Procrustean entanglement distillation experiments")]
pub struct Cli {
    pub command: Command,
    /// JSON config document.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, created if missing. Defaults to `out/<command>`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Generator {
    pub rng: &'static str,
    pub normal: &'static str,
}

pub const GENERATOR: Generator = Generator { rng: RNG_ALGORITHM, normal: NORMAL_SAMPLER };

/// Contents of `metadata.json`. Holds no timestamps or host details, so
/// identical runs write identical metadata.
#[derive(Clone, Debug, Serialize)]
pub struct Metadata<'a> {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    /// A config document that reproduces the run.
    pub config: config::ResolvedDocument<'a>,
    pub generator: Generator,
    pub artifacts: Vec<OutputArtifact>,
    pub warnings: Vec<String>,
}

/// Successful run: every artifact written, metadata last.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub config: RunConfig,
    pub artifacts: Vec<OutputArtifact>,
    pub warnings: Vec<String>,
}

/// Runs one resolved config and writes its artifacts.
pub fn run(mut config: RunConfig) -> CliResult<RunSummary> {
    let dir = config.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let seed = config.seed;
    let produced = match &mut config.parameters {
        Parameters::Distill(p) => commands::distill(p, &dir),
        Parameters::Ghz(p) => commands::ghz(p, &dir),
        Parameters::Sweep(p) => commands::sweep(p, seed, &dir),
        Parameters::Ensemble(p) => commands::ensemble(p, seed, &dir),
        Parameters::Tdse(p) => commands::tdse(p, &dir),
        Parameters::Mbqc(p) => commands::mbqc(p, &dir),
    }?;
    let meta_path = dir.join("metadata.json");
    let mut artifacts = produced.artifacts;
    artifacts.push(output::metadata_artifact(&meta_path));
    let metadata = Metadata {
        schema_version: SCHEMA_VERSION,
        tool: TOOL,
        version: env!("CARGO_PKG_VERSION"),
        config: config.document(),
        generator: GENERATOR,
        artifacts: artifacts.clone(),
        warnings: produced.warnings.clone(),
    };
    output::write_json(&metadata, &meta_path)?;
    Ok(RunSummary { config, artifacts, warnings: produced.warnings })
}

fn default_out(command: Command) -> PathBuf {
    Path::new("out").join(command.name())
}

/// Parses the config named by `cli`, runs it, and reports failures. Returns
/// the process exit status.
pub fn execute(cli: &Cli) -> i32 {
    let out = cli.out.clone().unwrap_or_else(|| default_out(cli.command));
    let result = load_config(cli.command, &cli.config, cli.seed, out.clone()).and_then(run);
    match result {
        Ok(summary) => {
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            0
        }
        Err(err) => {
            let record = err.record(Some(cli.command.name()));
            let json = serde_json::to_string(&record).unwrap_or_else(|_| format!("{{\"message\":{:?}}}", record.message));
            eprintln!("{json}");
            // Best effort: the directory may be the cause of the failure.
            if fs::create_dir_all(&out).is_ok() {
                let _ = output::write_json(&record, &out.join("error.json"));
            }
            record.exit_code
        }
    }
}
