//! `ns-lab`: reproducible noise stability experiments.

mod commands;
mod config;
mod record;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{Command, ExperimentConfig, Format};
use record::{now_ms, RunRecord};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(ns_lab_core::Error),
}

impl From<ns_lab_core::Error> for CliError {
    fn from(e: ns_lab_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use ns_lab_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::NotAdjacent(..) | E::Unsupported(_)) => 3,
            CliError::Core(E::Accuracy(_)) => 1,
            CliError::Core(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ns-lab", version, about = "Noise stability experiments with replayable run records")]
struct Cli {
    /// Subcommand; may be omitted when the config names one.
    #[arg(value_enum)]
    command: Option<Command>,
    /// JSON config file, or a run record to replay.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    samples: Option<u64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    rho: Option<f64>,
    /// Write the output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("NS_LAB_THREADS") {
        let n: usize = v.parse().map_err(|_| CliError::Config(format!("NS_LAB_THREADS={v} is not a count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let command = match (cli.command, cfg.command) {
        (Some(c), Some(k)) if c != k => {
            return Err(CliError::Config(format!("config is for {k:?}, not {c:?}")));
        }
        (Some(c), _) | (None, Some(c)) => c,
        (None, None) => return Err(CliError::Config("no subcommand given".into())),
    };
    cfg.command = Some(command);
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if cli.samples.is_some() {
        cfg.samples = cli.samples;
    }
    if cli.rho.is_some() {
        cfg.rho = cli.rho;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    if cli.format.is_some() {
        cfg.format = cli.format;
    }
    let format = *cfg.format.get_or_insert(Format::Json);
    let started = now_ms();
    let out = commands::run(command, &mut cfg)?;
    let record = RunRecord::new(cfg.clone(), out.results, started)?;
    let body = match format {
        Format::Json => serde_json::to_string_pretty(&record).map_err(ns_lab_core::Error::from)? + "\n",
        Format::Csv => out.csv,
    };
    for line in &out.summary {
        eprintln!("{line}");
    }
    match &cfg.out {
        Some(path) => std::fs::write(path, body).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
        None => std::io::stdout().write_all(body.as_bytes()).map_err(ns_lab_core::Error::from)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ns-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
