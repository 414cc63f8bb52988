//! `cocycle-lab`: runs one experiment from a TOML config and writes CSV and
//! JSON outputs. Exit status 2 marks configuration errors and 3 numerical
//! failures; both leave an `error.json` record in the output directory.

mod commands;
mod config;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::output::{Meta, Writer, TOOL, VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Le,
    LeLimit,
    Continuity,
    Ap,
    Ldt,
    Cdt,
    Drift,
    Loja,
    L2,
    Fourier,
    Ladder,
    Cov,
    ExampleDiscontinuity,
}

impl Experiment {
    pub fn name(self) -> String {
        self.to_possible_value()
            .expect("no skipped variants")
            .get_name()
            .to_string()
    }
}

#[derive(Debug, Parser)]
#[command(name = TOOL, version, about = "Finite-scale Lyapunov exponent experiments for quasiperiodic cocycles")]
struct Cli {
    #[arg(value_enum)]
    experiment: Experiment,
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; outputs do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Numerical(cocycle_core::Error),
}

impl From<cocycle_core::Error> for RunError {
    fn from(e: cocycle_core::Error) -> Self {
        RunError::Numerical(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Config(format!("output: {e}"))
    }
}

impl RunError {
    fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
        }
    }
}

#[derive(Serialize)]
struct ErrorRecord {
    class: &'static str,
    code: String,
    message: String,
    exit_code: u8,
}

impl From<&RunError> for ErrorRecord {
    fn from(e: &RunError) -> Self {
        let (class, code, message) = match e {
            RunError::Config(m) => ("config", "ConfigError".to_string(), m.clone()),
            RunError::Numerical(err) => ("numerical", err.code().to_string(), err.to_string()),
        };
        ErrorRecord {
            class,
            code,
            message,
            exit_code: e.exit_code(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let bytes = std::fs::read(&cli.config);
    let hash = bytes
        .as_ref()
        .map(|b| Sha256::digest(b).iter().map(|byte| format!("{byte:02x}")).collect())
        .unwrap_or_default();
    let mut writer = Writer {
        dir: cli.out.clone(),
        meta: Meta {
            tool: TOOL,
            version: VERSION,
            config_sha256: hash,
            subcommand: cli.experiment.name(),
            seed: 0,
        },
        svg: false,
        written: Vec::new(),
    };
    let result = bytes
        .map_err(|e| RunError::Config(format!("cannot read {}: {e}", cli.config.display())))
        .and_then(|b| run(&cli, &b, &mut writer));
    match result {
        Ok(()) => {
            for p in &writer.written {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{TOOL}: {}", ErrorRecord::from(&e).message);
            if output::ensure_dir(&writer.dir).is_ok() {
                let _ = std::fs::write(
                    writer.dir.join("error.json"),
                    output::to_json(&writer.meta, &ErrorRecord::from(&e)),
                );
            }
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli, bytes: &[u8], writer: &mut Writer) -> Result<(), RunError> {
    let text = std::str::from_utf8(bytes).map_err(|e| RunError::Config(format!("config is not UTF-8: {e}")))?;
    let config: ExperimentConfig = toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
    writer.meta.seed = cli.seed.unwrap_or(config.seed);
    writer.svg = config.output.svg;
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(RunError::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| RunError::Config(format!("thread pool: {e}")))?;
    }
    output::ensure_dir(&writer.dir)?;
    let base_dir = cli.config.parent().map(PathBuf::from).unwrap_or_default();
    commands::dispatch(cli.experiment, &config, &base_dir, writer)
}
