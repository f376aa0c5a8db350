//! `rieszlab`: command-line harness for the Riesz transform laboratory.

mod commands;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Settings;

#[derive(Parser)]
#[command(name = "rieszlab", version, about = "Riesz transforms on discrete measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a test measure.
    Gen(Settings),
    /// Density ratios μ(B(x,r))/r^n on a radius grid.
    Density(Settings),
    /// Operator norm of the truncated or regularized transform.
    Norm(Settings),
    /// Operator norms over a list of truncation scales.
    Sweep(Settings),
    /// Menger curvature c²(μ), exact or sampled.
    Curvature(Settings),
    /// Run the AD-regularization construction and write its measures and manifest.
    Construct(Settings),
    /// Norms on μ, σ and μ + σ.
    Joint(Settings),
    /// Direct vs treecode timings.
    Bench(Settings),
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    NotConverged(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::NotConverged(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

impl From<rieszlab::Error> for CliError {
    fn from(e: rieszlab::Error) -> Self {
        match e {
            rieszlab::Error::Io { path, source } => CliError::Io { path, source },
            e @ rieszlab::Error::NotConverged { .. } => CliError::NotConverged(e.to_string()),
            e => CliError::Validation(e.to_string()),
        }
    }
}

fn set_threads(n: Option<usize>) -> Result<(), CliError> {
    let Some(n) = n else { return Ok(()) };
    if n == 0 {
        return Err(CliError::Validation("--threads must be >= 1".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (settings, f): (Settings, fn(&Settings) -> Result<(), CliError>) = match cli.command {
        Command::Gen(s) => (s, commands::gen),
        Command::Density(s) => (s, commands::density),
        Command::Norm(s) => (s, commands::norm),
        Command::Sweep(s) => (s, commands::sweep),
        Command::Curvature(s) => (s, commands::curvature),
        Command::Construct(s) => (s, commands::construct),
        Command::Joint(s) => (s, commands::joint),
        Command::Bench(s) => (s, commands::bench),
    };
    let settings = settings.merged()?;
    set_threads(settings.threads)?;
    f(&settings)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rieszlab: {e}");
            ExitCode::from(e.code())
        }
    }
}
