//! `finsler`: tensors, identity suites and curvature classification from a
//! TOML run configuration.

mod commands;
mod config;
mod report;

use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use finsler_core::{Backend, Error};
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "finsler", version, about = "Berwald curvature and scalar flag curvature of Finsler metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dump L, g, G, N, Γ, R̂, H, k, C, B, A at every sample.
    Tensors(RunArgs),
    /// Evaluate identity suites; exits 1 if any residual fails.
    Verify(RunArgs),
    /// Classify the metric as generic, scalar or constant curvature.
    Classify(RunArgs),
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Report path (overrides `output`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of samples (overrides `sampling.count`).
    #[arg(long)]
    samples: Option<usize>,
    /// Sampling seed (overrides `sampling.seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Derivative backend (overrides `backend`).
    #[arg(long)]
    backend: Option<Backend>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{context}: {source}")]
    Io { context: String, source: io::Error },
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn io(context: impl Into<String>) -> impl FnOnce(io::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 2,
            CliError::Core(e) => match e.root() {
                Error::Config(_) | Error::Dsl(_) | Error::DimensionTooSmall(_) => 2,
                Error::InternalInconsistency(_) => 1,
                _ => 3,
            },
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Tensors(args) => commands::tensors(args),
        Command::Verify(args) => commands::verify(args),
        Command::Classify(args) => commands::classify(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
