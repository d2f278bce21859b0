//! `fctncd`: runs, benchmark tables and refinement studies.
//!
//! Exit status: 0 ok, 2 configuration error, 3 non-convergence, 4 internal
//! error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fctncd_core::SchemeKind;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    NonConvergence(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] fctncd_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use fctncd_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Io(_) => 4,
            CliError::Core(e) => match e {
                E::Config(_) | E::Data(_) | E::Stability(_) => 2,
                E::NonConvergence(_) => 3,
                E::Contract(_) | E::Solver(_) | E::Infeasible(_) => 4,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Suite {
    Advection,
    Rotation,
}

#[derive(Debug, Parser)]
#[command(name = "fctncd", version, about = "Flux-corrected transport for convection-diffusion problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation described by a configuration file.
    Run { config: PathBuf },
    /// Error table of a benchmark suite over schemes and weights.
    Bench {
        suite: Suite,
        /// Comma-separated schemes (DIV, NDVL, NDVA, LOW, HIGH).
        #[arg(long, value_delimiter = ',', default_values_t = vec![SchemeKind::Div, SchemeKind::Ndvl, SchemeKind::Ndva])]
        schemes: Vec<SchemeKind>,
        /// Comma-separated weights σ.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.5, 1.0])]
        sigmas: Vec<f64>,
        /// CSV destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cross-check every exact limiter solve with the dense simplex.
        #[arg(long)]
        oracle: bool,
    },
    /// Refinement study of a manufactured solution.
    Converge { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => commands::run(&config),
        Command::Bench { suite, schemes, sigmas, out, oracle } => {
            commands::bench(matches!(suite, Suite::Rotation), &schemes, &sigmas, out.as_deref(), oracle)
        }
        Command::Converge { config } => commands::converge(&config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fctncd: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
