#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or inputs: exit 2.
    Usage(String),
    /// The mathematics refused: exit 1.
    Domain(deltaprime::Error),
    Io(String),
}

impl From<deltaprime::Error> for CliError {
    fn from(e: deltaprime::Error) -> Self {
        match e {
            deltaprime::Error::InvalidInput(m) => CliError::Usage(m),
            other => CliError::Domain(other),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) | CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Domain(e) => write!(f, "domain error: {e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "deltaprime",
    version,
    about = "δ′ interactions on the line and on measured sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Conversions between transmission matrices, B-forms and unitaries.
    Interactions(commands::interactions::Args),
    /// Limits of δ-combs as their spacing shrinks.
    Approx(commands::approx::Args),
    /// Bound states of a point-interaction system.
    Spectrum(commands::spectrum::Args),
    /// Negative spectrum of the δ′ operator on an atomic measure.
    Measure(commands::measure::Args),
    /// Certified lower bounds on the number of negative eigenvalues.
    Certify(commands::certify::Args),
    /// Deficiency-element ranks and functionals.
    Deficiency(commands::deficiency::Args),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Interactions(a) => commands::interactions::run(a),
        Command::Approx(a) => commands::approx::run(a),
        Command::Spectrum(a) => commands::spectrum::run(a),
        Command::Measure(a) => commands::measure::run(a),
        Command::Certify(a) => commands::certify::run(a),
        Command::Deficiency(a) => commands::deficiency::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("deltaprime: {e}");
            ExitCode::from(e.code())
        }
    }
}
