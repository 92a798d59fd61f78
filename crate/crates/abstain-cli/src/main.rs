//! Command-line front end for exponent computations, exact classical tests,
//! sequential simulation, pinching scans and the acceptance checks.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "abstain", version, about = "Error exponents for hypothesis testing with abstention")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GlobalOpts {
    /// Print machine-readable JSON on standard output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Logarithm base of every reported exponent and of exponent arguments.
    #[arg(long, global = true, value_enum, default_value_t = Base::E)]
    pub base: Base,
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Base {
    #[value(name = "e")]
    #[serde(rename = "e")]
    E,
    #[value(name = "2")]
    #[serde(rename = "2")]
    Two,
}

impl Base {
    /// Multiplier from nats to this base.
    pub fn from_nats(self) -> f64 {
        match self {
            Base::E => 1.0,
            Base::Two => 1.0 / std::f64::consts::LN_2,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one divergence between two states.
    Divergence(commands::DivergenceArgs),
    /// Sample a region boundary as CSV.
    Region(commands::RegionArgs),
    /// Exact (or Monte Carlo) statistics of a classical three-outcome test.
    SimulateClassical(commands::ClassicalArgs),
    /// Monte Carlo estimates for the adaptive sequential protocol.
    SimulateSequential(commands::SequentialArgs),
    /// Pinched Rényi rates against the sandwiched target for k = 1..k_max.
    PinchingScan(commands::PinchingArgs),
    /// Run acceptance checks and print a per-check table.
    Verify(commands::VerifyArgs),
}

/// A failure carrying its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl From<abstain::Error> for CliError {
    fn from(e: abstain::Error) -> Self {
        CliError { code: e.exit_code() as u8, message: e.to_string() }
    }
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::input(format!("{}: {e}", path.display()))
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_input(path: &PathBuf) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let g = &cli.global;
    let result = match &cli.command {
        Command::Divergence(a) => commands::divergence(a, g),
        Command::Region(a) => commands::region(a, g),
        Command::SimulateClassical(a) => commands::simulate_classical(a, g),
        Command::SimulateSequential(a) => commands::simulate_sequential(a, g),
        Command::PinchingScan(a) => commands::pinching_scan(a, g),
        Command::Verify(a) => commands::verify(a, g),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
