//! Subcommand definitions and dispatch.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
//! Anything detectable before work starts (bad flags, unreadable inputs,
//! out-of-range parameters) is a usage error; failures of the work itself
//! (an unlaunchable worker, an unwritable output file) are runtime errors.

mod analyze;
mod brackets;
mod mc;
mod run;
mod simulate;
mod solve_rate;

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use analyze::AnalyzeArgs;
pub use brackets::BracketsArgs;
pub use mc::McArgs;
pub use run::RunArgs;
pub use simulate::SimulateArgs;
pub use solve_rate::SolveRateArgs;

#[derive(Parser)]
#[command(
    name = "hypertrick",
    version,
    about = "Phased-study scheduling: simulation, subprocess studies, and analysis"
)]
pub struct Cli {
    /// Seed for all randomized work.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Directory for generated files.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Subcommand)]
pub enum Cmd {
    /// Simulate a scenario under a policy and print its summary.
    Simulate(SimulateArgs),
    /// Print bracket tables and their completion rates.
    Brackets(BracketsArgs),
    /// Solve for the eviction rate that yields a target completion rate.
    SolveRate(SolveRateArgs),
    /// Run a real subprocess study over a search space.
    Run(RunArgs),
    /// Monte-Carlo check of the expected-survivors formula.
    Mc(McArgs),
    /// Summarize and compare recorded studies.
    Analyze(AnalyzeArgs),
}

/// A failed subcommand, split by exit code.
#[derive(Debug)]
pub enum CmdError {
    /// Exit 2: the request itself is invalid.
    Usage(String),
    /// Exit 1: the request was valid but the work failed.
    Runtime(anyhow::Error),
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Usage(msg) => f.write_str(msg),
            CmdError::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for CmdError {
    fn from(e: anyhow::Error) -> Self {
        CmdError::Runtime(e)
    }
}

pub(crate) fn usage(msg: impl fmt::Display) -> CmdError {
    CmdError::Usage(msg.to_string())
}

pub fn dispatch(cli: &Cli) -> Result<(), CmdError> {
    match &cli.command {
        Cmd::Simulate(args) => simulate::exec(cli, args),
        Cmd::Brackets(args) => brackets::exec(args),
        Cmd::SolveRate(args) => solve_rate::exec(args),
        Cmd::Run(args) => run::exec(cli, args),
        Cmd::Mc(args) => mc::exec(cli, args),
        Cmd::Analyze(args) => analyze::exec(cli, args),
    }
}

/// The output directory, created on demand. Defaults to the working
/// directory.
pub(crate) fn ensure_out_dir(cli: &Cli) -> Result<PathBuf, CmdError> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)
        .map_err(|e| usage(format!("cannot create output directory {}: {e}", dir.display())))?;
    Ok(dir)
}

/// Makes a label safe to embed in a file name.
pub(crate) fn label_file_part(label: &str) -> String {
    label
        .chars()
        .map(|c| if c == '/' || c == '\\' || c.is_whitespace() { '-' } else { c })
        .collect()
}
