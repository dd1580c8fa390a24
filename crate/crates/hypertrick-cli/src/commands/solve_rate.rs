//! `hypertrick solve-rate`: invert the expected completion rate.

use clap::Args;
use hypertrick_core::policy::solve_eviction_rate;

use super::{CmdError, usage};

#[derive(Args)]
pub struct SolveRateArgs {
    /// Target expected completion rate, in (0, 1].
    #[arg(long)]
    pub alpha: f64,

    /// Phases per worker.
    #[arg(long)]
    pub phases: u32,
}

pub fn exec(args: &SolveRateArgs) -> Result<(), CmdError> {
    let r = solve_eviction_rate(args.alpha, args.phases).map_err(usage)?;
    println!("r {r:.6}");
    Ok(())
}
