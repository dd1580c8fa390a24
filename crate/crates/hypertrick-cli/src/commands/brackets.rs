//! `hypertrick brackets`: successive-halving bracket tables.

use clap::Args;
use hypertrick_core::policy::{bracket_alpha, hyperband_alpha, hyperband_brackets};

use super::{CmdError, usage};

#[derive(Args)]
pub struct BracketsArgs {
    /// Field-shrink factor between rounds (at least 2).
    #[arg(long, default_value_t = 3)]
    pub eta: u32,

    /// Full per-configuration budget; must be a power of eta.
    #[arg(long = "R", default_value_t = 27)]
    pub big_r: u32,

    /// First-round sizes, most aggressive bracket first (e.g. 27,9,6,4).
    #[arg(long, value_delimiter = ',', value_name = "N0,N0,...")]
    pub n0: Option<Vec<u32>>,
}

pub fn exec(args: &BracketsArgs) -> Result<(), CmdError> {
    let brackets =
        hyperband_brackets(args.eta, args.big_r, args.n0.as_deref()).map_err(usage)?;
    for bracket in &brackets {
        let rounds: Vec<String> = bracket
            .rounds
            .iter()
            .map(|round| format!("({},{})", round.n, round.r))
            .collect();
        println!(
            "bracket s={}: {}  alpha {:.2}%",
            bracket.s,
            rounds.join(" "),
            100.0 * bracket_alpha(bracket, args.big_r)
        );
    }
    println!(
        "overall alpha {:.2}%",
        100.0 * hyperband_alpha(&brackets, args.big_r)
    );
    if args.n0.is_none() {
        println!(
            "note: first-round sizes follow the canonical rule; hand-tuned lists \
             (e.g. 27,9,6,4 for eta=3, R=27) can be supplied with --n0"
        );
    }
    Ok(())
}
