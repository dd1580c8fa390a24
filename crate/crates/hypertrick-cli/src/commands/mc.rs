//! `hypertrick mc`: Monte-Carlo check of the expected-survivors formula.

use clap::Args;
use hypertrick_core::policy::{HyperTrickParams, expected_workers};
use hypertrick_core::sim::{MetricModel, monte_carlo_eviction};

use super::{Cli, CmdError, usage};

#[derive(Args)]
pub struct McArgs {
    #[arg(long, default_value_t = 100)]
    pub workers: u32,

    #[arg(long, default_value_t = 0.25)]
    pub r: f64,

    #[arg(long, default_value_t = 10)]
    pub phases: u32,

    /// Independent decision processes to average over.
    #[arg(long, default_value_t = 10_000)]
    pub runs: u32,
}

pub fn exec(cli: &Cli, args: &McArgs) -> Result<(), CmdError> {
    if args.runs == 0 {
        return Err(usage("runs must be at least 1"));
    }
    let params =
        HyperTrickParams::new(args.workers, args.r, args.phases).map_err(usage)?;
    let result = monte_carlo_eviction(&params, args.runs, MetricModel::Uniform01, cli.seed);
    println!("{:>5}  {:>14}  {:>14}  {:>9}", "phase", "mean_survivors", "predicted", "rel_err");
    for (phase, mean) in result.mean_survivors.iter().enumerate() {
        let predicted = expected_workers(args.workers, args.r, phase as u32);
        let rel_err = (mean - predicted).abs() / predicted;
        println!("{phase:>5}  {mean:>14.4}  {predicted:>14.4}  {rel_err:>9.6}");
    }
    Ok(())
}
