//! `hypertrick simulate`: run the deterministic scheduler and summarize it.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use hypertrick_core::analysis::summarize_with;
use hypertrick_core::sim::{PolicyChoice, Scenario, SchedulerKind, golden_scenario, simulate};
use hypertrick_core::study::{RunParams, check_rate};

use crate::io::{read_scenario, write_timeline};

use super::{Cli, CmdError, ensure_out_dir, usage};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    /// Asynchronous eviction with greedy node reallocation.
    Hypertrick,
    /// Successive halving; freed survivors migrate to the fastest free node.
    ShDynamic,
    /// Successive halving; survivors stay pinned to their first node.
    ShStatic,
    /// No eviction; nodes run their queues back to back.
    Grid,
}

impl PolicyArg {
    fn name(self) -> &'static str {
        match self {
            PolicyArg::Hypertrick => "hypertrick",
            PolicyArg::ShDynamic => "sh-dynamic",
            PolicyArg::ShStatic => "sh-static",
            PolicyArg::Grid => "grid",
        }
    }

    fn pairing(self, r: f64) -> (PolicyChoice, SchedulerKind) {
        match self {
            PolicyArg::Hypertrick => (PolicyChoice::HyperTrick { r }, SchedulerKind::GreedyRealloc),
            PolicyArg::ShDynamic => (
                PolicyChoice::SuccessiveHalving { evict_fraction: r },
                SchedulerKind::BarrierDynamic,
            ),
            PolicyArg::ShStatic => (
                PolicyChoice::SuccessiveHalving { evict_fraction: r },
                SchedulerKind::BarrierStatic,
            ),
            PolicyArg::Grid => (PolicyChoice::Grid, SchedulerKind::Contiguous),
        }
    }
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Scenario file (JSON).
    #[arg(
        long,
        value_name = "FILE",
        conflicts_with = "golden",
        required_unless_present = "golden"
    )]
    pub scenario: Option<PathBuf>,

    /// Use the built-in reference scenario.
    #[arg(long)]
    pub golden: bool,

    #[arg(long, value_enum)]
    pub policy: PolicyArg,

    /// Target eviction rate (ignored by grid).
    #[arg(long, default_value_t = 0.25)]
    pub r: f64,

    /// Assert the scenario has this many phases.
    #[arg(long)]
    pub phases: Option<u32>,

    /// Assert the scenario has this many workers.
    #[arg(long)]
    pub workers: Option<u32>,

    /// Assert the scenario has this many nodes.
    #[arg(long)]
    pub nodes: Option<u32>,
}

pub fn exec(cli: &Cli, args: &SimulateArgs) -> Result<(), CmdError> {
    check_rate(args.r).map_err(usage)?;
    let scenario: Scenario = match &args.scenario {
        Some(path) => read_scenario(path).map_err(|e| usage(format!("{e:#}")))?,
        None => golden_scenario(),
    };
    let run = RunParams {
        w0: args.workers.unwrap_or_else(|| scenario.w0()),
        r: args.r,
        n_phases: args.phases.unwrap_or(scenario.n_phases),
        n_nodes: args.nodes.unwrap_or_else(|| scenario.n_nodes()),
        seed: cli.seed,
    };
    scenario.check_run(&run).map_err(usage)?;

    let (policy, scheduler) = args.policy.pairing(args.r);
    let timeline = simulate(&scenario, policy, scheduler).map_err(usage)?;
    let summary = summarize_with(&timeline, Some(run.n_nodes), Some(run.n_phases))
        .map_err(|e| anyhow::anyhow!("summarizing the simulated timeline: {e}"))?;

    println!("makespan {:.6}", summary.makespan);
    println!("alpha {:.6}", summary.measured_alpha);
    println!("occupancy {:.6}", summary.occupancy);
    match &summary.best {
        Some(best) => println!(
            "best worker {} metric {:.6} time {:.6}",
            best.worker, best.metric, best.time
        ),
        None => println!("best none"),
    }
    let completers: Vec<String> = summary.completers.iter().map(u32::to_string).collect();
    println!("completers {}", completers.join(" "));

    if cli.out.is_some() {
        let dir = ensure_out_dir(cli)?;
        let path = dir.join(format!("timeline_{}.jsonl", args.policy.name()));
        write_timeline(&path, &timeline)?;
        println!("timeline {}", path.display());
    }
    Ok(())
}
