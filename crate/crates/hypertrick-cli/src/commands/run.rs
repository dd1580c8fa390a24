//! `hypertrick run`: drive real subprocess workers through a study.

use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, ValueEnum};
use hypertrick_core::policy::{HyperTrickParams, PolicyParams, SuccessiveHalvingParams};
use hypertrick_core::study::RunParams;

use crate::io::read_space;
use crate::orchestrator::{WorkerState, run_study};

use super::{Cli, CmdError, usage};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RunPolicyArg {
    /// Asynchronous eviction; slots are reallocated as they free up.
    Hypertrick,
    /// Synchronized halving; needs one slot per worker.
    Sh,
    /// No eviction; every worker runs its full schedule.
    Grid,
}

#[derive(Args)]
pub struct RunArgs {
    /// Search-space file (JSON).
    #[arg(long, value_name = "FILE")]
    pub space: PathBuf,

    #[arg(long, value_enum)]
    pub policy: RunPolicyArg,

    /// Target eviction rate (ignored by grid).
    #[arg(long, default_value_t = 0.25)]
    pub r: f64,

    /// Configurations to evaluate.
    #[arg(long)]
    pub workers: u32,

    /// Concurrent worker slots.
    #[arg(long)]
    pub slots: u32,

    /// Phases per worker.
    #[arg(long)]
    pub phases: u32,

    /// Worker command template, split on whitespace.
    #[arg(long, value_name = "CMD")]
    pub cmd: String,

    /// Study log file (JSON Lines). Omit to keep records in memory only.
    #[arg(long, value_name = "FILE")]
    pub log: Option<PathBuf>,

    /// Seconds a worker may linger after STOP or its final CONTINUE.
    #[arg(long, default_value_t = 5.0)]
    pub grace: f64,
}

pub fn exec(cli: &Cli, args: &RunArgs) -> Result<(), CmdError> {
    let space = read_space(&args.space).map_err(|e| usage(format!("{e:#}")))?;
    let run = RunParams {
        w0: args.workers,
        r: args.r,
        n_phases: args.phases,
        n_nodes: args.slots,
        seed: cli.seed,
    };
    run.validate().map_err(usage)?;
    let policy = match args.policy {
        RunPolicyArg::Hypertrick => PolicyParams::HyperTrick(
            HyperTrickParams::new(args.workers, args.r, args.phases).map_err(usage)?,
        ),
        RunPolicyArg::Sh => {
            if args.slots < args.workers {
                return Err(usage(format!(
                    "the sh policy needs one slot per worker ({} slots for {} workers)",
                    args.slots, args.workers
                )));
            }
            PolicyParams::SuccessiveHalving(
                SuccessiveHalvingParams::new(args.r, args.phases).map_err(usage)?,
            )
        }
        RunPolicyArg::Grid => PolicyParams::Grid {
            n_phases: args.phases,
        },
    };
    let command: Vec<String> = args.cmd.split_whitespace().map(str::to_string).collect();
    if command.is_empty() {
        return Err(usage("worker command must not be empty"));
    }
    if !(args.grace >= 0.0 && args.grace.is_finite()) {
        return Err(usage("grace must be a non-negative number of seconds"));
    }

    let outcome = run_study(
        &space,
        &run,
        policy,
        &command,
        args.log.as_deref(),
        Duration::from_secs_f64(args.grace),
    )?;

    for note in &outcome.diagnostics {
        eprintln!("{note}");
    }
    let count = |state: WorkerState| {
        outcome
            .states
            .iter()
            .filter(|s| **s == state)
            .count()
    };
    println!(
        "workers {}  completed {}  terminated {}  failed {}",
        args.workers,
        count(WorkerState::Completed),
        count(WorkerState::Terminated),
        count(WorkerState::Failed),
    );
    match &outcome.best {
        Some(best) => {
            println!(
                "best worker {} metric {:.6} time {:.6}",
                best.worker, best.metric, best.time
            );
            let config =
                serde_json::to_string(&best.config).map_err(anyhow::Error::from)?;
            println!("config {config}");
        }
        None => println!("best none"),
    }
    Ok(())
}
