//! Demonstration workload speaking the study worker protocol.
//!
//! Two modes:
//!
//! * `affine`: the metric for phase `p` is `a*p + b`, with `a` and `b` taken
//!   from `HT_CONFIG_JSON` when present. Useful for fast protocol tests; the
//!   optional fault flags can make a chosen worker crash, babble, or repeat
//!   a phase.
//! * `golden`: replays the reference scenario. The worker looks up its own
//!   metrics and report instants from the deterministic simulation and
//!   schedules each report at `anchor + time*scale`, with a small stagger
//!   separating reports the simulation put at the same instant. Feeding all
//!   sixteen workers through the orchestrator therefore reproduces the
//!   simulated arrival order on a real clock.
//!
//! Protocol: print `REPORT <phase> <metric>`, read one line, continue on
//! `CONTINUE`, exit 0 on `STOP`. Exit 0 after the last phase's `CONTINUE`.

use std::io::{BufRead, Write};
use std::process::exit;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use clap::{Parser, ValueEnum};
use hypertrick_core::sim::{EventKind, PolicyChoice, SchedulerKind, golden_scenario, simulate};
use hypertrick_core::space::Configuration;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Affine,
    Golden,
}

#[derive(Parser)]
#[command(name = "hypertrick-demo-worker", disable_help_subcommand = true)]
struct Args {
    #[arg(long, value_enum, default_value = "affine")]
    mode: Mode,

    /// Unix epoch seconds all workers use as their common time origin
    /// (golden mode). Defaults to this process's start time.
    #[arg(long)]
    anchor: Option<f64>,

    /// Wall seconds per simulated time unit (golden mode).
    #[arg(long, default_value_t = 0.5)]
    scale: f64,

    /// Wall seconds separating reports that the simulation scheduled at the
    /// same instant (golden mode).
    #[arg(long, default_value_t = 0.002)]
    stagger: f64,

    /// Sleep this long before each report (affine mode).
    #[arg(long, default_value_t = 1)]
    sleep_ms: u64,

    /// Apply the fault flags only to this worker id.
    #[arg(long)]
    fail_worker: Option<u32>,

    /// Exit with a nonzero status just before reporting this phase.
    #[arg(long)]
    fail_at: Option<u32>,

    /// Print a non-protocol line instead of this phase's report.
    #[arg(long)]
    garble_at: Option<u32>,

    /// Report this phase twice in a row after being told to continue.
    #[arg(long)]
    repeat_at: Option<u32>,
}

fn env_u32(name: &str) -> u32 {
    match std::env::var(name).ok().and_then(|v| v.parse().ok()) {
        Some(v) => v,
        None => {
            eprintln!("demo worker: {name} must be set to an integer");
            exit(1);
        }
    }
}

fn main() {
    let args = Args::parse();
    let worker = env_u32("HT_WORKER_ID");
    let n_phases = env_u32("HT_NUM_PHASES");
    let faulty = args.fail_worker.is_none_or(|id| id == worker);

    let plan = match args.mode {
        Mode::Affine => affine_plan(worker, n_phases, args.sleep_ms),
        Mode::Golden => golden_plan(worker, n_phases, &args),
    };

    let stdin = std::io::stdin();
    let mut input = stdin.lock();
    let stdout = std::io::stdout();
    let mut output = stdout.lock();

    let mut phase = 0u32;
    let mut repeated = false;
    while phase < n_phases {
        if faulty && args.fail_at == Some(phase) {
            exit(7);
        }
        plan.wait_for(phase);
        if faulty && args.garble_at == Some(phase) {
            let _ = writeln!(output, "still warming up the replay buffer");
        } else {
            let metric = plan.metric(phase);
            let _ = writeln!(output, "REPORT {phase} {metric}");
        }
        if output.flush().is_err() {
            exit(1);
        }
        let mut line = String::new();
        match input.read_line(&mut line) {
            Ok(0) | Err(_) => exit(1),
            Ok(_) => {}
        }
        match line.trim() {
            "CONTINUE" => {
                if faulty && args.repeat_at == Some(phase) && !repeated {
                    repeated = true;
                } else {
                    phase += 1;
                }
            }
            "STOP" => exit(0),
            _ => exit(1),
        }
    }
}

/// When to report each phase and with what metric.
struct Plan {
    /// Absolute wall deadlines per phase; pauses are relative when empty.
    deadlines: Vec<SystemTime>,
    pause: Duration,
    metrics: Vec<f64>,
    /// Fallback for phases past the planned metrics.
    slope: f64,
    intercept: f64,
}

impl Plan {
    fn wait_for(&self, phase: u32) {
        match self.deadlines.get(phase as usize) {
            Some(deadline) => sleep_until(*deadline),
            None => std::thread::sleep(self.pause),
        }
    }

    fn metric(&self, phase: u32) -> f64 {
        match self.metrics.get(phase as usize) {
            Some(m) => *m,
            None => self.slope * f64::from(phase) + self.intercept,
        }
    }
}

fn affine_plan(worker: u32, _n_phases: u32, sleep_ms: u64) -> Plan {
    let config: Configuration = std::env::var("HT_CONFIG_JSON")
        .ok()
        .and_then(|raw| serde_json::from_str(&raw).ok())
        .unwrap_or_default();
    let real = |key: &str, default: f64| {
        config
            .get(key)
            .and_then(|v| v.as_real())
            .unwrap_or(default)
    };
    Plan {
        deadlines: Vec::new(),
        pause: Duration::from_millis(sleep_ms),
        metrics: Vec::new(),
        slope: real("a", 1.0),
        intercept: real("b", f64::from(worker)),
    }
}

fn golden_plan(worker: u32, n_phases: u32, args: &Args) -> Plan {
    let scenario = golden_scenario();
    if worker >= scenario.w0() || n_phases != scenario.n_phases {
        eprintln!(
            "demo worker: golden mode needs worker id < {} and {} phases",
            scenario.w0(),
            scenario.n_phases
        );
        exit(1);
    }
    let timeline = simulate(
        &scenario,
        PolicyChoice::HyperTrick { r: 0.25 },
        SchedulerKind::GreedyRealloc,
    )
    .expect("the reference scenario always simulates");

    let anchor = match args.anchor {
        Some(epoch) => UNIX_EPOCH + Duration::from_secs_f64(epoch),
        None => SystemTime::now(),
    };
    // Offset ties by their rank among same-instant reports so wall-clock
    // arrival order matches the simulation's canonical order.
    let mut deadlines = Vec::new();
    let mut last_offset = 0.0f64;
    let reports: Vec<_> = timeline.events_of_kind(EventKind::Report).collect();
    let mut group_start = 0;
    for (i, event) in reports.iter().enumerate() {
        if i > 0 && event.time != reports[i - 1].time {
            group_start = i;
        }
        if event.worker == worker {
            let offset = event.time * args.scale + (i - group_start) as f64 * args.stagger;
            deadlines.push(anchor + Duration::from_secs_f64(offset));
            last_offset = offset;
        }
    }
    // Past the simulated trace (only reachable if decisions diverge), keep
    // reporting on a steady cadence rather than bailing out.
    while deadlines.len() < n_phases as usize {
        last_offset += args.scale;
        deadlines.push(anchor + Duration::from_secs_f64(last_offset));
    }
    Plan {
        deadlines,
        pause: Duration::ZERO,
        metrics: scenario.workers[worker as usize].metrics.clone(),
        slope: 0.0,
        intercept: 0.0,
    }
}

fn sleep_until(deadline: SystemTime) {
    while let Ok(remaining) = deadline.duration_since(SystemTime::now()) {
        if remaining.is_zero() {
            break;
        }
        std::thread::sleep(remaining);
    }
}
