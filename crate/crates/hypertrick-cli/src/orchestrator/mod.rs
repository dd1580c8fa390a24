//! Subprocess study driver: real workloads under the pure decision policies.
//!
//! One sequential loop owns the policy engine and the study log. Every child
//! process gets a dedicated reader thread that forwards its protocol lines
//! over a channel; the loop handles messages strictly in arrival order, so
//! the decision sequence is reproducible from the persisted report order
//! alone. Children run concurrently, but nothing outside the loop mutates
//! study state.
//!
//! Worker protocol (line-delimited text): the child is launched with the
//! environment variables `HT_WORKER_ID`, `HT_NUM_PHASES`, and
//! `HT_CONFIG_JSON` (its configuration as one JSON object). After each phase
//! it prints `REPORT <phase_index> <metric>` on stdout and then reads one
//! line from stdin: `CONTINUE` to proceed or `STOP` to quit. Exiting with
//! status 0 after the final `CONTINUE` means the schedule was completed; any
//! other exit is a failure, unless `STOP` was sent first.

mod store;

pub use store::{
    KnowledgeStore, Replay, StoreDiagnostic, StoreRecord, read_store, replay_records,
    store_to_timeline,
};

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Child, Command, ExitStatus, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use anyhow::{Context, bail};
use hypertrick_core::policy::{DecisionOut, PolicyEngine, PolicyParams};
use hypertrick_core::sim::EventKind;
use hypertrick_core::space::{Configuration, SearchSpace, sample_configuration, validate_space};
use hypertrick_core::study::{Decision, PhaseReport, RunParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Lifecycle of one child. Transitions: Running -> AwaitingDecision ->
/// Running (Continue) | Terminated | Completed; any state -> Failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WorkerState {
    Running,
    AwaitingDecision,
    Completed,
    Terminated,
    Failed,
}

impl WorkerState {
    fn is_resolved(self) -> bool {
        matches!(
            self,
            WorkerState::Completed | WorkerState::Terminated | WorkerState::Failed
        )
    }
}

/// The winning configuration: highest last-reported metric, ties broken by
/// earlier report time, then lower worker id.
#[derive(Clone, Debug, PartialEq)]
pub struct BestConfig {
    pub worker: u32,
    pub metric: f64,
    pub time: f64,
    pub config: Configuration,
}

/// Everything a finished study leaves behind.
#[derive(Debug)]
pub struct StudyOutcome {
    pub records: Vec<StoreRecord>,
    pub best: Option<BestConfig>,
    /// Final state per worker id.
    pub states: Vec<WorkerState>,
    /// Human-readable notes about workers that misbehaved.
    pub diagnostics: Vec<String>,
}

enum LoopMsg {
    Report { worker: u32, phase: u32, metric: f64 },
    BadLine { worker: u32, line: String },
    Eof { worker: u32 },
}

struct WorkerHandle {
    slot: u32,
    config: Configuration,
    child: Child,
    state: WorkerState,
    /// Phase being executed (Running) or just reported (AwaitingDecision).
    next_phase: u32,
    /// Most recent report: (metric, timestamp).
    last: Option<(f64, f64)>,
    reader: Option<thread::JoinHandle<()>>,
}

/// Runs `command` once per sampled configuration under `policy`, multiplexing
/// `run.n_nodes` concurrent slots, and persists every record to `log` when
/// given. `grace` bounds how long a child may linger after `STOP` or its
/// final `CONTINUE` before it is killed.
///
/// A child that cannot be spawned aborts the whole study; a child that
/// crashes or breaks protocol is recorded as failed and its slot moves on to
/// the next configuration.
pub fn run_study(
    space: &SearchSpace,
    run: &RunParams,
    policy: PolicyParams,
    command: &[String],
    log: Option<&Path>,
    grace: Duration,
) -> anyhow::Result<StudyOutcome> {
    run.validate()?;
    if command.is_empty() {
        bail!("worker command must not be empty");
    }
    if policy.n_phases() != run.n_phases {
        bail!(
            "policy is built for {} phases but the study declares {}",
            policy.n_phases(),
            run.n_phases
        );
    }
    if policy.is_synchronized() && run.n_nodes < run.w0 {
        bail!(
            "the synchronized policy needs one slot per worker ({} slots for {} workers)",
            run.n_nodes,
            run.w0
        );
    }
    let violations = validate_space(space);
    if let Some(first) = violations.first() {
        bail!("invalid search space: {first}");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    let configs: Vec<Configuration> = (0..run.w0)
        .map(|_| sample_configuration(space, &mut rng))
        .collect();
    let store = match log {
        Some(path) => KnowledgeStore::create(path)?,
        None => KnowledgeStore::in_memory(),
    };
    let (tx, rx) = mpsc::channel();
    let mut study = Study {
        run: *run,
        command,
        grace,
        engine: PolicyEngine::new(policy, 0..run.w0),
        store,
        start: Instant::now(),
        tx,
        handles: (0..run.w0).map(|_| None).collect(),
        free_slots: (0..run.n_nodes).collect(),
        next_unlaunched: 0,
        resolved: 0,
        configs,
        diagnostics: Vec::new(),
    };
    let result = study.drive(&rx);
    study.shutdown();
    result.map(|()| study.finish())
}

struct Study<'a> {
    run: RunParams,
    command: &'a [String],
    grace: Duration,
    engine: PolicyEngine,
    store: KnowledgeStore,
    start: Instant,
    tx: mpsc::Sender<LoopMsg>,
    handles: Vec<Option<WorkerHandle>>,
    free_slots: BTreeSet<u32>,
    next_unlaunched: u32,
    resolved: u32,
    configs: Vec<Configuration>,
    diagnostics: Vec<String>,
}

impl Study<'_> {
    fn drive(&mut self, rx: &mpsc::Receiver<LoopMsg>) -> anyhow::Result<()> {
        self.launch_pending()?;
        while self.resolved < self.run.w0 {
            // Cannot block forever: every unresolved worker either has a live
            // reader thread or is waiting on a slot that a live worker holds.
            let msg = rx.recv().expect("the study holds its own sender");
            match msg {
                LoopMsg::Report {
                    worker,
                    phase,
                    metric,
                } => self.handle_report(worker, phase, metric)?,
                LoopMsg::BadLine { worker, line } => {
                    self.fail_worker(worker, &format!("protocol violation: {line:?}"))?;
                }
                LoopMsg::Eof { worker } => self.handle_eof(worker)?,
            }
        }
        Ok(())
    }

    /// Seconds since study start, on the microsecond grid.
    fn now(&self) -> f64 {
        let t = self.start.elapsed().as_secs_f64();
        (t * 1e6).round() / 1e6
    }

    fn launch_pending(&mut self) -> anyhow::Result<()> {
        while self.next_unlaunched < self.run.w0 {
            let Some(&slot) = self.free_slots.iter().next() else {
                break;
            };
            self.free_slots.remove(&slot);
            let worker = self.next_unlaunched;
            self.next_unlaunched += 1;
            self.launch(worker, slot)?;
        }
        Ok(())
    }

    fn launch(&mut self, worker: u32, slot: u32) -> anyhow::Result<()> {
        let config = self.configs[worker as usize].clone();
        let config_json = serde_json::to_string(&config)?;
        let mut child = Command::new(&self.command[0])
            .args(&self.command[1..])
            .env("HT_WORKER_ID", worker.to_string())
            .env("HT_NUM_PHASES", self.run.n_phases.to_string())
            .env("HT_CONFIG_JSON", &config_json)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .with_context(|| format!("cannot launch worker {worker} ({})", self.command[0]))?;
        let stdout = child.stdout.take().expect("child stdout was piped");
        let tx = self.tx.clone();
        let reader = thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if line.trim().is_empty() {
                    continue;
                }
                let msg = match parse_report_line(&line) {
                    Some((phase, metric)) => LoopMsg::Report {
                        worker,
                        phase,
                        metric,
                    },
                    None => LoopMsg::BadLine { worker, line },
                };
                if tx.send(msg).is_err() {
                    return;
                }
            }
            let _ = tx.send(LoopMsg::Eof { worker });
        });
        let ts = self.now();
        self.store.append(StoreRecord {
            ts,
            kind: EventKind::Launch,
            worker,
            slot: Some(slot),
            phase: None,
            metric: None,
            decision: None,
            config: Some(config.clone()),
        })?;
        self.handles[worker as usize] = Some(WorkerHandle {
            slot,
            config,
            child,
            state: WorkerState::Running,
            next_phase: 0,
            last: None,
            reader: Some(reader),
        });
        Ok(())
    }

    fn handle_report(&mut self, worker: u32, phase: u32, metric: f64) -> anyhow::Result<()> {
        let (state, expected, slot) = {
            let h = self.handles[worker as usize]
                .as_ref()
                .expect("reports only come from launched workers");
            (h.state, h.next_phase, h.slot)
        };
        match state {
            WorkerState::Running => {}
            WorkerState::AwaitingDecision => {
                return self.fail_worker(worker, "reported again while a decision was pending");
            }
            // A resolved worker's late output changes nothing.
            _ => return Ok(()),
        }
        if phase != expected {
            return self.fail_worker(
                worker,
                &format!("reported phase {phase} where phase {expected} was expected"),
            );
        }
        if !metric.is_finite() {
            return self.fail_worker(worker, "reported a non-finite metric");
        }
        let ts = self.now();
        {
            let h = self.handles[worker as usize].as_mut().unwrap();
            h.state = WorkerState::AwaitingDecision;
            h.last = Some((metric, ts));
        }
        self.store.append(StoreRecord {
            ts,
            kind: EventKind::Report,
            worker,
            slot: Some(slot),
            phase: Some(phase),
            metric: Some(metric),
            decision: None,
            config: None,
        })?;
        let decisions = self.engine.on_report(&PhaseReport {
            worker,
            config: worker,
            phase,
            metric,
            time: ts,
        });
        self.apply_decisions(&decisions)
    }

    fn handle_eof(&mut self, worker: u32) -> anyhow::Result<()> {
        // The reader sends Eof as its last message; reclaim its thread.
        if let Some(handle) = self.handles[worker as usize].as_mut()
            && let Some(reader) = handle.reader.take()
        {
            let _ = reader.join();
        }
        let state = self.handles[worker as usize].as_ref().map(|h| h.state);
        match state {
            Some(WorkerState::Running) => {
                self.fail_worker(worker, "exited without completing its schedule")
            }
            Some(WorkerState::AwaitingDecision) => {
                self.fail_worker(worker, "exited while its decision was pending")
            }
            _ => Ok(()),
        }
    }

    fn apply_decisions(&mut self, decisions: &[DecisionOut]) -> anyhow::Result<()> {
        for d in decisions {
            let slot = self.handles[d.worker as usize]
                .as_ref()
                .expect("decisions target launched workers")
                .slot;
            let ts = self.now();
            self.store.append(StoreRecord {
                ts,
                kind: EventKind::Decision,
                worker: d.worker,
                slot: Some(slot),
                phase: Some(d.phase),
                metric: None,
                decision: Some(d.decision),
                config: None,
            })?;
            match d.decision {
                Decision::Continue => self.continue_worker(d.worker)?,
                Decision::Complete => self.complete_worker(d.worker, d.phase)?,
                Decision::Terminate => self.terminate_worker(d.worker, d.phase)?,
            }
        }
        Ok(())
    }

    fn continue_worker(&mut self, worker: u32) -> anyhow::Result<()> {
        let handle = self.handles[worker as usize].as_mut().unwrap();
        handle.next_phase += 1;
        if send_line(&mut handle.child, "CONTINUE") {
            handle.state = WorkerState::Running;
            Ok(())
        } else {
            self.fail_worker(worker, "exited before reading CONTINUE")
        }
    }

    fn complete_worker(&mut self, worker: u32, phase: u32) -> anyhow::Result<()> {
        let grace = self.grace;
        let handle = self.handles[worker as usize].as_mut().unwrap();
        // The final phase must still be acknowledged; the child then exits 0.
        let acked = send_line(&mut handle.child, "CONTINUE");
        let status = await_exit(&mut handle.child, grace);
        match status {
            Some(status) if acked && status.success() => {
                handle.state = WorkerState::Completed;
                let slot = handle.slot;
                let ts = self.now();
                self.store.append(StoreRecord {
                    ts,
                    kind: EventKind::Complete,
                    worker,
                    slot: Some(slot),
                    phase: Some(phase),
                    metric: None,
                    decision: None,
                    config: None,
                })?;
                self.resolve_slot(worker)
            }
            _ => self.fail_worker(worker, "did not exit cleanly after its final phase"),
        }
    }

    fn terminate_worker(&mut self, worker: u32, phase: u32) -> anyhow::Result<()> {
        let grace = self.grace;
        let handle = self.handles[worker as usize].as_mut().unwrap();
        // Best effort: the child may already be gone, which is fine here.
        send_line(&mut handle.child, "STOP");
        if await_exit(&mut handle.child, grace).is_none() {
            let _ = handle.child.kill();
            let _ = handle.child.wait();
        }
        handle.state = WorkerState::Terminated;
        let slot = handle.slot;
        let ts = self.now();
        self.store.append(StoreRecord {
            ts,
            kind: EventKind::Terminate,
            worker,
            slot: Some(slot),
            phase: Some(phase),
            metric: None,
            decision: None,
            config: None,
        })?;
        self.resolve_slot(worker)
    }

    fn fail_worker(&mut self, worker: u32, reason: &str) -> anyhow::Result<()> {
        let handle = self.handles[worker as usize].as_mut().unwrap();
        if handle.state.is_resolved() {
            return Ok(());
        }
        self.diagnostics.push(format!("worker {worker}: {reason}"));
        let _ = handle.child.kill();
        let _ = handle.child.wait();
        handle.state = WorkerState::Failed;
        let slot = handle.slot;
        let phase = handle.next_phase;
        let ts = self.now();
        self.store.append(StoreRecord {
            ts,
            kind: EventKind::Failure,
            worker,
            slot: Some(slot),
            phase: Some(phase),
            metric: None,
            decision: None,
            config: None,
        })?;
        // The death may release a synchronized barrier for everyone else.
        let flushed = self.engine.on_failure(worker);
        self.resolve_slot(worker)?;
        self.apply_decisions(&flushed)
    }

    /// Marks `worker` done, returns its slot to the pool, and starts the next
    /// configuration if one is waiting.
    fn resolve_slot(&mut self, worker: u32) -> anyhow::Result<()> {
        self.resolved += 1;
        let slot = self.handles[worker as usize].as_ref().unwrap().slot;
        self.free_slots.insert(slot);
        self.launch_pending()
    }

    /// Kills and reaps anything still alive (the abort path) and joins every
    /// reader thread.
    fn shutdown(&mut self) {
        for handle in self.handles.iter_mut().flatten() {
            if !handle.state.is_resolved() {
                let _ = handle.child.kill();
                let _ = handle.child.wait();
                handle.state = WorkerState::Failed;
            }
            if let Some(reader) = handle.reader.take() {
                let _ = reader.join();
            }
        }
    }

    fn finish(self) -> StudyOutcome {
        let mut best: Option<BestConfig> = None;
        for (worker, handle) in self.handles.iter().enumerate() {
            let handle = handle.as_ref().expect("every worker launches before the study ends");
            let Some((metric, time)) = handle.last else {
                continue;
            };
            let better = match &best {
                None => true,
                Some(b) => metric > b.metric || (metric == b.metric && time < b.time),
            };
            if better {
                best = Some(BestConfig {
                    worker: worker as u32,
                    metric,
                    time,
                    config: handle.config.clone(),
                });
            }
        }
        StudyOutcome {
            records: self.store.into_records(),
            best,
            states: self
                .handles
                .iter()
                .map(|h| h.as_ref().unwrap().state)
                .collect(),
            diagnostics: self.diagnostics,
        }
    }
}

fn parse_report_line(line: &str) -> Option<(u32, f64)> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some("REPORT") {
        return None;
    }
    let phase = parts.next()?.parse().ok()?;
    let metric = parts.next()?.parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    Some((phase, metric))
}

fn send_line(child: &mut Child, line: &str) -> bool {
    let Some(stdin) = child.stdin.as_mut() else {
        return false;
    };
    writeln!(stdin, "{line}").and_then(|()| stdin.flush()).is_ok()
}

/// Polls for exit until `grace` elapses.
fn await_exit(child: &mut Child, grace: Duration) -> Option<ExitStatus> {
    let deadline = Instant::now() + grace;
    loop {
        match child.try_wait() {
            Ok(Some(status)) => return Some(status),
            Ok(None) => {
                if Instant::now() >= deadline {
                    return None;
                }
                thread::sleep(Duration::from_millis(2));
            }
            Err(_) => return None,
        }
    }
}
