//! Deterministic discrete-event simulation of phased studies on
//! heterogeneous nodes.
//!
//! A [`Scenario`] fixes everything ahead of time: node speed factors and each
//! worker's per-phase metrics, work units, and optional mid-phase failure.
//! [`simulate`] runs it under a policy/scheduler pairing and returns a
//! [`Timeline`] of events. Identical inputs produce identical timelines, byte
//! for byte: event times are quantized to a microsecond grid so arithmetic
//! noise cannot reorder ties, and simultaneous events follow a fixed total
//! order (reports and failures, then decisions, then terminations and
//! completions, then launches; worker id ascending within each group).

mod barrier;
mod golden;
mod greedy;
mod monte_carlo;
mod synthetic;

pub use golden::golden_scenario;
pub use monte_carlo::{McResult, MetricModel, monte_carlo_eviction};
pub use synthetic::{CostModel, MetricModelSpec, ValueDist, synthetic_scenario};

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::math;
use crate::policy::{
    HyperTrickParams, PolicyEngine, PolicyParams, SuccessiveHalvingParams,
};
use crate::study::{Decision, NodeSpec, ParamError, RunParams};

/// How freed capacity and phase boundaries are handled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchedulerKind {
    /// No barriers: a node freed by termination or completion immediately
    /// launches the lowest-index unlaunched configuration.
    GreedyRealloc,
    /// Global barrier after each phase; survivors are dispatched FIFO by
    /// worker id to the earliest-available node (free preemption).
    BarrierDynamic,
    /// Global barrier, but each worker is pinned to the node that launched
    /// it, with FIFO service among that node's surviving workers.
    BarrierStatic,
    /// No eviction and no preemption: nodes run their queues back to back.
    Contiguous,
}

/// Policy choice by rate; full parameters are completed from the scenario.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PolicyChoice {
    HyperTrick { r: f64 },
    SuccessiveHalving { evict_fraction: f64 },
    Grid,
}

/// A worker to die at `phase`, a `frac` fraction of the way through it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailPoint {
    pub phase: u32,
    pub frac: f64,
}

/// One preplanned worker: the metric it will report at the end of each phase
/// and the work units each phase costs (empty means 1.0 everywhere).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkerSpec {
    pub id: u32,
    pub metrics: Vec<f64>,
    #[serde(default)]
    pub work: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fail: Option<FailPoint>,
}

impl WorkerSpec {
    /// Work units for `phase`; an empty list means unit work per phase.
    pub fn work_units(&self, phase: u32) -> f64 {
        self.work.get(phase as usize).copied().unwrap_or(1.0)
    }
}

/// A fully determined toy problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub nodes: Vec<NodeSpec>,
    pub n_phases: u32,
    pub workers: Vec<WorkerSpec>,
}

impl Scenario {
    pub fn w0(&self) -> u32 {
        self.workers.len() as u32
    }

    pub fn n_nodes(&self) -> u32 {
        self.nodes.len() as u32
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_phases == 0 {
            return Err(SimError::Param(ParamError::NoPhases));
        }
        if self.nodes.is_empty() {
            return Err(SimError::Param(ParamError::NoNodes));
        }
        if self.workers.is_empty() {
            return Err(SimError::Param(ParamError::NoWorkers));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id != i as u32 {
                return Err(SimError::NodeIdsNotSequential);
            }
            if !(node.speed.is_finite() && node.speed > 0.0) {
                return Err(SimError::BadNodeSpeed { node: node.id });
            }
        }
        for (i, worker) in self.workers.iter().enumerate() {
            let id = worker.id;
            if id != i as u32 {
                return Err(SimError::WorkerIdsNotSequential);
            }
            if worker.metrics.len() != self.n_phases as usize {
                return Err(SimError::MetricsLengthMismatch { worker: id });
            }
            if worker.metrics.iter().any(|m| !m.is_finite()) {
                return Err(SimError::NonFiniteMetric { worker: id });
            }
            if !worker.work.is_empty() && worker.work.len() != self.n_phases as usize {
                return Err(SimError::WorkLengthMismatch { worker: id });
            }
            if worker.work.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                return Err(SimError::BadWork { worker: id });
            }
            if let Some(fail) = worker.fail
                && (fail.phase >= self.n_phases || !(0.0..1.0).contains(&fail.frac))
            {
                return Err(SimError::BadFailPoint { worker: id });
            }
        }
        Ok(())
    }

    /// Confirms externally supplied study dimensions match this scenario.
    pub fn check_run(&self, run: &RunParams) -> Result<(), SimError> {
        run.validate().map_err(SimError::Param)?;
        if run.w0 != self.w0() {
            return Err(SimError::RunMismatch {
                field: "workers",
                expected: self.w0(),
                got: run.w0,
            });
        }
        if run.n_nodes != self.n_nodes() {
            return Err(SimError::RunMismatch {
                field: "nodes",
                expected: self.n_nodes(),
                got: run.n_nodes,
            });
        }
        if run.n_phases != self.n_phases {
            return Err(SimError::RunMismatch {
                field: "phases",
                expected: self.n_phases,
                got: run.n_phases,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SimError {
    Param(ParamError),
    NodeIdsNotSequential,
    WorkerIdsNotSequential,
    BadNodeSpeed { node: u32 },
    MetricsLengthMismatch { worker: u32 },
    NonFiniteMetric { worker: u32 },
    WorkLengthMismatch { worker: u32 },
    BadWork { worker: u32 },
    BadFailPoint { worker: u32 },
    RunMismatch { field: &'static str, expected: u32, got: u32 },
    PolicySchedulerMismatch { scheduler: SchedulerKind },
    BadModel { reason: &'static str },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Param(e) => e.fmt(f),
            SimError::NodeIdsNotSequential => f.write_str("node ids must be 0..N-1 in order"),
            SimError::WorkerIdsNotSequential => f.write_str("worker ids must be 0..W_0-1 in order"),
            SimError::BadNodeSpeed { node } => {
                write!(f, "node {node}: speed must be positive and finite")
            }
            SimError::MetricsLengthMismatch { worker } => {
                write!(f, "worker {worker}: metrics list must have one entry per phase")
            }
            SimError::NonFiniteMetric { worker } => {
                write!(f, "worker {worker}: metrics must be finite")
            }
            SimError::WorkLengthMismatch { worker } => write!(
                f,
                "worker {worker}: work list must be empty or have one entry per phase"
            ),
            SimError::BadWork { worker } => {
                write!(f, "worker {worker}: work units must be positive and finite")
            }
            SimError::BadFailPoint { worker } => write!(
                f,
                "worker {worker}: failure point needs phase < n_phases and frac in [0,1)"
            ),
            SimError::RunMismatch {
                field,
                expected,
                got,
            } => write!(
                f,
                "--{field} {got} does not match the scenario ({expected})"
            ),
            SimError::PolicySchedulerMismatch { scheduler } => write!(
                f,
                "policy cannot run under the {scheduler:?} scheduler"
            ),
            SimError::BadModel { reason } => write!(f, "invalid model: {reason}"),
        }
    }
}

impl core::error::Error for SimError {}

impl From<ParamError> for SimError {
    fn from(e: ParamError) -> Self {
        SimError::Param(e)
    }
}

/// What happened at an instant of simulated (or wall) time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Launch,
    Report,
    Decision,
    Terminate,
    Complete,
    Failure,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            EventKind::Launch => "launch",
            EventKind::Report => "report",
            EventKind::Decision => "decision",
            EventKind::Terminate => "terminate",
            EventKind::Complete => "complete",
            EventKind::Failure => "failure",
        };
        f.write_str(name)
    }
}

/// One timeline record. `start` is carried by report and failure events (the
/// moment the phase began executing) so node occupancy is computable from the
/// timeline alone.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    #[serde(rename = "worker_id")]
    pub worker: u32,
    #[serde(rename = "node_id", default)]
    pub node: Option<u32>,
    #[serde(rename = "phase_index", default)]
    pub phase: Option<u32>,
    #[serde(default)]
    pub metric: Option<f64>,
    #[serde(default)]
    pub decision: Option<Decision>,
    #[serde(default)]
    pub start: Option<f64>,
}

/// The full event record of one run, in canonical order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Timeline {
    pub events: Vec<Event>,
}

impl Timeline {
    /// Time span from the first event to the last.
    pub fn makespan(&self) -> f64 {
        let first = self.events.first().map_or(0.0, |e| e.time);
        let last = self.events.last().map_or(0.0, |e| e.time);
        last - first
    }

    pub fn events_of_kind(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    /// Workers that completed the full schedule, ascending.
    pub fn completers(&self) -> Vec<u32> {
        let mut out: Vec<u32> = self
            .events_of_kind(EventKind::Complete)
            .map(|e| e.worker)
            .collect();
        out.sort_unstable();
        out
    }

    /// (worker, phase, decision) triples in timeline order.
    pub fn decisions(&self) -> Vec<(u32, u32, Decision)> {
        self.events_of_kind(EventKind::Decision)
            .map(|e| {
                (
                    e.worker,
                    e.phase.expect("decision events carry a phase"),
                    e.decision.expect("decision events carry a decision"),
                )
            })
            .collect()
    }

    /// Workers terminated at each phase: `kills[p]` lists ids, ascending.
    pub fn kill_sets(&self, n_phases: u32) -> Vec<Vec<u32>> {
        let mut kills = alloc::vec![Vec::new(); n_phases as usize];
        for (worker, phase, decision) in self.decisions() {
            if decision == Decision::Terminate {
                kills[phase as usize].push(worker);
            }
        }
        for set in &mut kills {
            set.sort_unstable();
        }
        kills
    }
}

/// Snaps a time to the microsecond grid. All scheduled event times pass
/// through this, so times that are equal as decimals compare equal as floats
/// and simultaneous-event ordering is stable.
pub(crate) fn quantize(t: f64) -> f64 {
    math::round(t * 1e6) / 1e6
}

/// Canonical ordering of simultaneous events.
pub(crate) fn kind_rank(kind: EventKind) -> u8 {
    match kind {
        EventKind::Report | EventKind::Failure => 0,
        EventKind::Decision => 1,
        EventKind::Terminate | EventKind::Complete => 2,
        EventKind::Launch => 3,
    }
}

pub(crate) fn sort_events(events: &mut [Event]) {
    events.sort_by(|a, b| {
        a.time
            .total_cmp(&b.time)
            .then_with(|| kind_rank(a.kind).cmp(&kind_rank(b.kind)))
            .then_with(|| a.worker.cmp(&b.worker))
    });
}

/// Runs `scenario` under `policy` and `scheduler`.
///
/// Pairings are fixed: the asynchronous policy requires [`SchedulerKind::GreedyRealloc`],
/// successive halving requires one of the barrier schedulers, and grid search
/// requires [`SchedulerKind::Contiguous`]. Anything else is a mismatch error.
pub fn simulate(
    scenario: &Scenario,
    policy: PolicyChoice,
    scheduler: SchedulerKind,
) -> Result<Timeline, SimError> {
    scenario.validate()?;
    let params = match policy {
        PolicyChoice::HyperTrick { r } => PolicyParams::HyperTrick(HyperTrickParams::new(
            scenario.w0(),
            r,
            scenario.n_phases,
        )?),
        PolicyChoice::SuccessiveHalving { evict_fraction } => PolicyParams::SuccessiveHalving(
            SuccessiveHalvingParams::new(evict_fraction, scenario.n_phases)?,
        ),
        PolicyChoice::Grid => PolicyParams::Grid {
            n_phases: scenario.n_phases,
        },
    };
    let engine = PolicyEngine::new(params, 0..scenario.w0());
    match (policy, scheduler) {
        (PolicyChoice::HyperTrick { .. }, SchedulerKind::GreedyRealloc)
        | (PolicyChoice::Grid, SchedulerKind::Contiguous) => {
            Ok(greedy::run_greedy(scenario, engine))
        }
        (PolicyChoice::SuccessiveHalving { .. }, SchedulerKind::BarrierDynamic) => {
            Ok(barrier::run_barrier(scenario, engine, false))
        }
        (PolicyChoice::SuccessiveHalving { .. }, SchedulerKind::BarrierStatic) => {
            Ok(barrier::run_barrier(scenario, engine, true))
        }
        _ => Err(SimError::PolicySchedulerMismatch { scheduler }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn tiny_scenario() -> Scenario {
        Scenario {
            nodes: vec![NodeSpec { id: 0, speed: 1.0 }],
            n_phases: 2,
            workers: vec![WorkerSpec {
                id: 0,
                metrics: vec![1.0, 2.0],
                work: vec![],
                fail: None,
            }],
        }
    }

    #[test]
    fn quantize_snaps_decimal_grid_sums() {
        // 4.8 + 1.2 accumulates float error; quantized they tie exactly.
        let sum = 4.0 + 0.8 + 1.2;
        assert_eq!(quantize(sum), 6.0);
        assert_eq!(quantize(1.1 + 1.1 + 1.1 + 1.1), 4.4);
        assert_eq!(quantize(0.1), 0.1);
    }

    #[test]
    fn validate_accepts_the_tiny_scenario() {
        assert_eq!(tiny_scenario().validate(), Ok(()));
    }

    #[test]
    fn validate_rejects_structural_problems() {
        let mut s = tiny_scenario();
        s.workers[0].metrics = vec![1.0];
        assert_eq!(
            s.validate(),
            Err(SimError::MetricsLengthMismatch { worker: 0 })
        );

        let mut s = tiny_scenario();
        s.nodes[0].speed = 0.0;
        assert_eq!(s.validate(), Err(SimError::BadNodeSpeed { node: 0 }));

        let mut s = tiny_scenario();
        s.workers[0].id = 3;
        assert_eq!(s.validate(), Err(SimError::WorkerIdsNotSequential));

        let mut s = tiny_scenario();
        s.workers[0].fail = Some(FailPoint {
            phase: 2,
            frac: 0.5,
        });
        assert_eq!(s.validate(), Err(SimError::BadFailPoint { worker: 0 }));

        let mut s = tiny_scenario();
        s.workers[0].work = vec![1.0, 0.0];
        assert_eq!(s.validate(), Err(SimError::BadWork { worker: 0 }));
    }

    #[test]
    fn check_run_reports_the_offending_field() {
        let s = tiny_scenario();
        let run = RunParams {
            w0: 2,
            r: 0.25,
            n_phases: 2,
            n_nodes: 1,
            seed: 0,
        };
        assert_eq!(
            s.check_run(&run),
            Err(SimError::RunMismatch {
                field: "workers",
                expected: 1,
                got: 2
            })
        );
    }

    #[test]
    fn mismatched_pairings_are_rejected() {
        let s = tiny_scenario();
        for (policy, scheduler) in [
            (
                PolicyChoice::HyperTrick { r: 0.25 },
                SchedulerKind::Contiguous,
            ),
            (PolicyChoice::Grid, SchedulerKind::GreedyRealloc),
            (
                PolicyChoice::SuccessiveHalving {
                    evict_fraction: 0.25,
                },
                SchedulerKind::GreedyRealloc,
            ),
            (PolicyChoice::Grid, SchedulerKind::BarrierDynamic),
        ] {
            assert_eq!(
                simulate(&s, policy, scheduler),
                Err(SimError::PolicySchedulerMismatch { scheduler })
            );
        }
    }

    #[test]
    fn bad_rate_surfaces_as_param_error() {
        let s = tiny_scenario();
        assert_eq!(
            simulate(
                &s,
                PolicyChoice::HyperTrick { r: 1.5 },
                SchedulerKind::GreedyRealloc
            ),
            Err(SimError::Param(ParamError::RateOutOfRange))
        );
    }

    #[test]
    fn event_order_groups_kinds_at_equal_times() {
        let mk = |kind, worker| Event {
            time: 1.0,
            kind,
            worker,
            node: None,
            phase: None,
            metric: None,
            decision: None,
            start: None,
        };
        let mut events = vec![
            mk(EventKind::Launch, 0),
            mk(EventKind::Complete, 1),
            mk(EventKind::Report, 2),
            mk(EventKind::Decision, 1),
            mk(EventKind::Report, 1),
        ];
        sort_events(&mut events);
        let kinds: Vec<(EventKind, u32)> = events.iter().map(|e| (e.kind, e.worker)).collect();
        assert_eq!(kinds, vec![
            (EventKind::Report, 1),
            (EventKind::Report, 2),
            (EventKind::Decision, 1),
            (EventKind::Complete, 1),
            (EventKind::Launch, 0),
        ]);
    }
}
