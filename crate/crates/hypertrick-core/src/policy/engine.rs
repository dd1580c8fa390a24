//! A stateful decision loop over any policy.
//!
//! The engine consumes one report (or failure) at a time in a single total
//! order and emits decisions. The asynchronous policy and grid search answer
//! every report immediately; successive halving buffers a phase's reports and
//! answers them together once the barrier is full. Both the simulator and the
//! subprocess orchestrator drive this same type, which is what makes their
//! decision sequences comparable record for record.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::study::{Decision, PhaseReport};

use super::halving::{SuccessiveHalvingParams, successive_halving_cut};
use super::hypertrick::{HyperTrickParams, hypertrick_decide};
use super::stats::PhaseStats;

/// Policy selection plus its validated parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PolicyParams {
    HyperTrick(HyperTrickParams),
    SuccessiveHalving(SuccessiveHalvingParams),
    Grid { n_phases: u32 },
}

impl PolicyParams {
    pub fn n_phases(&self) -> u32 {
        match self {
            PolicyParams::HyperTrick(p) => p.n_phases,
            PolicyParams::SuccessiveHalving(p) => p.n_phases,
            PolicyParams::Grid { n_phases } => *n_phases,
        }
    }

    /// Whether decisions are buffered until every live worker has reported
    /// the current phase.
    pub fn is_synchronized(&self) -> bool {
        matches!(self, PolicyParams::SuccessiveHalving(_))
    }
}

/// One emitted decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecisionOut {
    pub worker: u32,
    pub phase: u32,
    pub decision: Decision,
}

/// Barrier bookkeeping for the synchronized policy.
#[derive(Clone, Debug)]
struct ShState {
    params: SuccessiveHalvingParams,
    /// Current barrier phase.
    phase: u32,
    /// Workers that still owe a report for `phase`.
    pending: BTreeSet<u32>,
    /// Workers eligible for a decision (launched, not failed).
    alive: BTreeSet<u32>,
    /// Reports collected for `phase` from workers still alive.
    reported: Vec<(u32, f64)>,
}

#[derive(Clone, Debug)]
enum EngineState {
    Immediate,
    Barrier(ShState),
}

/// Sequential decision engine. See the module docs for ordering rules.
#[derive(Clone, Debug)]
pub struct PolicyEngine {
    params: PolicyParams,
    stats: PhaseStats,
    state: EngineState,
}

impl PolicyEngine {
    /// `workers` enumerates the ids competing under a synchronized policy
    /// (ignored by the immediate policies, which race an open field).
    pub fn new(params: PolicyParams, workers: impl IntoIterator<Item = u32>) -> Self {
        let stats = PhaseStats::new(params.n_phases());
        let state = match params {
            PolicyParams::SuccessiveHalving(sh) => {
                let alive: BTreeSet<u32> = workers.into_iter().collect();
                EngineState::Barrier(ShState {
                    params: sh,
                    phase: 0,
                    pending: alive.clone(),
                    alive,
                    reported: Vec::new(),
                })
            }
            _ => EngineState::Immediate,
        };
        PolicyEngine {
            params,
            stats,
            state,
        }
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }

    /// All metrics recorded so far, per phase.
    pub fn stats(&self) -> &PhaseStats {
        &self.stats
    }

    /// Feeds one report. Immediate policies return exactly one decision;
    /// the synchronized policy returns the whole barrier batch (ascending by
    /// worker id) once the last expected report arrives, and nothing before.
    pub fn on_report(&mut self, report: &PhaseReport) -> Vec<DecisionOut> {
        let n_phases = self.params.n_phases();
        assert!(report.phase < n_phases, "phase index out of range");
        match (&mut self.state, &self.params) {
            (EngineState::Immediate, PolicyParams::HyperTrick(params)) => {
                let decision = hypertrick_decide(params, &mut self.stats, report);
                Vec::from([DecisionOut {
                    worker: report.worker,
                    phase: report.phase,
                    decision,
                }])
            }
            (EngineState::Immediate, PolicyParams::Grid { n_phases }) => {
                self.stats.record(report.phase, report.metric);
                let decision = if report.phase + 1 == *n_phases {
                    Decision::Complete
                } else {
                    Decision::Continue
                };
                Vec::from([DecisionOut {
                    worker: report.worker,
                    phase: report.phase,
                    decision,
                }])
            }
            (EngineState::Immediate, PolicyParams::SuccessiveHalving(_)) => {
                unreachable!("synchronized params always construct a barrier engine")
            }
            (EngineState::Barrier(sh), _) => {
                assert_eq!(report.phase, sh.phase, "report outside the open barrier");
                assert!(
                    sh.pending.remove(&report.worker),
                    "unexpected or duplicate report from worker {}",
                    report.worker
                );
                self.stats.record(report.phase, report.metric);
                sh.reported.push((report.worker, report.metric));
                Self::try_flush(sh, n_phases)
            }
        }
    }

    /// Declares a worker dead. Its already-recorded metrics stay in the
    /// pools, but it receives no further decisions. Under the synchronized
    /// policy this may complete the barrier and release the batch.
    pub fn on_failure(&mut self, worker: u32) -> Vec<DecisionOut> {
        match &mut self.state {
            EngineState::Immediate => Vec::new(),
            EngineState::Barrier(sh) => {
                sh.alive.remove(&worker);
                sh.pending.remove(&worker);
                sh.reported.retain(|(w, _)| *w != worker);
                Self::try_flush(sh, self.params.n_phases())
            }
        }
    }

    fn try_flush(sh: &mut ShState, n_phases: u32) -> Vec<DecisionOut> {
        if !sh.pending.is_empty() {
            return Vec::new();
        }
        let phase = sh.phase;
        let reported = core::mem::take(&mut sh.reported);
        sh.phase += 1;
        if reported.is_empty() {
            return Vec::new();
        }
        let last_phase = phase + 1 == n_phases;
        let cut: BTreeSet<u32> = if last_phase {
            // Survivors of the last intermediate cut all run to completion;
            // there is nothing left to ration after the final phase.
            BTreeSet::new()
        } else {
            successive_halving_cut(&reported, sh.params.evict_fraction)
                .into_iter()
                .collect()
        };
        let mut out: Vec<DecisionOut> = reported
            .iter()
            .map(|(worker, _)| {
                let decision = if cut.contains(worker) {
                    Decision::Terminate
                } else if last_phase {
                    Decision::Complete
                } else {
                    Decision::Continue
                };
                DecisionOut {
                    worker: *worker,
                    phase,
                    decision,
                }
            })
            .collect();
        out.sort_unstable_by_key(|d| d.worker);
        for d in &out {
            if d.decision != Decision::Continue {
                sh.alive.remove(&d.worker);
            }
        }
        sh.pending = sh.alive.clone();
        out
    }
}
