//! Barrier-free scheduling: the asynchronous policy and grid search.
//!
//! Every node runs one worker at a time. When a report arrives the policy
//! answers immediately; a termination or completion frees the node, which
//! launches the lowest-index unlaunched configuration in the same instant.
//! Simultaneous task endings are processed in worker-id order, and the nodes
//! they free launch replacements in node-id order, all before time advances.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use crate::policy::PolicyEngine;
use crate::study::{Decision, PhaseReport};

use super::{Event, EventKind, Scenario, Timeline, quantize, sort_events};

/// A scheduled task ending: either a report or a mid-phase failure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(super) struct TaskEnd {
    pub time: f64,
    pub worker: u32,
    pub node: u32,
    pub phase: u32,
    pub start: f64,
    pub is_failure: bool,
}

impl Eq for TaskEnd {}

impl Ord for TaskEnd {
    fn cmp(&self, other: &Self) -> Ordering {
        // Times are finite by construction.
        self.time
            .total_cmp(&other.time)
            .then_with(|| self.worker.cmp(&other.worker))
    }
}

impl PartialOrd for TaskEnd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Computes the end record of `worker` running `phase` on `node` from `t0`,
/// truncated at the failure point when the scenario injects one there.
pub(super) fn task_end(scenario: &Scenario, worker: u32, node: u32, phase: u32, t0: f64) -> TaskEnd {
    let spec = &scenario.workers[worker as usize];
    let duration = spec.work_units(phase) * scenario.nodes[node as usize].speed;
    match spec.fail {
        Some(fail) if fail.phase == phase => TaskEnd {
            time: quantize(t0 + fail.frac * duration),
            worker,
            node,
            phase,
            start: t0,
            is_failure: true,
        },
        _ => TaskEnd {
            time: quantize(t0 + duration),
            worker,
            node,
            phase,
            start: t0,
            is_failure: false,
        },
    }
}

pub(super) fn run_greedy(scenario: &Scenario, mut engine: PolicyEngine) -> Timeline {
    let w0 = scenario.w0();
    let mut events: Vec<Event> = Vec::new();
    let mut heap: BinaryHeap<Reverse<TaskEnd>> = BinaryHeap::new();
    let mut next_config: u32 = 0;

    let launch = |config: u32, node: u32, t: f64, heap: &mut BinaryHeap<Reverse<TaskEnd>>, events: &mut Vec<Event>| {
        events.push(Event {
            time: t,
            kind: EventKind::Launch,
            worker: config,
            node: Some(node),
            phase: None,
            metric: None,
            decision: None,
            start: None,
        });
        heap.push(Reverse(task_end(scenario, config, node, 0, t)));
    };

    for node in 0..scenario.n_nodes() {
        if next_config >= w0 {
            break;
        }
        launch(next_config, node, 0.0, &mut heap, &mut events);
        next_config += 1;
    }

    while let Some(Reverse(first)) = heap.pop() {
        // Drain the whole instant; pop order is (time, worker) ascending.
        let mut batch = Vec::from([first]);
        while let Some(Reverse(next)) = heap.peek() {
            if next.time == first.time {
                batch.push(heap.pop().unwrap().0);
            } else {
                break;
            }
        }

        let t = first.time;
        let mut freed: Vec<u32> = Vec::new();
        for task in batch {
            if task.is_failure {
                events.push(Event {
                    time: t,
                    kind: EventKind::Failure,
                    worker: task.worker,
                    node: Some(task.node),
                    phase: Some(task.phase),
                    metric: None,
                    decision: None,
                    start: Some(task.start),
                });
                let batch_decisions = engine.on_failure(task.worker);
                debug_assert!(batch_decisions.is_empty(), "immediate policies buffer nothing");
                freed.push(task.node);
                continue;
            }

            let metric = scenario.workers[task.worker as usize].metrics[task.phase as usize];
            events.push(Event {
                time: t,
                kind: EventKind::Report,
                worker: task.worker,
                node: Some(task.node),
                phase: Some(task.phase),
                metric: Some(metric),
                decision: None,
                start: Some(task.start),
            });
            let outs = engine.on_report(&PhaseReport {
                worker: task.worker,
                config: task.worker,
                phase: task.phase,
                metric,
                time: t,
            });
            for out in outs {
                events.push(Event {
                    time: t,
                    kind: EventKind::Decision,
                    worker: out.worker,
                    node: Some(task.node),
                    phase: Some(out.phase),
                    metric: None,
                    decision: Some(out.decision),
                    start: None,
                });
                match out.decision {
                    Decision::Continue => {
                        heap.push(Reverse(task_end(
                            scenario,
                            task.worker,
                            task.node,
                            task.phase + 1,
                            t,
                        )));
                    }
                    Decision::Terminate | Decision::Complete => {
                        events.push(Event {
                            time: t,
                            kind: if out.decision == Decision::Terminate {
                                EventKind::Terminate
                            } else {
                                EventKind::Complete
                            },
                            worker: out.worker,
                            node: Some(task.node),
                            phase: Some(out.phase),
                            metric: None,
                            decision: None,
                            start: None,
                        });
                        freed.push(task.node);
                    }
                }
            }
        }

        freed.sort_unstable();
        for node in freed {
            if next_config < w0 {
                launch(next_config, node, t, &mut heap, &mut events);
                next_config += 1;
            }
        }
    }

    sort_events(&mut events);
    Timeline { events }
}
