//! Barrier scheduling for synchronized successive halving.
//!
//! Phase `p+1` work starts only once every surviving worker has reported
//! phase `p` and the cut has been taken. Within a phase window the survivors
//! are dispatched in worker-id order: dynamically to whichever node frees
//! first (ties to the lowest node id), or statically to the node that
//! launched the worker, queued FIFO behind that node's earlier workers.
//! Dispatch itself costs nothing; only phase execution takes time.

use alloc::vec;
use alloc::vec::Vec;

use crate::policy::PolicyEngine;
use crate::study::{Decision, PhaseReport};

use super::greedy::{TaskEnd, task_end};
use super::{Event, EventKind, Scenario, Timeline, sort_events};

pub(super) fn run_barrier(scenario: &Scenario, mut engine: PolicyEngine, static_binding: bool) -> Timeline {
    let w0 = scenario.w0();
    let mut events: Vec<Event> = Vec::new();
    let mut avail: Vec<f64> = vec![0.0; scenario.n_nodes() as usize];
    let mut binding: Vec<u32> = vec![0; w0 as usize];
    let mut alive: Vec<u32> = (0..w0).collect();
    let mut barrier_t = 0.0;

    for phase in 0..scenario.n_phases {
        if alive.is_empty() {
            break;
        }
        // No node may start this window's work before the previous cut.
        for t in avail.iter_mut() {
            if *t < barrier_t {
                *t = barrier_t;
            }
        }

        let mut window: Vec<TaskEnd> = Vec::with_capacity(alive.len());
        for &worker in &alive {
            let node = if static_binding && phase > 0 {
                binding[worker as usize]
            } else {
                earliest_node(&avail)
            };
            if phase == 0 {
                binding[worker as usize] = node;
                events.push(Event {
                    time: avail[node as usize],
                    kind: EventKind::Launch,
                    worker,
                    node: Some(node),
                    phase: None,
                    metric: None,
                    decision: None,
                    start: None,
                });
            }
            let end = task_end(scenario, worker, node, phase, avail[node as usize]);
            avail[node as usize] = end.time;
            window.push(end);
        }

        // Feed the policy in event order; the batch releases at the last
        // expected report (or at a failure that removes the last holdout).
        window.sort_unstable();
        let mut decisions = Vec::new();
        let mut node_of = vec![0u32; w0 as usize];
        for task in &window {
            node_of[task.worker as usize] = task.node;
            barrier_t = task.time;
            if task.is_failure {
                events.push(Event {
                    time: task.time,
                    kind: EventKind::Failure,
                    worker: task.worker,
                    node: Some(task.node),
                    phase: Some(task.phase),
                    metric: None,
                    decision: None,
                    start: Some(task.start),
                });
                decisions.extend(engine.on_failure(task.worker));
            } else {
                let metric = scenario.workers[task.worker as usize].metrics[task.phase as usize];
                events.push(Event {
                    time: task.time,
                    kind: EventKind::Report,
                    worker: task.worker,
                    node: Some(task.node),
                    phase: Some(task.phase),
                    metric: Some(metric),
                    decision: None,
                    start: Some(task.start),
                });
                decisions.extend(engine.on_report(&PhaseReport {
                    worker: task.worker,
                    config: task.worker,
                    phase: task.phase,
                    metric,
                    time: task.time,
                }));
            }
        }

        let mut next_alive = Vec::with_capacity(decisions.len());
        for out in decisions {
            let node = node_of[out.worker as usize];
            events.push(Event {
                time: barrier_t,
                kind: EventKind::Decision,
                worker: out.worker,
                node: Some(node),
                phase: Some(out.phase),
                metric: None,
                decision: Some(out.decision),
                start: None,
            });
            match out.decision {
                Decision::Continue => next_alive.push(out.worker),
                Decision::Terminate | Decision::Complete => {
                    events.push(Event {
                        time: barrier_t,
                        kind: if out.decision == Decision::Terminate {
                            EventKind::Terminate
                        } else {
                            EventKind::Complete
                        },
                        worker: out.worker,
                        node: Some(node),
                        phase: Some(out.phase),
                        metric: None,
                        decision: None,
                        start: None,
                    });
                }
            }
        }
        alive = next_alive;
    }

    sort_events(&mut events);
    Timeline { events }
}

/// Lowest-id node among those free earliest.
fn earliest_node(avail: &[f64]) -> u32 {
    let mut best = 0usize;
    for (i, t) in avail.iter().enumerate().skip(1) {
        if *t < avail[best] {
            best = i;
        }
    }
    best as u32
}
