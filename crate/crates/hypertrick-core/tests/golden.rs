//! End-to-end replays of the 16-worker, 6-node reference study under every
//! policy/scheduler pairing, checked cell by cell against hand-executed
//! traces.

use hypertrick_core::policy::{PolicyEngine, PolicyParams};
use hypertrick_core::sim::{
    EventKind, PolicyChoice, SchedulerKind, Timeline, golden_scenario, simulate,
};
use hypertrick_core::study::PhaseReport;

fn run(policy: PolicyChoice, scheduler: SchedulerKind) -> Timeline {
    simulate(&golden_scenario(), policy, scheduler).expect("reference study must simulate")
}

fn hypertrick() -> Timeline {
    run(
        PolicyChoice::HyperTrick { r: 0.25 },
        SchedulerKind::GreedyRealloc,
    )
}

fn halving(scheduler: SchedulerKind) -> Timeline {
    run(
        PolicyChoice::SuccessiveHalving {
            evict_fraction: 0.25,
        },
        scheduler,
    )
}

fn report_counts(timeline: &Timeline, w0: usize) -> Vec<u32> {
    let mut counts = vec![0u32; w0];
    for e in timeline.events_of_kind(EventKind::Report) {
        counts[e.worker as usize] += 1;
    }
    counts
}

#[test]
fn hypertrick_schedule_takes_ten_units() {
    assert_eq!(hypertrick().makespan(), 10.0);
}

#[test]
fn hypertrick_launches_replacements_at_the_traced_times() {
    let timeline = hypertrick();
    let launches: Vec<(u32, f64, u32)> = timeline
        .events_of_kind(EventKind::Launch)
        .map(|e| (e.worker, e.time, e.node.unwrap()))
        .collect();
    // The first six workers occupy the whole cluster at t=0.
    for node in 0..6u32 {
        assert_eq!(launches[node as usize], (node, 0.0, node));
    }
    // Each later worker starts the moment a node frees up.
    let replacements = [
        (6, 4.0, 0),
        (7, 4.2, 4),
        (8, 4.4, 1),
        (9, 4.8, 2),
        (10, 5.2, 3),
        (11, 6.0, 0),
        (12, 6.0, 2),
        (13, 6.0, 5),
        (14, 7.0, 0),
        (15, 7.5, 5),
    ];
    assert_eq!(&launches[6..], &replacements);
}

#[test]
fn hypertrick_completes_exactly_the_traced_workers() {
    assert_eq!(hypertrick().completers(), vec![0, 1, 2, 3, 5, 7, 8]);
}

#[test]
fn hypertrick_per_worker_phase_counts_match_the_trace() {
    let timeline = hypertrick();
    assert_eq!(
        report_counts(&timeline, 16),
        vec![4, 4, 4, 4, 3, 4, 2, 4, 4, 1, 2, 1, 2, 1, 3, 1]
    );
}

#[test]
fn hypertrick_t6_batch_follows_the_canonical_order() {
    // Three things happen at t = 6.0: W5 completes, W6 and W9 are cut, and
    // the freed nodes (0, 2, 5) pick up W11, W12, W13. All reports must
    // precede all decisions, which precede terminations, which precede
    // launches; ids ascend within each group.
    let timeline = hypertrick();
    let at_six: Vec<(EventKind, u32)> = timeline
        .events
        .iter()
        .filter(|e| e.time == 6.0)
        .map(|e| (e.kind, e.worker))
        .collect();
    assert_eq!(at_six, vec![
        (EventKind::Report, 5),
        (EventKind::Report, 6),
        (EventKind::Report, 9),
        (EventKind::Decision, 5),
        (EventKind::Decision, 6),
        (EventKind::Decision, 9),
        (EventKind::Complete, 5),
        (EventKind::Terminate, 6),
        (EventKind::Terminate, 9),
        (EventKind::Launch, 11),
        (EventKind::Launch, 12),
        (EventKind::Launch, 13),
    ]);
}

#[test]
fn grid_schedule_runs_the_full_budget() {
    let timeline = run(PolicyChoice::Grid, SchedulerKind::Contiguous);
    assert_eq!(timeline.makespan(), 15.6);
    assert_eq!(timeline.completers().len(), 16);
    assert!(report_counts(&timeline, 16).iter().all(|c| *c == 4));
}

#[test]
fn halving_dynamic_matches_the_traced_cuts() {
    let timeline = halving(SchedulerKind::BarrierDynamic);
    assert_eq!(timeline.makespan(), 11.5);
    assert_eq!(timeline.kill_sets(4), vec![
        vec![4, 6, 9, 13],
        vec![1, 12, 15],
        vec![10],
        vec![],
    ]);
    assert_eq!(timeline.completers(), vec![0, 2, 3, 5, 7, 8, 11, 14]);
    assert_eq!(
        report_counts(&timeline, 16),
        vec![4, 2, 4, 4, 1, 4, 1, 4, 4, 1, 3, 4, 2, 1, 4, 2]
    );
}

#[test]
fn halving_static_same_cuts_longer_schedule() {
    let timeline = halving(SchedulerKind::BarrierStatic);
    assert_eq!(timeline.makespan(), 14.7);
    assert_eq!(timeline.kill_sets(4), vec![
        vec![4, 6, 9, 13],
        vec![1, 12, 15],
        vec![10],
        vec![],
    ]);
    assert_eq!(timeline.completers(), vec![0, 2, 3, 5, 7, 8, 11, 14]);
}

#[test]
fn halving_static_keeps_every_worker_on_its_first_node() {
    let timeline = halving(SchedulerKind::BarrierStatic);
    let mut node_of = [None::<u32>; 16];
    for e in &timeline.events {
        if let Some(node) = e.node {
            let slot = &mut node_of[e.worker as usize];
            match slot {
                None => *slot = Some(node),
                Some(bound) => assert_eq!(
                    *bound, node,
                    "worker {} moved from node {} to {}",
                    e.worker, bound, node
                ),
            }
        }
    }
}

#[test]
fn scheduler_makespans_preserve_the_reference_ordering() {
    let spans = [
        hypertrick().makespan(),
        halving(SchedulerKind::BarrierDynamic).makespan(),
        halving(SchedulerKind::BarrierStatic).makespan(),
        run(PolicyChoice::Grid, SchedulerKind::Contiguous).makespan(),
    ];
    assert_eq!(spans, [10.0, 11.5, 14.7, 15.6]);
}

#[test]
fn repeated_runs_are_identical() {
    for (policy, scheduler) in [
        (
            PolicyChoice::HyperTrick { r: 0.25 },
            SchedulerKind::GreedyRealloc,
        ),
        (
            PolicyChoice::SuccessiveHalving {
                evict_fraction: 0.25,
            },
            SchedulerKind::BarrierDynamic,
        ),
        (
            PolicyChoice::SuccessiveHalving {
                evict_fraction: 0.25,
            },
            SchedulerKind::BarrierStatic,
        ),
        (PolicyChoice::Grid, SchedulerKind::Contiguous),
    ] {
        let a = run(policy, scheduler);
        let b = run(policy, scheduler);
        assert_eq!(a, b, "{policy:?}/{scheduler:?} differed between runs");
    }
}

#[test]
fn greedy_scheduler_never_idles_a_node_while_work_waits() {
    // Every launch after t=0 must coincide exactly with some worker's
    // terminate/complete event: freed capacity is consumed instantly.
    let timeline = hypertrick();
    let free_times: Vec<f64> = timeline
        .events
        .iter()
        .filter(|e| matches!(e.kind, EventKind::Terminate | EventKind::Complete))
        .map(|e| e.time)
        .collect();
    for launch in timeline.events_of_kind(EventKind::Launch) {
        if launch.time > 0.0 {
            assert!(
                free_times.contains(&launch.time),
                "launch at {} not matched by a freed node",
                launch.time
            );
        }
    }
}

#[test]
fn every_launch_reaches_exactly_one_outcome() {
    for (policy, scheduler) in [
        (
            PolicyChoice::HyperTrick { r: 0.25 },
            SchedulerKind::GreedyRealloc,
        ),
        (
            PolicyChoice::SuccessiveHalving {
                evict_fraction: 0.25,
            },
            SchedulerKind::BarrierDynamic,
        ),
        (PolicyChoice::Grid, SchedulerKind::Contiguous),
    ] {
        let timeline = run(policy, scheduler);
        let launches = timeline.events_of_kind(EventKind::Launch).count();
        let outcomes = timeline
            .events
            .iter()
            .filter(|e| {
                matches!(
                    e.kind,
                    EventKind::Terminate | EventKind::Complete | EventKind::Failure
                )
            })
            .count();
        assert_eq!(launches, 16);
        assert_eq!(outcomes, 16);
    }
}

/// Replays a timeline's report stream through a fresh engine and checks the
/// regenerated decisions against the recorded ones, record for record.
fn assert_replay_matches(timeline: &Timeline, params: PolicyParams) {
    let mut engine = PolicyEngine::new(params, 0..16);
    let mut regenerated = Vec::new();
    for e in &timeline.events {
        match e.kind {
            EventKind::Report => {
                let report = PhaseReport {
                    worker: e.worker,
                    config: e.worker,
                    phase: e.phase.unwrap(),
                    metric: e.metric.unwrap(),
                    time: e.time,
                };
                regenerated.extend(
                    engine
                        .on_report(&report)
                        .into_iter()
                        .map(|d| (d.worker, d.phase, d.decision)),
                );
            }
            EventKind::Failure => {
                regenerated.extend(
                    engine
                        .on_failure(e.worker)
                        .into_iter()
                        .map(|d| (d.worker, d.phase, d.decision)),
                );
            }
            _ => {}
        }
    }
    assert_eq!(regenerated, timeline.decisions());
}

#[test]
fn recorded_decisions_replay_through_the_pure_engine() {
    use hypertrick_core::policy::{HyperTrickParams, SuccessiveHalvingParams};

    assert_replay_matches(
        &hypertrick(),
        PolicyParams::HyperTrick(HyperTrickParams::new(16, 0.25, 4).unwrap()),
    );
    for scheduler in [SchedulerKind::BarrierDynamic, SchedulerKind::BarrierStatic] {
        assert_replay_matches(
            &halving(scheduler),
            PolicyParams::SuccessiveHalving(SuccessiveHalvingParams::new(0.25, 4).unwrap()),
        );
    }
    assert_replay_matches(
        &run(PolicyChoice::Grid, SchedulerKind::Contiguous),
        PolicyParams::Grid { n_phases: 4 },
    );
}

#[test]
fn summaries_reproduce_the_published_utilization_figures() {
    use hypertrick_core::analysis::summarize;

    let ht = summarize(&hypertrick()).unwrap();
    assert_eq!(ht.measured_alpha, 44.0 / 64.0);
    assert!((ht.occupancy - 53.8 / 60.0).abs() < 1e-9);

    let sh = summarize(&halving(SchedulerKind::BarrierDynamic)).unwrap();
    assert_eq!(sh.measured_alpha, 45.0 / 64.0);
    assert!((sh.occupancy - 55.0 / 69.0).abs() < 1e-9);

    let grid = summarize(&run(PolicyChoice::Grid, SchedulerKind::Contiguous)).unwrap();
    assert_eq!(grid.measured_alpha, 1.0);
    // 78.4 busy node-units over a 6 x 15.6 window: the fast nodes go idle
    // once the queue drains.
    assert!((grid.occupancy - 78.4 / 93.6).abs() < 1e-9);
}
