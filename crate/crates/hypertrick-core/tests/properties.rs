//! Randomized invariant checks over generated studies, pools, and spaces.

use proptest::prelude::*;

use hypertrick_core::analysis::summarize;
use hypertrick_core::policy::{
    HyperTrickParams, PhaseStats, dcm_threshold, expected_alpha, hypertrick_decide, min_alpha,
    quantile, solve_eviction_rate, successive_halving_cut,
};
use hypertrick_core::sim::{
    EventKind, FailPoint, PolicyChoice, Scenario, SchedulerKind, Timeline, WorkerSpec, simulate,
};
use hypertrick_core::study::{Decision, NodeSpec, PhaseReport};

/// Random small cluster studies. Metrics mix a coarse integer grid (to force
/// quantile ties) with continuous draws.
fn arb_scenario(allow_failures: bool) -> impl Strategy<Value = Scenario> {
    (1u32..=5).prop_flat_map(move |n_phases| {
        let metric = prop_oneof![
            3 => (-20i32..=20).prop_map(f64::from),
            1 => -100.0f64..100.0,
        ];
        let worker = (
            proptest::collection::vec(metric, n_phases as usize),
            proptest::collection::vec(0.25f64..2.5, n_phases as usize),
            proptest::option::weighted(0.15, (0..n_phases, 0.0f64..0.95)),
        );
        (
            proptest::collection::vec(0.5f64..2.0, 1..=6),
            proptest::collection::vec(worker, 1..=20),
        )
            .prop_map(move |(speeds, workers)| Scenario {
                nodes: speeds
                    .into_iter()
                    .enumerate()
                    .map(|(i, speed)| NodeSpec {
                        id: i as u32,
                        speed,
                    })
                    .collect(),
                n_phases,
                workers: workers
                    .into_iter()
                    .enumerate()
                    .map(|(i, (metrics, work, fail))| WorkerSpec {
                        id: i as u32,
                        metrics,
                        work,
                        fail: if allow_failures {
                            fail.map(|(phase, frac)| FailPoint { phase, frac })
                        } else {
                            None
                        },
                    })
                    .collect(),
            })
    })
}

/// Every policy/scheduler pairing over one random scenario.
fn all_runs(scenario: &Scenario, r: f64) -> Vec<Timeline> {
    vec![
        simulate(
            scenario,
            PolicyChoice::HyperTrick { r },
            SchedulerKind::GreedyRealloc,
        )
        .unwrap(),
        simulate(
            scenario,
            PolicyChoice::SuccessiveHalving { evict_fraction: r },
            SchedulerKind::BarrierDynamic,
        )
        .unwrap(),
        simulate(
            scenario,
            PolicyChoice::SuccessiveHalving { evict_fraction: r },
            SchedulerKind::BarrierStatic,
        )
        .unwrap(),
        simulate(scenario, PolicyChoice::Grid, SchedulerKind::Contiguous).unwrap(),
    ]
}

/// Greedy scheduling must consume freed capacity instantly: at each instant,
/// launches = min(nodes freed, configurations still waiting).
fn assert_no_idle_node(timeline: &Timeline, w0: u32, n_nodes: u32) {
    let events = &timeline.events;
    let mut launched = 0u32;
    let mut i = 0;
    while i < events.len() {
        let t = events[i].time;
        let mut freed = 0u32;
        let mut launches_here = 0u32;
        let mut j = i;
        while j < events.len() && events[j].time == t {
            match events[j].kind {
                EventKind::Terminate | EventKind::Complete | EventKind::Failure => freed += 1,
                EventKind::Launch => launches_here += 1,
                _ => {}
            }
            j += 1;
        }
        if t == 0.0 {
            assert_eq!(launches_here, n_nodes.min(w0), "initial wave fills the cluster");
        } else {
            assert_eq!(
                launches_here,
                freed.min(w0 - launched),
                "at t={t}: {freed} nodes freed, {} configs waiting",
                w0 - launched
            );
        }
        launched += launches_here;
        i = j;
    }
}

fn phase_report(metric: f64, phase: u32) -> PhaseReport {
    PhaseReport {
        worker: 0,
        config: 0,
        phase,
        metric,
        time: 0.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn greedy_never_idles_a_node_while_configs_wait(
        scenario in arb_scenario(true),
        r in 0.02f64..0.98,
    ) {
        let ht = simulate(&scenario, PolicyChoice::HyperTrick { r }, SchedulerKind::GreedyRealloc)
            .unwrap();
        assert_no_idle_node(&ht, scenario.w0(), scenario.n_nodes());
        let grid = simulate(&scenario, PolicyChoice::Grid, SchedulerKind::Contiguous).unwrap();
        assert_no_idle_node(&grid, scenario.w0(), scenario.n_nodes());
    }

    #[test]
    fn a_continued_metric_stays_continued_when_raised(
        pool in proptest::collection::vec(-50.0f64..50.0, 0..40),
        w0 in 1u32..=64,
        r in 0.02f64..0.98,
        phase in 0u32..4,
        extra_phases in 1u32..=4,
        m in -60.0f64..60.0,
        delta in 0.0f64..30.0,
    ) {
        let n_phases = phase + extra_phases;
        let params = HyperTrickParams::new(w0, r, n_phases).unwrap();
        let mut stats_low = PhaseStats::new(n_phases);
        for v in &pool {
            stats_low.record(phase, *v);
        }
        let mut stats_high = stats_low.clone();
        let low = hypertrick_decide(&params, &mut stats_low, &phase_report(m, phase));
        let high = hypertrick_decide(&params, &mut stats_high, &phase_report(m + delta, phase));
        if low != Decision::Terminate {
            prop_assert_ne!(high, Decision::Terminate);
        }
    }

    #[test]
    fn quantile_hits_the_endpoints_and_ignores_order(
        (original, shuffled, q) in proptest::collection::vec(-100.0f64..100.0, 1..40)
            .prop_flat_map(|v| {
                let q = 0.0f64..=1.0;
                (Just(v.clone()), Just(v).prop_shuffle(), q)
            }),
    ) {
        let lo = original.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = original.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(quantile(&original, 0.0), lo);
        prop_assert_eq!(quantile(&original, 1.0), hi);
        prop_assert_eq!(quantile(&original, q), quantile(&shuffled, q));
        let v = quantile(&original, q);
        prop_assert!((lo..=hi).contains(&v));
    }

    #[test]
    fn grid_always_completes_the_full_budget(scenario in arb_scenario(false)) {
        let timeline = simulate(&scenario, PolicyChoice::Grid, SchedulerKind::Contiguous).unwrap();
        let summary = summarize(&timeline).unwrap();
        prop_assert_eq!(summary.measured_alpha, 1.0);
        prop_assert_eq!(summary.completers.len(), scenario.workers.len());
    }

    #[test]
    fn occupancy_never_exceeds_full_utilization(
        scenario in arb_scenario(true),
        r in 0.02f64..0.98,
    ) {
        for timeline in all_runs(&scenario, r) {
            let summary =
                summarize_with_dims(&timeline, scenario.n_nodes(), scenario.n_phases);
            prop_assert!(summary.occupancy <= 1.0 + 1e-9, "occupancy {}", summary.occupancy);
            for (_, fraction) in &summary.occupancy_series {
                prop_assert!((0.0..=1.0).contains(fraction), "fraction {fraction}");
            }
        }
    }

    #[test]
    fn best_so_far_series_is_monotone(
        scenario in arb_scenario(true),
        r in 0.02f64..0.98,
    ) {
        for timeline in all_runs(&scenario, r) {
            let summary =
                summarize_with_dims(&timeline, scenario.n_nodes(), scenario.n_phases);
            let series = summary.best_so_far_series();
            for pair in series.windows(2) {
                prop_assert!(pair[1].1 > pair[0].1);
                prop_assert!(pair[1].0 >= pair[0].0);
            }
            match (series.last(), summary.best) {
                (Some((_, top)), Some(best)) => prop_assert_eq!(*top, best.metric),
                (None, None) => {}
                (a, b) => prop_assert!(false, "series {a:?} vs best {b:?}"),
            }
        }
    }
}

fn summarize_with_dims(
    timeline: &Timeline,
    n_nodes: u32,
    n_phases: u32,
) -> hypertrick_core::analysis::StudySummary {
    hypertrick_core::analysis::summarize_with(timeline, Some(n_nodes), Some(n_phases)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn every_worker_is_launched_and_resolved_once(
        scenario in arb_scenario(true),
        r in 0.02f64..0.98,
    ) {
        let w0 = scenario.w0() as usize;
        for timeline in all_runs(&scenario, r) {
            let launches = timeline.events_of_kind(EventKind::Launch).count();
            let outcomes = timeline
                .events
                .iter()
                .filter(|e| matches!(
                    e.kind,
                    EventKind::Terminate | EventKind::Complete | EventKind::Failure
                ))
                .count();
            prop_assert_eq!(launches, w0);
            prop_assert_eq!(outcomes, w0);
            let reports = timeline.events_of_kind(EventKind::Report).count();
            prop_assert!(reports <= w0 * scenario.n_phases as usize);
        }
    }

    #[test]
    fn static_barrier_pins_workers_to_their_first_node(
        scenario in arb_scenario(true),
        r in 0.02f64..0.98,
    ) {
        let timeline = simulate(
            &scenario,
            PolicyChoice::SuccessiveHalving { evict_fraction: r },
            SchedulerKind::BarrierStatic,
        )
        .unwrap();
        let mut node_of = vec![None::<u32>; scenario.workers.len()];
        for e in &timeline.events {
            if let Some(node) = e.node {
                let slot = &mut node_of[e.worker as usize];
                match slot {
                    None => *slot = Some(node),
                    Some(bound) => prop_assert_eq!(*bound, node),
                }
            }
        }
    }

    #[test]
    fn barriers_hold_the_next_phase_until_the_last_report(
        scenario in arb_scenario(true),
        r in 0.02f64..0.98,
    ) {
        for scheduler in [SchedulerKind::BarrierDynamic, SchedulerKind::BarrierStatic] {
            let timeline = simulate(
                &scenario,
                PolicyChoice::SuccessiveHalving { evict_fraction: r },
                scheduler,
            )
            .unwrap();
            for p in 1..scenario.n_phases {
                let barrier = timeline
                    .events
                    .iter()
                    .filter(|e| {
                        matches!(e.kind, EventKind::Report | EventKind::Failure)
                            && e.phase == Some(p - 1)
                    })
                    .map(|e| e.time)
                    .fold(f64::NEG_INFINITY, f64::max);
                let earliest_next = timeline
                    .events
                    .iter()
                    .filter(|e| {
                        matches!(e.kind, EventKind::Report | EventKind::Failure)
                            && e.phase == Some(p)
                    })
                    .filter_map(|e| e.start)
                    .fold(f64::INFINITY, f64::min);
                prop_assert!(
                    earliest_next >= barrier,
                    "phase {p} started at {earliest_next} before barrier {barrier}"
                );
            }
        }
    }

    #[test]
    fn recorded_decisions_always_replay_through_the_engine(
        scenario in arb_scenario(true),
        r in 0.02f64..0.98,
    ) {
        use hypertrick_core::policy::{PolicyEngine, PolicyParams, SuccessiveHalvingParams};

        let w0 = scenario.w0();
        let n_phases = scenario.n_phases;
        let params_for = |choice: PolicyChoice| match choice {
            PolicyChoice::HyperTrick { r } => {
                PolicyParams::HyperTrick(HyperTrickParams::new(w0, r, n_phases).unwrap())
            }
            PolicyChoice::SuccessiveHalving { evict_fraction } => PolicyParams::SuccessiveHalving(
                SuccessiveHalvingParams::new(evict_fraction, n_phases).unwrap(),
            ),
            PolicyChoice::Grid => PolicyParams::Grid { n_phases },
        };
        let pairings = [
            (PolicyChoice::HyperTrick { r }, SchedulerKind::GreedyRealloc),
            (
                PolicyChoice::SuccessiveHalving { evict_fraction: r },
                SchedulerKind::BarrierDynamic,
            ),
            (
                PolicyChoice::SuccessiveHalving { evict_fraction: r },
                SchedulerKind::BarrierStatic,
            ),
            (PolicyChoice::Grid, SchedulerKind::Contiguous),
        ];
        for (policy, scheduler) in pairings {
            let timeline = simulate(&scenario, policy, scheduler).unwrap();
            let mut engine = PolicyEngine::new(params_for(policy), 0..w0);
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
            prop_assert_eq!(regenerated, timeline.decisions());
        }
    }

    #[test]
    fn simulation_is_deterministic(
        scenario in arb_scenario(true),
        r in 0.02f64..0.98,
    ) {
        prop_assert_eq!(all_runs(&scenario, r), all_runs(&scenario, r));
    }

    #[test]
    fn early_reporters_ride_out_the_collection_mode(
        w0 in 1u32..=64,
        r in 0.02f64..0.98,
        phase in 0u32..4,
        extra_phases in 1u32..=4,
        metrics in proptest::collection::vec(-50.0f64..50.0, 1..=64),
    ) {
        let n_phases = phase + extra_phases;
        let params = HyperTrickParams::new(w0, r, n_phases).unwrap();
        let threshold = dcm_threshold(w0, r, phase);
        let mut stats = PhaseStats::new(n_phases);
        for (i, m) in metrics.iter().take(threshold as usize).enumerate() {
            let decision = hypertrick_decide(&params, &mut stats, &phase_report(*m, phase));
            prop_assert_ne!(
                decision,
                Decision::Terminate,
                "reporter {} of {} terminated during collection",
                i,
                threshold
            );
        }
    }

    #[test]
    fn halving_cut_spares_the_unique_best_and_someone(
        metrics in proptest::collection::vec(-50.0f64..50.0, 1..=32),
        evict in 0.02f64..0.98,
    ) {
        let survivors: Vec<(u32, f64)> = metrics
            .iter()
            .enumerate()
            .map(|(i, m)| (i as u32, *m))
            .collect();
        let cut = successive_halving_cut(&survivors, evict);
        prop_assert!(cut.len() < survivors.len(), "cut must spare someone");
        let top = survivors
            .iter()
            .copied()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let top_is_unique = survivors.iter().filter(|(_, m)| *m == top.1).count() == 1;
        if top_is_unique {
            prop_assert!(!cut.contains(&top.0), "unique best {top:?} was cut");
        }
    }

    #[test]
    fn completion_identities_hold_everywhere(
        r in 0.001f64..0.999,
        n_phases in 2u32..=30,
    ) {
        prop_assert!((expected_alpha(r, 1) - 1.0).abs() < 1e-9);
        let discounted = (1.0 - r.sqrt()) * expected_alpha(r, n_phases);
        prop_assert!((min_alpha(r, n_phases) - discounted).abs() < 1e-12);
    }

    #[test]
    fn rate_solver_round_trips(
        r in 0.02f64..0.98,
        n_phases in 2u32..=30,
    ) {
        let target = expected_alpha(r, n_phases);
        let solved = solve_eviction_rate(target, n_phases).unwrap();
        prop_assert!(
            (solved - r).abs() < 1e-6,
            "solve({target}, {n_phases}) = {solved}, expected {r}"
        );
    }
}
