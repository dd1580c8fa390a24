//! The 16-worker reference scenario behind all toy-schedule checks.

use alloc::vec::Vec;

use crate::study::NodeSpec;

use super::{Scenario, WorkerSpec};

/// Linear metric coefficients per worker: metric at phase `p` is `a*p + b`.
const COEFFS: [(f64, f64); 16] = [
    (26.0, 1.0),
    (7.0, 8.0),
    (13.0, 5.0),
    (24.0, 7.0),
    (0.0, 1.0),
    (13.0, 9.0),
    (0.0, 8.0),
    (22.0, 4.0),
    (29.0, 2.0),
    (0.0, 9.0),
    (16.0, 0.0),
    (11.0, 10.0),
    (13.0, 2.0),
    (6.0, 0.0),
    (15.0, 4.0),
    (7.0, 2.0),
];

/// Node speed factors, written as literals so durations are the exact floats
/// a scenario file would parse to.
const SPEEDS: [f64; 6] = [1.0, 1.1, 1.2, 1.3, 1.4, 1.5];

/// Six nodes with speed factors 1.0 .. 1.5 and sixteen workers with linear
/// metric curves `a*p + b`, four phases of unit work each. Every documented
/// toy schedule (all four scheduler disciplines) is derived from this one
/// scenario.
pub fn golden_scenario() -> Scenario {
    let nodes = SPEEDS
        .iter()
        .enumerate()
        .map(|(id, speed)| NodeSpec {
            id: id as u32,
            speed: *speed,
        })
        .collect();
    let workers = COEFFS
        .iter()
        .enumerate()
        .map(|(id, (b, a))| WorkerSpec {
            id: id as u32,
            metrics: (0..4).map(|p| a * f64::from(p) + b).collect(),
            work: Vec::new(),
            fail: None,
        })
        .collect();
    Scenario {
        nodes,
        n_phases: 4,
        workers,
    }
}
