//! Monte-Carlo verification of the expected-field formula.
//!
//! Timing is abstracted away: each run walks the phases in order, presents
//! the survivors' reports in a fresh uniformly random order per phase, draws
//! each metric i.i.d., and applies the asynchronous decision rule. Averaging
//! the field size entering each phase over many runs estimates `E[W_p]`,
//! which the closed form says is `W_0 * (1-r)^p`.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::policy::{HyperTrickParams, PhaseStats, hypertrick_decide};
use crate::study::{Decision, PhaseReport};

use super::synthetic;

/// The per-report metric distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MetricModel {
    /// Uniform on [0, 1).
    Uniform01,
    /// Gaussian with the given mean and standard deviation.
    Gaussian { mean: f64, sd: f64 },
}

impl MetricModel {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            MetricModel::Uniform01 => rng.gen_range(0.0..1.0),
            MetricModel::Gaussian { mean, sd } => mean + sd * synthetic::standard_normal(rng),
        }
    }
}

/// Mean survivor counts from a Monte-Carlo sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct McResult {
    /// `mean_survivors[p]` is the average field size entering phase `p`.
    pub mean_survivors: Vec<f64>,
    pub n_runs: u32,
}

impl McResult {
    /// Relative error of the measured mean against `W_0 * (1-r)^p`.
    pub fn relative_errors(&self, params: &HyperTrickParams) -> Vec<f64> {
        self.mean_survivors
            .iter()
            .enumerate()
            .map(|(p, measured)| {
                let predicted = crate::policy::expected_workers(params.w0, params.r, p as u32);
                (measured - predicted).abs() / predicted
            })
            .collect()
    }
}

/// Runs `n_runs` independent decision processes and averages the field size
/// entering each phase. Deterministic given `seed`.
pub fn monte_carlo_eviction(
    params: &HyperTrickParams,
    n_runs: u32,
    model: MetricModel,
    seed: u64,
) -> McResult {
    assert!(n_runs >= 1, "at least one run required");
    let n_phases = params.n_phases as usize;
    let mut totals = alloc::vec![0u64; n_phases];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for _ in 0..n_runs {
        let mut stats = PhaseStats::new(params.n_phases);
        let mut survivors: Vec<u32> = (0..params.w0).collect();
        for phase in 0..params.n_phases {
            totals[phase as usize] += survivors.len() as u64;
            if survivors.is_empty() {
                continue;
            }
            // Report arrival order is uniformly random within the phase.
            survivors.shuffle(&mut rng);
            let mut next = Vec::with_capacity(survivors.len());
            for &worker in &survivors {
                let report = PhaseReport {
                    worker,
                    config: worker,
                    phase,
                    metric: model.draw(&mut rng),
                    time: 0.0,
                };
                if hypertrick_decide(params, &mut stats, &report) == Decision::Continue {
                    next.push(worker);
                }
            }
            survivors = next;
        }
    }

    McResult {
        mean_survivors: totals
            .iter()
            .map(|total| *total as f64 / f64::from(n_runs))
            .collect(),
        n_runs,
    }
}
