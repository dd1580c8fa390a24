//! The asynchronous eviction rule.
//!
//! With eviction rate `r`, the expected number of workers entering phase `p`
//! is `W_0 * (1-r)^p`. Each report is judged the moment it arrives:
//!
//! * While fewer than `floor(W_0 * (1 - sqrt(r)) * (1-r)^p)` reports have been
//!   recorded at phase `p`, the report is accepted unconditionally. This
//!   deterministic-count regime protects early reports from being judged
//!   against a pool too small to rank them meaningfully.
//! * Afterwards the report must reach the pool's `sqrt(r)` quantile (the pool
//!   including the report itself). Strictly smaller means terminate; equal
//!   survives. Two `sqrt(r)` factors, one per regime, compound to an eviction
//!   rate of `r` per phase in expectation.

use crate::math;
use crate::study::{Decision, PhaseReport};

use super::stats::PhaseStats;

/// Validated parameters for the asynchronous eviction policy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperTrickParams {
    pub w0: u32,
    pub r: f64,
    pub n_phases: u32,
}

impl HyperTrickParams {
    pub fn new(w0: u32, r: f64, n_phases: u32) -> Result<Self, crate::study::ParamError> {
        let params = HyperTrickParams { w0, r, n_phases };
        crate::study::RunParams {
            w0,
            r,
            n_phases,
            n_nodes: 1,
            seed: 0,
        }
        .validate()?;
        Ok(params)
    }
}

/// Expected worker count entering phase `p`: `W_0 * (1-r)^p`.
pub fn expected_workers(w0: u32, r: f64, phase: u32) -> f64 {
    f64::from(w0) * math::powi(1.0 - r, phase)
}

/// Size of the deterministic-count regime at phase `p`:
/// `floor(W_0 * (1 - sqrt(r)) * (1-r)^p)`.
///
/// Reports with index below this value (zero-based arrival order within the
/// phase) continue unconditionally.
pub fn dcm_threshold(w0: u32, r: f64, phase: u32) -> u32 {
    let expected = expected_workers(w0, r, phase);
    math::floor((1.0 - math::sqrt(r)) * expected) as u32
}

/// Judges one report, recording its metric into `stats`.
///
/// The report's metric joins the phase pool unconditionally (even when the
/// verdict is terminate), so later arrivals are judged against everything
/// that ran the phase. At the final phase a surviving report completes the
/// worker instead of continuing it.
pub fn hypertrick_decide(
    params: &HyperTrickParams,
    stats: &mut PhaseStats,
    report: &PhaseReport,
) -> Decision {
    debug_assert!(report.phase < params.n_phases);
    let arrivals_before = stats.count(report.phase);
    stats.record(report.phase, report.metric);
    let last_phase = report.phase + 1 == params.n_phases;

    if (arrivals_before as u64) < u64::from(dcm_threshold(params.w0, params.r, report.phase)) {
        return if last_phase {
            Decision::Complete
        } else {
            Decision::Continue
        };
    }

    let threshold = stats
        .quantile(report.phase, math::sqrt(params.r))
        .expect("pool contains at least the current report");
    if report.metric < threshold {
        Decision::Terminate
    } else if last_phase {
        Decision::Complete
    } else {
        Decision::Continue
    }
}
