//! Shared study-level domain types.

use core::fmt;

use serde::{Deserialize, Serialize};

/// A compute node. `speed` is a duration multiplier: a phase of `w` work units
/// occupies the node for `w * speed` time units, so larger means slower.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: u32,
    pub speed: f64,
}

/// Parameters common to a whole study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunParams {
    /// Number of configurations to evaluate.
    pub w0: u32,
    /// Eviction rate in (0, 1).
    pub r: f64,
    /// Phases per worker.
    pub n_phases: u32,
    /// Cluster size.
    pub n_nodes: u32,
    /// Seed for all sampling tied to the study.
    pub seed: u64,
}

impl RunParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        if self.w0 == 0 {
            return Err(ParamError::NoWorkers);
        }
        if self.n_phases == 0 {
            return Err(ParamError::NoPhases);
        }
        if self.n_nodes == 0 {
            return Err(ParamError::NoNodes);
        }
        check_rate(self.r)?;
        Ok(())
    }
}

/// Validates an eviction rate or eviction fraction.
pub fn check_rate(r: f64) -> Result<(), ParamError> {
    if r.is_finite() && r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(ParamError::RateOutOfRange)
    }
}

/// A study parameter outside its domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamError {
    RateOutOfRange,
    NoWorkers,
    NoPhases,
    NoNodes,
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            ParamError::RateOutOfRange => "r must be in (0,1)",
            ParamError::NoWorkers => "worker count must be at least 1",
            ParamError::NoPhases => "phase count must be at least 1",
            ParamError::NoNodes => "node count must be at least 1",
        };
        f.write_str(msg)
    }
}

impl core::error::Error for ParamError {}

/// One end-of-phase metric report. Phases are zero-based: a worker that runs
/// to completion reports phases `0 ..= n_phases - 1`, each exactly once, with
/// non-decreasing `time`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseReport {
    pub worker: u32,
    pub config: u32,
    pub phase: u32,
    pub metric: f64,
    pub time: f64,
}

/// Verdict attached to a single report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    /// Proceed into the next phase.
    Continue,
    /// Stop now; the node is reallocated.
    Terminate,
    /// Final phase accepted; the worker finished the whole schedule.
    Complete,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            Decision::Continue => "continue",
            Decision::Terminate => "terminate",
            Decision::Complete => "complete",
        };
        f.write_str(msg)
    }
}
