//! Synchronized successive-halving eviction.

use alloc::vec::Vec;

use crate::study::{ParamError, check_rate};

use super::quantile::quantile;

/// Validated parameters for synchronized successive halving.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuccessiveHalvingParams {
    /// Fraction of the field evicted at each inter-phase barrier, in (0, 1).
    pub evict_fraction: f64,
    pub n_phases: u32,
}

impl SuccessiveHalvingParams {
    pub fn new(evict_fraction: f64, n_phases: u32) -> Result<Self, ParamError> {
        check_rate(evict_fraction)?;
        if n_phases == 0 {
            return Err(ParamError::NoPhases);
        }
        Ok(SuccessiveHalvingParams {
            evict_fraction,
            n_phases,
        })
    }
}

/// The barrier cut: workers whose metric falls strictly below the
/// `evict_fraction` quantile of the field are terminated. Ties with the
/// quantile survive, so the cut never removes everyone and never removes a
/// unique maximum.
///
/// `survivors` holds one `(worker_id, metric)` pair per worker at the
/// barrier; it must be non-empty. Returns terminated ids, ascending.
pub fn successive_halving_cut(survivors: &[(u32, f64)], evict_fraction: f64) -> Vec<u32> {
    assert!(!survivors.is_empty(), "cut over an empty field");
    let metrics: Vec<f64> = survivors.iter().map(|(_, m)| *m).collect();
    let threshold = quantile(&metrics, evict_fraction);
    let mut out: Vec<u32> = survivors
        .iter()
        .filter(|(_, m)| *m < threshold)
        .map(|(w, _)| *w)
        .collect();
    out.sort_unstable();
    out
}
