//! Running per-phase metric pools.

use alloc::vec;
use alloc::vec::Vec;

use super::quantile::quantile_sorted;

/// Every metric ever reported at each phase, kept as sorted multisets.
///
/// Pools only grow: metrics of workers that were later terminated (or died)
/// are retained, because each pool describes the population that reached that
/// phase, not the set of workers still running.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PhaseStats {
    pools: Vec<Vec<f64>>,
}

impl PhaseStats {
    pub fn new(n_phases: u32) -> Self {
        PhaseStats {
            pools: vec![Vec::new(); n_phases as usize],
        }
    }

    pub fn n_phases(&self) -> u32 {
        self.pools.len() as u32
    }

    /// Inserts a metric into the pool for `phase`, keeping it sorted.
    pub fn record(&mut self, phase: u32, metric: f64) {
        debug_assert!(metric.is_finite(), "metrics must be finite");
        let pool = &mut self.pools[phase as usize];
        let idx = pool.partition_point(|x| *x < metric);
        pool.insert(idx, metric);
    }

    /// Number of reports recorded at `phase` so far.
    pub fn count(&self, phase: u32) -> usize {
        self.pools[phase as usize].len()
    }

    /// The pool for `phase`, ascending.
    pub fn pool(&self, phase: u32) -> &[f64] {
        &self.pools[phase as usize]
    }

    /// Interpolated `q`-quantile of the pool for `phase`, or `None` while the
    /// pool is empty.
    pub fn quantile(&self, phase: u32, q: f64) -> Option<f64> {
        let pool = &self.pools[phase as usize];
        if pool.is_empty() {
            None
        } else {
            Some(quantile_sorted(pool, q))
        }
    }
}
