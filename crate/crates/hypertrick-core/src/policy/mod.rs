//! Early-stopping policies and their closed-form analysis.
//!
//! Three policies share one decision vocabulary ([`crate::study::Decision`]):
//!
//! * **Asynchronous eviction** ([`hypertrick_decide`]): decides per report,
//!   with no barrier. Reports arriving while a phase's pool is small are let
//!   through unconditionally (the deterministic-count regime); later reports
//!   must clear the pool's `sqrt(r)` quantile.
//! * **Successive halving** ([`successive_halving_cut`]): synchronized; at
//!   each inter-phase barrier the bottom `r` fraction is evicted.
//! * **Grid search**: never evicts; only the schedule varies.
//!
//! [`hyperband`] enumerates successive-halving brackets, and [`completion`]
//! gives the expected/minimum completion rate of the asynchronous policy as a
//! function of `r`, plus a numeric inverse.

mod completion;
mod engine;
mod halving;
mod hyperband;
mod hypertrick;
mod quantile;
mod stats;

pub use completion::{SolveError, expected_alpha, min_alpha, solve_eviction_rate};
pub use engine::{DecisionOut, PolicyEngine, PolicyParams};
pub use halving::{SuccessiveHalvingParams, successive_halving_cut};
pub use hyperband::{
    Bracket, BracketRound, HyperbandError, bracket_alpha, canonical_bracket_sizes,
    hyperband_alpha, hyperband_brackets,
};
pub use hypertrick::{HyperTrickParams, dcm_threshold, expected_workers, hypertrick_decide};
pub use quantile::quantile;
pub use stats::PhaseStats;
