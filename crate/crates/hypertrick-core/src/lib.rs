//! Scheduling, early stopping, and analysis for phased hyperparameter studies.
//!
//! A *study* runs `W_0` worker configurations on a cluster of `N` nodes. Each
//! worker executes `N_p` sequential phases and reports a scalar metric (higher
//! is better) at the end of every phase. A policy decides, per report, whether
//! the worker continues into its next phase or is terminated so its node can
//! be reallocated to a configuration that has not started yet.
//!
//! This crate provides:
//!
//! * [`policy`]: the asynchronous early-stopping rule (eviction rate `r`, a
//!   deterministic-count regime followed by a quantile-threshold regime),
//!   synchronized successive halving, Hyperband bracket enumeration, and the
//!   closed-form completion-rate analysis including a numeric inverse.
//! * [`sim`]: a deterministic discrete-event simulator for heterogeneous
//!   clusters under four scheduling disciplines, plus scenario generators and
//!   a Monte-Carlo harness for the eviction-rate analysis.
//! * [`analysis`]: post-hoc summaries (makespan, completion rate, occupancy,
//!   best metric) over recorded timelines, and multi-study comparison.
//! * [`space`]: search-space description and seeded configuration sampling.
//!
//! The crate is `no_std` (with `alloc`); all IO lives in companion crates.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod analysis;
mod math;
pub mod policy;
pub mod sim;
pub mod space;
pub mod study;
