//! Closed-form completion rates of the asynchronous eviction policy.
//!
//! The completion rate alpha is the fraction of the full `W_0 * N_p` phase
//! budget actually executed. With eviction rate `r`, the expected field at
//! phase `p` is `W_0 (1-r)^p`, so summing the geometric series:
//!
//! `E[alpha](r, N_p) = (1 - (1-r)^{N_p}) / (r * N_p)`
//!
//! The deterministic-count regime guarantees at least a `(1 - sqrt(r))`
//! share of each phase's expected field, giving the floor
//! `min[alpha] = (1 - sqrt(r)) * E[alpha]`.

use core::fmt;

use crate::math;

/// Expected completion rate `E[alpha](r, n_phases)`.
///
/// `r` must lie in (0, 1) and `n_phases` be at least 1. Strictly decreasing
/// in `r`, with limits 1 as `r -> 0` and `1/n_phases` as `r -> 1`.
pub fn expected_alpha(r: f64, n_phases: u32) -> f64 {
    (1.0 - math::powi(1.0 - r, n_phases)) / (r * f64::from(n_phases))
}

/// Guaranteed lower bound `min[alpha] = (1 - sqrt(r)) * E[alpha]`.
pub fn min_alpha(r: f64, n_phases: u32) -> f64 {
    (1.0 - math::sqrt(r)) * expected_alpha(r, n_phases)
}

/// Bisection bracket: rates are searched in `[RATE_EPS, 1 - RATE_EPS]`.
const RATE_EPS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolveError {
    /// The target lies outside the range `expected_alpha` attains on the
    /// search bracket; `attainable` is that open interval.
    UnachievableTarget { target: f64, attainable: (f64, f64) },
    /// `expected_alpha(r, 1) = 1` identically, so no inverse exists.
    PhasesNotInvertible,
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::UnachievableTarget {
                target,
                attainable: (lo, hi),
            } => write!(
                f,
                "unachievable target {target}: expected completion rate only attains ({lo:.6}, {hi:.6})"
            ),
            SolveError::PhasesNotInvertible => f.write_str(
                "expected completion rate is constant for fewer than 2 phases; no rate solves for it",
            ),
        }
    }
}

impl core::error::Error for SolveError {}

/// Inverts [`expected_alpha`] in `r` by bisection.
///
/// Returns the rate `r` in `[1e-6, 1 - 1e-6]` with
/// `|expected_alpha(r, n_phases) - target_alpha| < 1e-6`. The interval is
/// narrowed to width 1e-12 so the returned rate itself is accurate to that
/// order, not just its image.
pub fn solve_eviction_rate(target_alpha: f64, n_phases: u32) -> Result<f64, SolveError> {
    if n_phases < 2 {
        return Err(SolveError::PhasesNotInvertible);
    }
    let mut lo = RATE_EPS;
    let mut hi = 1.0 - RATE_EPS;
    // expected_alpha is strictly decreasing in r: alpha_lo > alpha_hi.
    let alpha_lo = expected_alpha(lo, n_phases);
    let alpha_hi = expected_alpha(hi, n_phases);
    if !target_alpha.is_finite() || target_alpha <= alpha_hi || target_alpha >= alpha_lo {
        return Err(SolveError::UnachievableTarget {
            target: target_alpha,
            attainable: (alpha_hi, alpha_lo),
        });
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if expected_alpha(mid, n_phases) > target_alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() < tol
    }

    #[test]
    fn reference_rates_for_ten_phases() {
        // r = 0.25, N_p = 10: E = (1 - 0.75^10) / 2.5, min = E / 2.
        assert!(close(expected_alpha(0.25, 10), 0.3774745941162109, 1e-15));
        assert!(close(min_alpha(0.25, 10), 0.18873729705810547, 1e-15));
    }

    #[test]
    fn reference_rates_for_five_phases() {
        assert_eq!(expected_alpha(0.25, 5), 0.61015625);
        assert_eq!(min_alpha(0.25, 5), 0.305078125);
    }

    #[test]
    fn reference_rates_for_four_phases() {
        assert_eq!(expected_alpha(0.25, 4), 0.68359375);
        assert_eq!(min_alpha(0.25, 4), 0.341796875);
    }

    #[test]
    fn single_phase_is_always_fully_completed() {
        // Algebraically (1 - (1-r))/r = 1; allow a couple of ulps from the
        // literal evaluation.
        for r in [0.01, 0.25, 0.5, 0.9] {
            assert!(close(expected_alpha(r, 1), 1.0, 1e-12));
        }
    }

    #[test]
    fn min_alpha_is_the_sqrt_discounted_expectation() {
        for r in [0.05, 0.25, 0.6] {
            for n in [2, 5, 27] {
                let expected = (1.0 - libm::sqrt(r)) * expected_alpha(r, n);
                assert!(close(min_alpha(r, n), expected, 1e-15));
            }
        }
    }

    #[test]
    fn solver_round_trips_through_expected_alpha() {
        let target = expected_alpha(0.25, 10);
        let r = solve_eviction_rate(target, 10).unwrap();
        assert!(close(r, 0.25, 1e-9), "got {r}");
    }

    #[test]
    fn solver_inverts_published_hyperband_rate() {
        // Inverse of E[alpha] at 0.3261 for 27 phases, frozen from an
        // independent high-precision evaluation.
        let r = solve_eviction_rate(0.3261, 27).unwrap();
        assert!(close(r, 0.108457454960919, 1e-9), "got {r}");
        assert!(close(expected_alpha(r, 27), 0.3261, 1e-9));
    }

    #[test]
    fn near_one_target_is_unachievable() {
        let err = solve_eviction_rate(0.999999, 27).unwrap_err();
        match err {
            SolveError::UnachievableTarget {
                target,
                attainable: (lo, hi),
            } => {
                assert_eq!(target, 0.999999);
                assert!(lo < hi && hi < 1.0);
            }
            other => panic!("wrong error {other:?}"),
        }
        let msg = alloc::format!("{err}");
        assert!(msg.contains("unachievable target"), "message was: {msg}");
    }

    #[test]
    fn too_low_target_is_unachievable() {
        // E[alpha](r, 27) > 1/27 for all r in the bracket.
        assert!(matches!(
            solve_eviction_rate(0.01, 27),
            Err(SolveError::UnachievableTarget { .. })
        ));
    }

    #[test]
    fn single_phase_solve_is_rejected() {
        assert_eq!(
            solve_eviction_rate(0.5, 1),
            Err(SolveError::PhasesNotInvertible)
        );
        assert_eq!(
            solve_eviction_rate(0.5, 0),
            Err(SolveError::PhasesNotInvertible)
        );
    }
}
