//! Hyperband bracket enumeration and its completion-rate accounting.
//!
//! Hyperband runs one successive-halving instance (a *bracket*) per
//! aggressiveness level `s = s_max .. 0`, with `s_max = floor(log_eta(R))`.
//! Round `i` of bracket `s` runs `n_i` configurations for `r_i = R * eta^(i-s)`
//! resource units each, halving the field between rounds:
//! `n_{i+1} = floor(n_i / eta)`.

use alloc::vec::Vec;
use core::fmt;

/// One successive-halving round: `n` configurations, `r` resource units each.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BracketRound {
    pub n: u32,
    pub r: u32,
}

/// One successive-halving instance within Hyperband.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bracket {
    pub s: u32,
    pub rounds: Vec<BracketRound>,
}

impl Bracket {
    pub fn n0(&self) -> u32 {
        self.rounds[0].n
    }

    /// Total resource units the bracket actually spends.
    pub fn spent(&self) -> u64 {
        self.rounds
            .iter()
            .map(|round| u64::from(round.n) * u64::from(round.r))
            .sum()
    }

    /// Resource units if every starter ran the full budget `R`.
    pub fn full_budget(&self, r_max: u32) -> u64 {
        u64::from(self.n0()) * u64::from(r_max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HyperbandError {
    /// `eta` must be at least 2 for the field to shrink.
    EtaTooSmall,
    /// `R` must be at least 1.
    RNotPositive,
    /// `R` must be a power of `eta` so every round's resource count is whole.
    RNotPowerOfEta,
    /// An explicit size list must provide one `n_0` per bracket.
    OverrideLengthMismatch { expected: usize, got: usize },
    /// An `n_0` too small to survive `s` halvings (some round would be empty).
    BracketExhausted { s: u32, n0: u32 },
}

impl fmt::Display for HyperbandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HyperbandError::EtaTooSmall => f.write_str("eta must be at least 2"),
            HyperbandError::RNotPositive => f.write_str("R must be at least 1"),
            HyperbandError::RNotPowerOfEta => f.write_str("R must be a power of eta"),
            HyperbandError::OverrideLengthMismatch { expected, got } => write!(
                f,
                "bracket size list must have {expected} entries (one per bracket), got {got}"
            ),
            HyperbandError::BracketExhausted { s, n0 } => write!(
                f,
                "bracket s={s} starting from n0={n0} reaches an empty round"
            ),
        }
    }
}

impl core::error::Error for HyperbandError {}

/// `floor(log_eta(r_max))` plus a flag for whether `r_max` is an exact power.
fn int_log(eta: u32, r_max: u32) -> (u32, bool) {
    let mut s = 0u32;
    let mut acc = 1u64;
    while acc * u64::from(eta) <= u64::from(r_max) {
        acc *= u64::from(eta);
        s += 1;
    }
    (s, acc == u64::from(r_max))
}

/// The canonical starting sizes `n_0 = ceil((s_max+1) / (s+1) * eta^s)` for
/// brackets `s = s_max .. 0`, chosen so each bracket's budget is comparable.
pub fn canonical_bracket_sizes(eta: u32, r_max: u32) -> Result<Vec<u32>, HyperbandError> {
    let s_max = validate(eta, r_max)?;
    let mut sizes = Vec::with_capacity(s_max as usize + 1);
    for s in (0..=s_max).rev() {
        let mut pow = 1u64;
        for _ in 0..s {
            pow *= u64::from(eta);
        }
        let num = u64::from(s_max + 1) * pow;
        let den = u64::from(s + 1);
        sizes.push(num.div_ceil(den) as u32);
    }
    Ok(sizes)
}

fn validate(eta: u32, r_max: u32) -> Result<u32, HyperbandError> {
    if eta < 2 {
        return Err(HyperbandError::EtaTooSmall);
    }
    if r_max == 0 {
        return Err(HyperbandError::RNotPositive);
    }
    let (s_max, exact) = int_log(eta, r_max);
    if !exact {
        return Err(HyperbandError::RNotPowerOfEta);
    }
    Ok(s_max)
}

/// Enumerates brackets `s = s_max .. 0`. Starting sizes come from
/// `n0_override` when given (most aggressive bracket first), otherwise from
/// [`canonical_bracket_sizes`].
pub fn hyperband_brackets(
    eta: u32,
    r_max: u32,
    n0_override: Option<&[u32]>,
) -> Result<Vec<Bracket>, HyperbandError> {
    let s_max = validate(eta, r_max)?;
    let sizes = match n0_override {
        Some(sizes) => {
            if sizes.len() != s_max as usize + 1 {
                return Err(HyperbandError::OverrideLengthMismatch {
                    expected: s_max as usize + 1,
                    got: sizes.len(),
                });
            }
            sizes.to_vec()
        }
        None => canonical_bracket_sizes(eta, r_max)?,
    };

    let mut brackets = Vec::with_capacity(sizes.len());
    for (idx, &n0) in sizes.iter().enumerate() {
        let s = s_max - idx as u32;
        // r_0 = R / eta^s, exact because R is a power of eta.
        let mut resource = r_max;
        for _ in 0..s {
            resource /= eta;
        }
        let mut rounds = Vec::with_capacity(s as usize + 1);
        let mut n = n0;
        for _ in 0..=s {
            if n == 0 {
                return Err(HyperbandError::BracketExhausted { s, n0 });
            }
            rounds.push(BracketRound { n, r: resource });
            n /= eta;
            resource = resource.saturating_mul(eta);
        }
        brackets.push(Bracket { s, rounds });
    }
    Ok(brackets)
}

/// Fraction of the bracket's full-budget work actually performed:
/// `sum_i(n_i * r_i) / (n_0 * R)`.
pub fn bracket_alpha(bracket: &Bracket, r_max: u32) -> f64 {
    bracket.spent() as f64 / bracket.full_budget(r_max) as f64
}

/// Completion rate across all brackets:
/// `sum_s sum_i(n_i * r_i) / sum_s(n_0 * R)`.
pub fn hyperband_alpha(brackets: &[Bracket], r_max: u32) -> f64 {
    let spent: u64 = brackets.iter().map(Bracket::spent).sum();
    let full: u64 = brackets.iter().map(|b| b.full_budget(r_max)).sum();
    spent as f64 / full as f64
}
