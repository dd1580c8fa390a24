//! Search-space description and seeded configuration sampling.
//!
//! A [`SearchSpace`] is an ordered map from parameter name to sampling domain.
//! Order matters: one configuration draw consumes RNG values in declaration
//! order, so a given seed always yields the same configuration sequence.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use fnv::FnvBuildHasher;
use indexmap::IndexMap;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::math;

/// Insertion-ordered map with a fixed hash function, so iteration order and
/// behaviour never depend on the platform.
pub type OrderedMap<K, V> = IndexMap<K, V, FnvBuildHasher>;

/// One hyperparameter's sampling domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamDomain {
    /// `exp(U(ln lo, ln hi))`: log-uniform over `[lo, hi)`, both positive.
    LogUniform { lo: f64, hi: f64 },
    /// A log-uniform draw snapped to the nearest multiple of `step` that lies
    /// within `[lo, hi]`.
    QuantizedLogUniform { lo: f64, hi: f64, step: f64 },
    /// Uniform over an explicit list of values.
    Categorical { values: Vec<ParamValue> },
}

/// A concrete parameter value: a real number or a symbolic label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Real(f64),
    Label(String),
}

impl ParamValue {
    /// The numeric payload, if this value is a real.
    pub fn as_real(&self) -> Option<f64> {
        match self {
            ParamValue::Real(x) => Some(*x),
            ParamValue::Label(_) => None,
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Real(x) => write!(f, "{x}"),
            ParamValue::Label(s) => write!(f, "{s}"),
        }
    }
}

/// Ordered map of parameter name to domain. Names are unique by construction.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub params: OrderedMap<String, ParamDomain>,
}

/// A sampled assignment of every parameter, in space order.
pub type Configuration = OrderedMap<String, ParamValue>;

/// A constraint a domain violates, attributed to its parameter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceViolation {
    pub param: String,
    pub kind: ViolationKind,
}

impl fmt::Display for SpaceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.param, self.kind)
    }
}

/// Why a domain is unusable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// `lo >= hi` on an interval domain.
    LoNotBelowHi,
    /// A log-scale bound is zero or negative.
    LoNotPositive,
    /// A bound or step is NaN or infinite.
    NonFiniteBound,
    /// `step <= 0` on a quantized domain.
    StepNotPositive,
    /// No multiple of `step` falls inside `[lo, hi]`.
    NoStepMultipleInRange,
    /// A categorical domain with no values.
    EmptyCategorical,
    /// A categorical domain listing the same value twice.
    DuplicateCategoricalValue,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            ViolationKind::LoNotBelowHi => "lo >= hi",
            ViolationKind::LoNotPositive => "lo <= 0",
            ViolationKind::NonFiniteBound => "non-finite bound",
            ViolationKind::StepNotPositive => "step <= 0",
            ViolationKind::NoStepMultipleInRange => "no multiple of step within [lo, hi]",
            ViolationKind::EmptyCategorical => "empty categorical",
            ViolationKind::DuplicateCategoricalValue => "duplicate categorical value",
        };
        f.write_str(msg)
    }
}

impl core::error::Error for SpaceViolation {}

/// Checks every domain and returns all violations found, in space order.
/// An empty result means the space is safe to sample from.
pub fn validate_space(space: &SearchSpace) -> Vec<SpaceViolation> {
    let mut out = Vec::new();
    let mut push = |param: &String, kind: ViolationKind| {
        out.push(SpaceViolation {
            param: param.clone(),
            kind,
        });
    };
    for (name, domain) in &space.params {
        match domain {
            ParamDomain::LogUniform { lo, hi } => {
                check_log_bounds(name, *lo, *hi, &mut push);
            }
            ParamDomain::QuantizedLogUniform { lo, hi, step } => {
                let bounds_ok = check_log_bounds(name, *lo, *hi, &mut push);
                if !step.is_finite() {
                    push(name, ViolationKind::NonFiniteBound);
                } else if *step <= 0.0 {
                    push(name, ViolationKind::StepNotPositive);
                } else if bounds_ok {
                    let k_min = math::ceil(lo / step);
                    let k_max = math::floor(hi / step);
                    if k_min > k_max || k_max < 1.0 {
                        push(name, ViolationKind::NoStepMultipleInRange);
                    }
                }
            }
            ParamDomain::Categorical { values } => {
                if values.is_empty() {
                    push(name, ViolationKind::EmptyCategorical);
                }
                for (i, v) in values.iter().enumerate() {
                    if values[..i].contains(v) {
                        push(name, ViolationKind::DuplicateCategoricalValue);
                        break;
                    }
                }
                if values
                    .iter()
                    .any(|v| matches!(v, ParamValue::Real(x) if !x.is_finite()))
                {
                    push(name, ViolationKind::NonFiniteBound);
                }
            }
        }
    }
    out
}

fn check_log_bounds(
    name: &String,
    lo: f64,
    hi: f64,
    push: &mut impl FnMut(&String, ViolationKind),
) -> bool {
    if !lo.is_finite() || !hi.is_finite() {
        push(name, ViolationKind::NonFiniteBound);
        return false;
    }
    let mut ok = true;
    if lo <= 0.0 {
        push(name, ViolationKind::LoNotPositive);
        ok = false;
    }
    if lo >= hi {
        push(name, ViolationKind::LoNotBelowHi);
        ok = false;
    }
    ok
}

/// Draws one configuration. Consumes exactly one RNG draw per parameter, in
/// space order, so sequences are reproducible from the seed alone.
///
/// The space must be valid (see [`validate_space`]).
pub fn sample_configuration<R: Rng + ?Sized>(space: &SearchSpace, rng: &mut R) -> Configuration {
    let mut config = Configuration::default();
    for (name, domain) in &space.params {
        let value = match domain {
            ParamDomain::LogUniform { lo, hi } => ParamValue::Real(draw_log_uniform(*lo, *hi, rng)),
            ParamDomain::QuantizedLogUniform { lo, hi, step } => {
                let raw = draw_log_uniform(*lo, *hi, rng);
                ParamValue::Real(snap_to_step(raw, *lo, *hi, *step))
            }
            ParamDomain::Categorical { values } => values[rng.gen_range(0..values.len())].clone(),
        };
        config.insert(name.clone(), value);
    }
    config
}

fn draw_log_uniform<R: Rng + ?Sized>(lo: f64, hi: f64, rng: &mut R) -> f64 {
    let u = rng.gen_range(math::ln(lo)..math::ln(hi));
    math::exp(u)
}

/// Rounds `raw` to the nearest multiple of `step`, clamped to the multiples
/// that lie inside `[lo, hi]`.
fn snap_to_step(raw: f64, lo: f64, hi: f64, step: f64) -> f64 {
    let k_min = math::ceil(lo / step);
    let k_max = math::floor(hi / step);
    let k = math::round(raw / step).clamp(k_min, k_max);
    k * step
}
