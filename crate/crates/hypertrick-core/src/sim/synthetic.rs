//! Randomized scenario generation for property tests and demo studies.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::math;
use crate::space::{Configuration, SearchSpace, sample_configuration, validate_space};
use crate::study::{NodeSpec, RunParams};

use super::{Scenario, SimError, WorkerSpec};

/// A scalar drawn per worker.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ValueDist {
    Constant(f64),
    Uniform { lo: f64, hi: f64 },
}

impl ValueDist {
    fn validate(&self) -> Result<(), SimError> {
        match self {
            ValueDist::Constant(x) if x.is_finite() => Ok(()),
            ValueDist::Uniform { lo, hi } if lo.is_finite() && hi.is_finite() && lo <= hi => Ok(()),
            _ => Err(SimError::BadModel {
                reason: "distribution bounds must be finite with lo <= hi",
            }),
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ValueDist::Constant(x) => *x,
            ValueDist::Uniform { lo, hi } => {
                if lo == hi {
                    *lo
                } else {
                    rng.gen_range(*lo..*hi)
                }
            }
        }
    }
}

/// How a worker's metric curve is generated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MetricModelSpec {
    /// `metric(p) = slope * p + intercept`, coefficients drawn per worker.
    Linear {
        intercept: ValueDist,
        slope: ValueDist,
    },
    /// A saturating curve `plateau * (1 - exp(-rate * (p + 1)))` plus
    /// zero-mean Gaussian noise per report.
    NoisyCurve {
        plateau: ValueDist,
        rate: ValueDist,
        noise_sd: f64,
    },
}

/// How a configuration maps to per-phase work units.
#[derive(Clone, Debug, PartialEq)]
pub enum CostModel {
    /// Unit work everywhere.
    Unit,
    /// `work[p] = value_of(param) / divisor` for every phase; the parameter
    /// must be numeric in every sampled configuration.
    PerPhaseFromParam { param: String, divisor: f64 },
}

/// Generates a scenario of `run.w0` workers on `run.n_nodes` unit-speed
/// nodes, deterministically from `run.seed`. Also returns the sampled
/// configuration behind each worker, in worker order.
pub fn synthetic_scenario(
    model: &MetricModelSpec,
    run: &RunParams,
    space: &SearchSpace,
    cost: &CostModel,
) -> Result<(Scenario, Vec<Configuration>), SimError> {
    run.validate()?;
    validate_model(model)?;
    if !validate_space(space).is_empty() {
        return Err(SimError::BadModel {
            reason: "search space is invalid",
        });
    }
    if let CostModel::PerPhaseFromParam { param, divisor } = cost {
        if !space.params.contains_key(param.as_str()) {
            return Err(SimError::BadModel {
                reason: "cost model names a parameter the space lacks",
            });
        }
        if !(divisor.is_finite() && *divisor > 0.0) {
            return Err(SimError::BadModel {
                reason: "cost divisor must be positive and finite",
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    let mut workers = Vec::with_capacity(run.w0 as usize);
    let mut configs = Vec::with_capacity(run.w0 as usize);
    for id in 0..run.w0 {
        let config = sample_configuration(space, &mut rng);
        let metrics = draw_metrics(model, run.n_phases, &mut rng);
        let work = match cost {
            CostModel::Unit => Vec::new(),
            CostModel::PerPhaseFromParam { param, divisor } => {
                let value = config[param.as_str()].as_real().ok_or(SimError::BadModel {
                    reason: "cost parameter must be numeric",
                })?;
                let units = value / divisor;
                if !(units.is_finite() && units > 0.0) {
                    return Err(SimError::BadModel {
                        reason: "cost model produced non-positive work",
                    });
                }
                alloc::vec![units; run.n_phases as usize]
            }
        };
        workers.push(WorkerSpec {
            id,
            metrics,
            work,
            fail: None,
        });
        configs.push(config);
    }

    let nodes = (0..run.n_nodes)
        .map(|id| NodeSpec { id, speed: 1.0 })
        .collect();
    Ok((
        Scenario {
            nodes,
            n_phases: run.n_phases,
            workers,
        },
        configs,
    ))
}

fn validate_model(model: &MetricModelSpec) -> Result<(), SimError> {
    match model {
        MetricModelSpec::Linear { intercept, slope } => {
            intercept.validate()?;
            slope.validate()
        }
        MetricModelSpec::NoisyCurve {
            plateau,
            rate,
            noise_sd,
        } => {
            plateau.validate()?;
            rate.validate()?;
            if noise_sd.is_finite() && *noise_sd >= 0.0 {
                Ok(())
            } else {
                Err(SimError::BadModel {
                    reason: "noise_sd must be non-negative and finite",
                })
            }
        }
    }
}

fn draw_metrics<R: Rng + ?Sized>(model: &MetricModelSpec, n_phases: u32, rng: &mut R) -> Vec<f64> {
    match model {
        MetricModelSpec::Linear { intercept, slope } => {
            let b = intercept.draw(rng);
            let a = slope.draw(rng);
            (0..n_phases).map(|p| a * f64::from(p) + b).collect()
        }
        MetricModelSpec::NoisyCurve {
            plateau,
            rate,
            noise_sd,
        } => {
            let plateau = plateau.draw(rng);
            let rate = rate.draw(rng);
            (0..n_phases)
                .map(|p| {
                    let base = plateau * (1.0 - math::exp(-rate * f64::from(p + 1)));
                    base + noise_sd * standard_normal(rng)
                })
                .collect()
        }
    }
}

/// One standard-normal draw via the Box-Muller transform.
pub(super) fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // 1 - U maps [0,1) to (0,1], keeping the log argument positive.
    let u1: f64 = 1.0 - rng.gen_range(0.0..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * core::f64::consts::PI * u2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ParamDomain;
    use alloc::string::ToString;

    fn run(w0: u32, n_phases: u32, seed: u64) -> RunParams {
        RunParams {
            w0,
            r: 0.25,
            n_phases,
            n_nodes: 4,
            seed,
        }
    }

    fn lr_space() -> SearchSpace {
        let mut space = SearchSpace::default();
        space.params.insert("t_max".to_string(), ParamDomain::QuantizedLogUniform {
            lo: 2.0,
            hi: 100.0,
            step: 1.0,
        });
        space
    }

    #[test]
    fn degenerate_linear_model_yields_constant_metrics() {
        let model = MetricModelSpec::Linear {
            intercept: ValueDist::Constant(5.0),
            slope: ValueDist::Constant(0.0),
        };
        let (scenario, _) =
            synthetic_scenario(&model, &run(16, 4, 0), &lr_space(), &CostModel::Unit).unwrap();
        for worker in &scenario.workers {
            assert_eq!(worker.metrics, alloc::vec![5.0, 5.0, 5.0, 5.0]);
        }
        assert_eq!(scenario.validate(), Ok(()));
    }

    #[test]
    fn cost_model_scales_work_from_the_configuration() {
        let model = MetricModelSpec::Linear {
            intercept: ValueDist::Constant(1.0),
            slope: ValueDist::Constant(1.0),
        };
        let cost = CostModel::PerPhaseFromParam {
            param: "t_max".to_string(),
            divisor: 10.0,
        };
        let (scenario, configs) =
            synthetic_scenario(&model, &run(8, 3, 1), &lr_space(), &cost).unwrap();
        for (worker, config) in scenario.workers.iter().zip(&configs) {
            let t_max = config["t_max"].as_real().unwrap();
            for p in 0..3 {
                assert_eq!(worker.work_units(p), t_max / 10.0);
            }
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let model = MetricModelSpec::NoisyCurve {
            plateau: ValueDist::Uniform { lo: 10.0, hi: 20.0 },
            rate: ValueDist::Uniform { lo: 0.1, hi: 1.0 },
            noise_sd: 0.5,
        };
        let a = synthetic_scenario(&model, &run(12, 5, 42), &lr_space(), &CostModel::Unit).unwrap();
        let b = synthetic_scenario(&model, &run(12, 5, 42), &lr_space(), &CostModel::Unit).unwrap();
        assert_eq!(a, b);
        let c = synthetic_scenario(&model, &run(12, 5, 43), &lr_space(), &CostModel::Unit).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn invalid_distribution_is_rejected() {
        let model = MetricModelSpec::Linear {
            intercept: ValueDist::Uniform { lo: 2.0, hi: 1.0 },
            slope: ValueDist::Constant(0.0),
        };
        assert!(matches!(
            synthetic_scenario(&model, &run(4, 2, 0), &lr_space(), &CostModel::Unit),
            Err(SimError::BadModel { .. })
        ));
    }

    #[test]
    fn unknown_cost_parameter_is_rejected() {
        let model = MetricModelSpec::Linear {
            intercept: ValueDist::Constant(0.0),
            slope: ValueDist::Constant(1.0),
        };
        let cost = CostModel::PerPhaseFromParam {
            param: "missing".to_string(),
            divisor: 10.0,
        };
        assert!(matches!(
            synthetic_scenario(&model, &run(4, 2, 0), &lr_space(), &cost),
            Err(SimError::BadModel { .. })
        ));
    }

    #[test]
    fn standard_normal_moments_are_sane() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 50_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let x = standard_normal(&mut rng);
            sum += x;
            sum_sq += x * x;
        }
        let mean = sum / f64::from(n);
        let var = sum_sq / f64::from(n) - mean * mean;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "variance {var}");
    }
}
