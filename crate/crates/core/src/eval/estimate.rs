use serde::Serialize;

use super::expected_utility_pool;
use crate::error::{Error, Result};
use crate::model::Instance;
use crate::policies::{best_singleton, optimal_value, PoolPolicySpec, VProvenance};

/// `1 − 1/e`, certified for the offline adaptive greedy value.
pub const ALPHA_GREEDY: f64 = 1.0 - 1.0 / std::f64::consts::E;
/// `(1 − 1/e)/2`, certified for `max{f_avg(π^gn), f(e*)}`.
pub const ALPHA_DENSITY_GREEDY: f64 = ALPHA_GREEDY / 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum VMode {
    Greedy,
    DensityGreedy,
    Exact,
    /// A caller-supplied `v` with its claimed `α·f_avg(π*) ≤ v ≤ β·f_avg(π*)`.
    Manual {
        v: f64,
        alpha: f64,
        beta: f64,
    },
}

impl VMode {
    pub fn name(&self) -> &'static str {
        match self {
            VMode::Greedy => "greedy",
            VMode::DensityGreedy => "density_greedy",
            VMode::Exact => "exact",
            VMode::Manual { .. } => "manual",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VEstimate {
    pub v: f64,
    pub alpha: f64,
    pub beta: f64,
    pub provenance: VProvenance,
}

/// Estimates `v` offline and returns it with the `(α, β)` it certifies.
pub fn estimate_v(instance: &Instance, mode: VMode) -> Result<VEstimate> {
    Ok(match mode {
        VMode::Greedy => {
            instance.cardinality_budget()?;
            VEstimate {
                v: expected_utility_pool(instance, &PoolPolicySpec::AdaptiveGreedy)?,
                alpha: ALPHA_GREEDY,
                beta: 1.0,
                provenance: VProvenance::GreedyEstimate,
            }
        }
        VMode::DensityGreedy => {
            let gn = expected_utility_pool(instance, &PoolPolicySpec::DensityGreedy)?;
            VEstimate {
                v: gn.max(best_singleton(instance).1),
                alpha: ALPHA_DENSITY_GREEDY,
                beta: 1.0,
                provenance: VProvenance::DensityGreedyEstimate,
            }
        }
        VMode::Exact => {
            VEstimate { v: optimal_value(instance)?, alpha: 1.0, beta: 1.0, provenance: VProvenance::ExactOracle }
        }
        VMode::Manual { v, alpha, beta } => {
            if !((0.0..=1.0).contains(&alpha) && (1.0..=2.0).contains(&beta)) {
                return Err(Error::InvalidAlphaBeta { alpha, beta });
            }
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidThreshold(v));
            }
            VEstimate { v, alpha, beta, provenance: VProvenance::Manual }
        }
    })
}

/// `min{α/4, (2−β)/4}`: the uniform-cost threshold policy's ratio, and the
/// ratio of `max{f(e*), E[f_avg(π^k)|σ]}` for knapsack costs.
pub fn uniform_bound(alpha: f64, beta: f64) -> f64 {
    (alpha / 4.0).min((2.0 - beta) / 4.0)
}

/// `min{α/8, (2−β)/8}`: the ratio of the mixed `{e*}`/`π^k` policy.
pub fn mixed_bound(alpha: f64, beta: f64) -> f64 {
    (alpha / 8.0).min((2.0 - beta) / 8.0)
}

pub fn lemma_bound(alpha: f64, beta: f64) -> f64 {
    uniform_bound(alpha, beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::fixtures;

    #[test]
    fn predicted_bounds() {
        assert_eq!(uniform_bound(1.0, 1.0), 0.25);
        assert!((uniform_bound(ALPHA_GREEDY, 1.0) - 0.158_03).abs() < 1e-5);
        assert!((mixed_bound(ALPHA_DENSITY_GREEDY, 1.0) - 0.039_51).abs() < 1e-5);
        assert_eq!(uniform_bound(1.0, 2.0), 0.0);
    }

    #[test]
    fn modes_on_canonical() {
        let u = fixtures::canonical_uniform();
        let g = estimate_v(&u, VMode::Greedy).unwrap();
        assert!((g.v - 2.9).abs() < 1e-12);
        assert_eq!(g.provenance, VProvenance::GreedyEstimate);
        let e = estimate_v(&u, VMode::Exact).unwrap();
        assert_eq!((e.alpha, e.beta), (1.0, 1.0));
        let k = fixtures::canonical_knapsack();
        assert!(matches!(estimate_v(&k, VMode::Greedy), Err(Error::NonUniformCost { .. })));
        let d = estimate_v(&k, VMode::DensityGreedy).unwrap();
        assert!((d.v - 2.55).abs() < 1e-12);
    }

    #[test]
    fn manual_ranges() {
        let u = fixtures::canonical_uniform();
        assert!(estimate_v(&u, VMode::Manual { v: 1.0, alpha: 0.5, beta: 1.5 }).is_ok());
        for (alpha, beta) in [(1.2, 1.0), (-0.1, 1.0), (0.5, 0.9), (0.5, 2.1)] {
            let err = estimate_v(&u, VMode::Manual { v: 1.0, alpha, beta }).unwrap_err();
            assert!(matches!(err, Error::InvalidAlphaBeta { .. }));
        }
        assert!(matches!(
            estimate_v(&u, VMode::Manual { v: 0.0, alpha: 0.5, beta: 1.0 }),
            Err(Error::InvalidThreshold(_))
        ));
    }
}
