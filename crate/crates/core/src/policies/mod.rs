//! Stream-based threshold policies, pool-based greedy policies and the exact
//! optimal pool-based oracle.

mod oracle;
mod pool;
mod stream;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ItemId, ItemSet, StateId};

pub use oracle::{optimal_value, oracle_optimal_pool, oracle_policy_tree, Oracle, PolicyTree};
pub use pool::{best_singleton, run_pool, run_pool_density_greedy, run_pool_greedy, PoolRunner};
pub use stream::{
    coin_for_seed, run_mixed_singleton, run_stream, run_threshold_knapsack, run_threshold_knapsack_plus,
    run_threshold_uniform, Coin, StreamRunner,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamAlgorithm {
    ThresholdUniform,
    ThresholdKnapsack,
    ThresholdKnapsackPlus,
    MixedSingleton,
}

/// Where the threshold numerator `v` came from, which fixes the certified
/// `(α, β)` pair a ratio claim may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VProvenance {
    GreedyEstimate,
    DensityGreedyEstimate,
    Manual,
    ExactOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamPolicySpec {
    pub algorithm: StreamAlgorithm,
    pub v: f64,
    pub v_provenance: VProvenance,
    pub seed: u64,
}

impl StreamPolicySpec {
    pub fn new(algorithm: StreamAlgorithm, v: f64, v_provenance: VProvenance) -> Result<Self> {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidThreshold(v));
        }
        Ok(StreamPolicySpec { algorithm, v, v_provenance, seed: 0 })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_algorithm(mut self, algorithm: StreamAlgorithm) -> Self {
        self.algorithm = algorithm;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolPolicySpec {
    AdaptiveGreedy,
    DensityGreedy,
    BestSingleton,
    OptimalOracle,
    Empty,
    FixedSingleStep(ItemId),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectedStep {
    pub item: ItemId,
    pub state: StateId,
    /// `∆(e | ψ_t)` at the time of selection.
    pub marginal: f64,
    pub cumulative_cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    BelowThreshold { marginal: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Every arriving item was examined.
    StreamExhausted,
    /// `|S| = B` on the uniform-cost path.
    CardinalityReached,
    /// A passing item did not fit; the scan terminated without it.
    BudgetBreak { item: ItemId },
    /// The first passing item that did not fit was taken, then the scan ended.
    Overshoot { item: ItemId },
    /// All `B` greedy rounds ran.
    RoundsCompleted,
    /// No unselected item remains.
    PoolExhausted,
    /// The oracle (or a fixed policy) chose to stop.
    Stopped,
    /// `e*` was not affordable; the singleton branch selects nothing.
    SingletonUnaffordable,
}

/// The realized run of a policy on one realization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyTrace {
    pub selected: Vec<SelectedStep>,
    pub skipped: Vec<(ItemId, SkipReason)>,
    pub stop: StopReason,
    /// `f(dom(ψ₀) ∪ E, φ)`; `ψ₀` is empty except for runs conditioned on prior observations.
    pub final_value: f64,
    /// Outcome of the fair coin for the mixed policy.
    pub coin: Option<Coin>,
}

impl PolicyTrace {
    pub fn selected_set(&self) -> ItemSet {
        self.selected.iter().map(|s| s.item).collect()
    }

    pub fn selected_items(&self) -> Vec<ItemId> {
        self.selected.iter().map(|s| s.item).collect()
    }

    pub fn total_cost(&self) -> f64 {
        self.selected.last().map_or(0.0, |s| s.cumulative_cost)
    }
}
