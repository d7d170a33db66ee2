//! Exact and Monte Carlo evaluation of policies, adversarial order search,
//! threshold estimation and the numerical checks of the approximation
//! guarantees.

mod estimate;
mod report;
mod verify;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use estimate::{
    estimate_v, lemma_bound, mixed_bound, uniform_bound, VEstimate, VMode, ALPHA_DENSITY_GREEDY, ALPHA_GREEDY,
};
pub use report::{evaluate, EvalMode, EvaluationReport, Guarantee, OrderSelection, OrderValue};
pub use verify::{
    verify_lemma1, verify_proposition1, verify_theorem1, verify_theorem2, BoundCheck, BoundRow, Prop1Report, Prop1Row,
};

use crate::error::{Error, Result};
use crate::model::{ArrivalOrder, Instance, ItemId, PartialRealization, TIE_TOL};
use crate::policies::{
    best_singleton, Oracle, PoolPolicySpec, PoolRunner, StreamAlgorithm, StreamPolicySpec, StreamRunner,
};
use crate::utility::MarginalCache;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum PolicySpec {
    Stream(StreamPolicySpec),
    Pool(PoolPolicySpec),
}

impl PolicySpec {
    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::Stream(s) => match s.algorithm {
                StreamAlgorithm::ThresholdUniform => "threshold_uniform",
                StreamAlgorithm::ThresholdKnapsack => "threshold_knapsack",
                StreamAlgorithm::ThresholdKnapsackPlus => "threshold_knapsack_plus",
                StreamAlgorithm::MixedSingleton => "mixed_singleton",
            },
            PolicySpec::Pool(p) => match p {
                PoolPolicySpec::AdaptiveGreedy => "pool_greedy",
                PoolPolicySpec::DensityGreedy => "pool_density_greedy",
                PoolPolicySpec::BestSingleton => "best_singleton",
                PoolPolicySpec::OptimalOracle => "oracle",
                PoolPolicySpec::Empty => "empty",
                PoolPolicySpec::FixedSingleStep(_) => "fixed_single_step",
            },
        }
    }

    pub fn is_stream(&self) -> bool {
        matches!(self, PolicySpec::Stream(_))
    }
}

/// `E[f_avg(π) | σ]`: every support realization is simulated and weighted
/// by its prior mass. The mixed policy is evaluated as the exact half-half
/// mix of its two branches. Pool policies ignore `order`.
pub fn expected_utility_exact(instance: &Instance, policy: &PolicySpec, order: &ArrivalOrder) -> Result<f64> {
    match policy {
        PolicySpec::Stream(spec) if spec.algorithm == StreamAlgorithm::MixedSingleton => {
            let threshold = spec.with_algorithm(StreamAlgorithm::ThresholdKnapsack);
            let k = expected_utility_exact(instance, &PolicySpec::Stream(threshold), order)?;
            let single = expected_utility_exact(instance, &PolicySpec::Pool(PoolPolicySpec::BestSingleton), order)?;
            Ok(0.5 * single + 0.5 * k)
        }
        PolicySpec::Stream(spec) => {
            let mut runner = StreamRunner::new(instance);
            let mut total = 0.0;
            for (phi, p) in instance.prior().iter() {
                total += p * runner.run(spec, order, phi)?.final_value;
            }
            Ok(total)
        }
        PolicySpec::Pool(spec) => {
            let mut runner = PoolRunner::new(instance);
            let mut total = 0.0;
            for (phi, p) in instance.prior().iter() {
                total += p * runner.run(spec, phi)?.final_value;
            }
            Ok(total)
        }
    }
}

/// `f_avg(π)` of a pool policy by recursion over its decision tree:
/// at each partial realization the policy's next item is computed and the
/// value is averaged over that item's conditional state distribution.
pub fn expected_utility_pool(instance: &Instance, policy: &PoolPolicySpec) -> Result<f64> {
    let mut walker = TreeWalker {
        cache: MarginalCache::new(instance),
        oracle: None,
        singleton: best_singleton(instance).0,
        policy: *policy,
    };
    let root = PartialRealization::empty(instance.n());
    walker.value(&root, 0)
}

struct TreeWalker<'a> {
    cache: MarginalCache<'a>,
    oracle: Option<Oracle<'a>>,
    singleton: ItemId,
    policy: PoolPolicySpec,
}

impl<'a> TreeWalker<'a> {
    fn value(&mut self, psi: &PartialRealization, round: usize) -> Result<f64> {
        match self.next(psi, round)? {
            None => {
                let inst = self.cache.instance();
                let dom = psi.dom();
                let post = self.cache.posterior(psi)?;
                Ok(post.expect(|i| inst.value(dom, i)))
            }
            Some(e) => {
                let mut total = 0.0;
                for (s, p) in self.cache.state_distribution(psi, e)? {
                    total += p * self.value(&psi.with(e, s), round + 1)?;
                }
                Ok(total)
            }
        }
    }

    fn next(&mut self, psi: &PartialRealization, round: usize) -> Result<Option<ItemId>> {
        let inst = self.cache.instance();
        let used = inst.costs().total(psi.dom());
        let fresh = psi.dom().is_empty();
        Ok(match self.policy {
            PoolPolicySpec::Empty => None,
            PoolPolicySpec::FixedSingleStep(e) => (fresh && inst.fits(0.0, inst.cost(e))).then_some(e),
            PoolPolicySpec::BestSingleton => {
                let e = self.singleton;
                (fresh && inst.fits(0.0, inst.cost(e))).then_some(e)
            }
            PoolPolicySpec::AdaptiveGreedy => {
                if round >= inst.cardinality_budget()? {
                    None
                } else {
                    self.argmax(psi, false)?
                }
            }
            PoolPolicySpec::DensityGreedy => self.argmax(psi, true)?.filter(|&e| inst.fits(used, inst.cost(e))),
            PoolPolicySpec::OptimalOracle => {
                let oracle = self.oracle.get_or_insert_with(|| Oracle::new(inst));
                oracle.best_action(psi, inst.ground_set(), inst.budget() - used)?
            }
        })
    }

    fn argmax(&mut self, psi: &PartialRealization, per_cost: bool) -> Result<Option<ItemId>> {
        let inst = self.cache.instance();
        let mut best: Option<(ItemId, f64)> = None;
        for e in inst.ground_set().difference(psi.dom()).iter() {
            let m = self.cache.marginal(e, psi)?;
            let score = if per_cost { m / inst.cost(e) } else { m };
            if best.is_none_or(|(_, b)| score > b + TIE_TOL) {
                best = Some((e, score));
            }
        }
        Ok(best.map(|b| b.0))
    }
}

/// How the adversarial order is searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderStrategy {
    /// All `n!` permutations, in lexicographic order. Certifies the minimum.
    Exhaustive,
    /// `count` seeded random permutations. The minimum is only an estimate
    /// (an upper bound on the true worst case).
    Sampled { count: usize, seed: u64 },
}

/// All permutations of `0..n` in lexicographic order.
pub fn all_orders(n: usize) -> Vec<ArrivalOrder> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    loop {
        out.push(ArrivalOrder::from_indices(&current, n).expect("a permutation"));
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else { break };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
    }
    out
}

pub fn sampled_orders(n: usize, count: usize, seed: u64) -> Vec<ArrivalOrder> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut v: Vec<usize> = (0..n).collect();
            v.shuffle(&mut rng);
            ArrivalOrder::from_indices(&v, n).expect("a permutation")
        })
        .collect()
}

pub fn exhaustive_orders(instance: &Instance) -> Result<Vec<ArrivalOrder>> {
    let cap = instance.limits.max_order_items;
    if instance.n() > cap {
        return Err(Error::TooManyOrders { n: instance.n(), cap });
    }
    Ok(all_orders(instance.n()))
}

/// Exact `E[f_avg(π) | σ]` for each order, evaluated in parallel. The
/// output is in input order regardless of scheduling.
pub fn evaluate_orders(instance: &Instance, policy: &PolicySpec, orders: &[ArrivalOrder]) -> Result<Vec<f64>> {
    if !policy.is_stream() {
        let v = expected_utility_pool(
            instance,
            match policy {
                PolicySpec::Pool(p) => p,
                PolicySpec::Stream(_) => unreachable!(),
            },
        )?;
        return Ok(vec![v; orders.len()]);
    }
    let chunks: Vec<Result<Vec<f64>>> = orders
        .par_chunks(32)
        .map(|chunk| chunk.iter().map(|o| expected_utility_exact(instance, policy, o)).collect())
        .collect();
    let mut out = Vec::with_capacity(orders.len());
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCase {
    pub order: ArrivalOrder,
    pub value: f64,
    pub strategy: OrderStrategy,
    pub per_order: Vec<(ArrivalOrder, f64)>,
}

/// The minimizing order; ties go to the first order examined.
pub fn worst_case_order(instance: &Instance, policy: &PolicySpec, strategy: OrderStrategy) -> Result<WorstCase> {
    let orders = match strategy {
        OrderStrategy::Exhaustive => exhaustive_orders(instance)?,
        OrderStrategy::Sampled { count, seed } => {
            if count == 0 {
                return Err(Error::Config("sampled order search needs at least one order".into()));
            }
            sampled_orders(instance.n(), count, seed)
        }
    };
    let values = evaluate_orders(instance, policy, &orders)?;
    let per_order: Vec<(ArrivalOrder, f64)> = orders.into_iter().zip(values).collect();
    let (order, value) = argmin(&per_order);
    Ok(WorstCase { order, value, strategy, per_order })
}

fn argmin(rows: &[(ArrivalOrder, f64)]) -> (ArrivalOrder, f64) {
    let mut best = &rows[0];
    for row in &rows[1..] {
        if row.1 < best.1 {
            best = row;
        }
    }
    best.clone()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Draws `φ ∼ p` i.i.d. and simulates the policy on each draw. Marginals
/// inside the policies stay exact. The mixed policy flips its coin per draw.
pub fn expected_utility_monte_carlo(
    instance: &Instance,
    policy: &PolicySpec,
    order: &ArrivalOrder,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if samples == 0 {
        return Err(Error::Config("Monte Carlo needs at least one sample".into()));
    }
    let m = instance.prior().len();
    let dist = WeightedIndex::new(instance.prior().probs()).map_err(|e| Error::InvalidInstance(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // a deterministic policy's value depends only on the drawn realization
    let (primary, secondary) = match policy {
        PolicySpec::Stream(s) if s.algorithm == StreamAlgorithm::MixedSingleton => (
            PolicySpec::Pool(PoolPolicySpec::BestSingleton),
            Some(PolicySpec::Stream(s.with_algorithm(StreamAlgorithm::ThresholdKnapsack))),
        ),
        other => (*other, None),
    };
    let mut stream = StreamRunner::new(instance);
    let mut pool = PoolRunner::new(instance);
    let mut memo: [Vec<Option<f64>>; 2] = [vec![None; m], vec![None; m]];
    let mut simulate = |which: usize, idx: usize| -> Result<f64> {
        if let Some(v) = memo[which][idx] {
            return Ok(v);
        }
        let spec = if which == 0 { &primary } else { secondary.as_ref().unwrap() };
        let phi = &instance.prior().support()[idx];
        let v = match spec {
            PolicySpec::Stream(s) => stream.run(s, order, phi)?.final_value,
            PolicySpec::Pool(p) => pool.run(p, phi)?.final_value,
        };
        memo[which][idx] = Some(v);
        Ok(v)
    };

    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let idx = dist.sample(&mut rng);
        let which = if secondary.is_some() && !rng.gen_bool(0.5) { 1 } else { 0 };
        let x = simulate(which, idx)?;
        sum += x;
        sum_sq += x * x;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = if samples > 1 { ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok(MonteCarloEstimate { mean, std_error: (var / n).sqrt(), samples, seed })
}
