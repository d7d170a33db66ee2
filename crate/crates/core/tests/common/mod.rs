//! Instance suites and deliberately naive reference implementations shared
//! by the integration tests. Nothing here uses the library's caches,
//! posteriors or policy runners: only the prior table, `f` and the costs.

#![allow(dead_code)]

use adastream::instances::{fixtures, generate, CostProfile, Family, GeneratorSpec};
use adastream::model::{ArrivalOrder, Instance, ItemId, ItemSet, Realization};
use adastream::utility::Property;

pub const TOL: f64 = 1e-9;

pub const FAMILIES: [Family; 3] = [Family::Coverage, Family::Viral, Family::Versionspace];

/// Unit-cost instances: 3 families × n ∈ {3, 4, 5} × B ∈ {1, 2} × 3 seeds.
pub fn uniform_suite() -> Vec<(String, Instance)> {
    let mut out = Vec::new();
    for family in FAMILIES {
        for n in [3, 4, 5] {
            for budget in [1.0, 2.0] {
                for seed in 0..3 {
                    let spec = GeneratorSpec::new(family, n, 2, budget, 100 + seed);
                    out.push((format!("{family:?}/n{n}/B{budget}/s{seed}"), generate(&spec).unwrap()));
                }
            }
        }
    }
    out.push(("canonical_uniform".into(), fixtures::canonical_uniform()));
    out
}

/// Knapsack instances with costs in [0.5, 2] on a 0.25 grid.
pub fn knapsack_suite() -> Vec<(String, Instance)> {
    let mut out = Vec::new();
    for family in FAMILIES {
        for n in [3, 4, 5] {
            for budget in [1.5, 2.5] {
                for seed in 0..3 {
                    let spec = GeneratorSpec::new(family, n, 2, budget, 200 + seed)
                        .with_costs(CostProfile::Random { min: 0.5, max: 2.0 });
                    out.push((format!("{family:?}/n{n}/B{budget}/s{seed}/knap"), generate(&spec).unwrap()));
                }
            }
        }
    }
    out.push(("canonical_knapsack".into(), fixtures::canonical_knapsack()));
    out
}

pub fn counterexamples() -> Vec<(Property, Instance)> {
    Property::ALL.iter().map(|&p| (p, fixtures::counterexample(p))).collect()
}

/// Support realizations agreeing with `obs` (pairs of item index, state).
fn consistent(inst: &Instance, obs: &[(usize, u16)]) -> Vec<(usize, f64)> {
    inst.prior()
        .iter()
        .enumerate()
        .filter(|(_, (phi, _))| obs.iter().all(|&(e, s)| phi.states()[e].0 == s))
        .map(|(i, (_, p))| (i, p))
        .collect()
}

fn dom(obs: &[(usize, u16)]) -> ItemSet {
    obs.iter().map(|&(e, _)| ItemId(e)).collect()
}

/// `∆(e | obs)`, straight from the definition.
pub fn naive_marginal(inst: &Instance, e: usize, obs: &[(usize, u16)]) -> f64 {
    let rows = consistent(inst, obs);
    let mass: f64 = rows.iter().map(|r| r.1).sum();
    let d = dom(obs);
    let with = d.with(ItemId(e));
    rows.iter().map(|&(i, p)| p * (inst.value(with, i) - inst.value(d, i))).sum::<f64>() / mass
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Stream {
    Uniform,
    Knapsack,
    KnapsackPlus,
}

/// Threshold scan written out directly; returns the selected items.
pub fn naive_stream_run(inst: &Instance, kind: Stream, v: f64, order: &[usize], phi: &Realization) -> Vec<usize> {
    let b = inst.budget();
    let mut obs: Vec<(usize, u16)> = Vec::new();
    let mut used = 0.0;
    for &e in order {
        if kind == Stream::Uniform && obs.len() as f64 >= b {
            break;
        }
        let m = naive_marginal(inst, e, &obs);
        let c = inst.cost(ItemId(e));
        let score = if kind == Stream::Uniform { m } else { m / c };
        if score < v / (2.0 * b) - 1e-12 {
            continue;
        }
        let fits = used + c <= b + 1e-12;
        if kind == Stream::Knapsack && !fits {
            break;
        }
        obs.push((e, phi.states()[e].0));
        used += c;
        if !fits {
            break;
        }
    }
    obs.into_iter().map(|o| o.0).collect()
}

/// `E[f_avg(π) | σ]` by running the naive scan on every realization.
pub fn naive_stream_value(inst: &Instance, kind: Stream, v: f64, order: &ArrivalOrder) -> f64 {
    let order = order.indices();
    inst.prior()
        .iter()
        .enumerate()
        .map(|(i, (phi, p))| {
            let set: ItemSet = naive_stream_run(inst, kind, v, &order, phi).into_iter().map(ItemId).collect();
            p * inst.value(set, i)
        })
        .sum()
}

/// `max_e E[f({e})]`.
pub fn naive_best_singleton(inst: &Instance) -> f64 {
    inst.items()
        .map(|e| inst.prior().iter().enumerate().map(|(i, (_, p))| p * inst.value(ItemSet::EMPTY.with(e), i)).sum())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Number of budget-feasible decision trees from the empty observation.
pub fn count_policy_trees(inst: &Instance) -> f64 {
    fn go(inst: &Instance, obs: &mut Vec<(usize, u16)>, left: f64) -> f64 {
        let mut total = 1.0; // stop here
        for e in 0..inst.n() {
            if obs.iter().any(|o| o.0 == e) || inst.cost(ItemId(e)) > left + 1e-12 {
                continue;
            }
            let mut product = 1.0;
            for s in branch_states(inst, obs, e) {
                obs.push((e, s));
                product *= go(inst, obs, left - inst.cost(ItemId(e)));
                obs.pop();
            }
            total += product;
        }
        total
    }
    go(inst, &mut Vec::new(), inst.budget())
}

fn branch_states(inst: &Instance, obs: &[(usize, u16)], e: usize) -> Vec<u16> {
    let mut states: Vec<u16> =
        consistent(inst, obs).iter().map(|&(i, _)| inst.prior().support()[i].states()[e].0).collect();
    states.sort_unstable();
    states.dedup();
    states
}

/// Value of every feasible decision tree, as unnormalized mass
/// `Σ_{φ ∼ obs} p(φ) f(final set, φ)`: each tree is "stop" or "select
/// `e`, then one subtree per observed state of `e`".
fn all_tree_values(inst: &Instance, obs: &mut Vec<(usize, u16)>, left: f64) -> Vec<f64> {
    let d = dom(obs);
    let stop: f64 = consistent(inst, obs).iter().map(|&(i, p)| p * inst.value(d, i)).sum();
    let mut out = vec![stop];
    for e in 0..inst.n() {
        if obs.iter().any(|o| o.0 == e) || inst.cost(ItemId(e)) > left + 1e-12 {
            continue;
        }
        let mut combos = vec![0.0];
        for s in branch_states(inst, obs, e) {
            obs.push((e, s));
            let sub = all_tree_values(inst, obs, left - inst.cost(ItemId(e)));
            obs.pop();
            combos = combos.iter().flat_map(|a| sub.iter().map(move |b| a + b)).collect();
        }
        out.extend(combos);
    }
    out
}

/// `f_avg(π*)` as the best of all feasible decision trees.
pub fn naive_optimal_value(inst: &Instance) -> f64 {
    all_tree_values(inst, &mut Vec::new(), inst.budget()).into_iter().fold(f64::NEG_INFINITY, f64::max)
}
