//! Utility functions `f(S, φ)`, conditional expected marginals, and the
//! structural property checkers.

mod cache;
mod checks;

use std::collections::HashMap;

pub use cache::MarginalCache;
pub use checks::{
    check_adaptive_monotone, check_adaptive_submodular, check_all, check_policywise, check_policywise_with,
    check_semi_policywise, PolicywiseOptions, Property, PropertyReport, SubsetFamily, Witness,
};

use crate::error::{Error, Result};
use crate::model::{Instance, ItemId, ItemSet, PartialRealization, Prior, Realization};
use crate::policies::PoolPolicySpec;

/// Stochastic coverage: in state `s`, item `e` covers `covers[e][s]` (a
/// bitmask over a universe of at most 64 elements); `f` counts the union.
#[derive(Debug, Clone, PartialEq)]
pub struct Coverage {
    pub universe: usize,
    pub covers: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub p: f64,
}

/// Adaptive viral marketing with full-adoption feedback on a small graph.
///
/// An item is a seed node; its state indexes the set of nodes it reaches
/// over live edges (`reach[e][s]`). `f` counts the union of reached nodes.
/// `edges` records the independent-cascade graph the prior was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Viral {
    pub nodes: usize,
    pub edges: Vec<Edge>,
    pub reach: Vec<Vec<u64>>,
}

/// Explicit `f(S, φ)` over every (subset, support realization) pair.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UtilityTable {
    values: HashMap<(u64, usize), f64>,
}

impl UtilityTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, subset: ItemSet, realization: usize, value: f64) {
        self.values.insert((subset.bits(), realization), value);
    }

    pub fn get(&self, subset: ItemSet, realization: usize) -> Option<f64> {
        self.values.get(&(subset.bits(), realization)).copied()
    }

    /// Entries sorted by (subset bits, realization index).
    pub fn entries(&self) -> Vec<(ItemSet, usize, f64)> {
        let mut out: Vec<_> = self.values.iter().map(|(&(s, r), &v)| (ItemSet::from_bits(s), r, v)).collect();
        out.sort_by_key(|a| (a.0, a.1));
        out
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Utility {
    Coverage(Coverage),
    Viral(Viral),
    /// Normalized version-space reduction. Support realizations play the
    /// role of hypotheses: `f(S, φ) = (1 − p(V(S, φ))) / (1 − p_min)`, where
    /// `V(S, φ)` are the support realizations agreeing with `φ` on `S` and
    /// `p_min` is the smallest prior mass in the support.
    VersionSpace,
    Table(UtilityTable),
}

impl Utility {
    pub fn kind(&self) -> &'static str {
        match self {
            Utility::Coverage(_) => "coverage",
            Utility::Viral(_) => "viral",
            Utility::VersionSpace => "versionspace",
            Utility::Table(_) => "table",
        }
    }

    /// State-dependent modular utility `f(S, φ) = Σ_{e∈S} weights[e][φ(e)]`,
    /// tabulated over the support of `prior`.
    pub fn modular(prior: &Prior, weights: &[Vec<f64>]) -> Utility {
        Utility::from_fn(prior, |set, phi| set.iter().map(|e| weights[e.0][phi.state(e).index()]).sum())
    }

    /// Tabulates an arbitrary non-negative function over the support.
    pub fn from_fn(prior: &Prior, f: impl Fn(ItemSet, &Realization) -> f64) -> Utility {
        let n = prior.num_items();
        let mut table = UtilityTable::new();
        for (idx, phi) in prior.support().iter().enumerate() {
            for set in ItemSet::full(n).subsets() {
                table.set(set, idx, f(set, phi));
            }
        }
        Utility::Table(table)
    }

    pub(crate) fn validate(&self, n: usize, num_states: usize, prior: &Prior) -> Result<()> {
        let check_masks = |what: &str, width: usize, masks: &[Vec<u64>]| -> Result<()> {
            if width > 64 {
                return Err(Error::InvalidInstance(format!("{what}: at most 64 elements are supported")));
            }
            if masks.len() != n {
                return Err(Error::InvalidInstance(format!("{what}: expected {n} items, got {}", masks.len())));
            }
            let allowed = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
            for (e, per_state) in masks.iter().enumerate() {
                if per_state.len() != num_states {
                    return Err(Error::InvalidInstance(format!(
                        "{what}: item {e} lists {} states, expected {num_states}",
                        per_state.len()
                    )));
                }
                if per_state.iter().any(|m| m & !allowed != 0) {
                    return Err(Error::InvalidInstance(format!("{what}: item {e} refers to elements beyond {width}")));
                }
            }
            Ok(())
        };
        match self {
            Utility::Coverage(c) => check_masks("coverage", c.universe, &c.covers),
            Utility::Viral(v) => {
                for edge in &v.edges {
                    if edge.from >= v.nodes || edge.to >= v.nodes || !(0.0..=1.0).contains(&edge.p) {
                        return Err(Error::InvalidInstance(format!("viral: invalid edge {edge:?}")));
                    }
                }
                check_masks("viral", v.nodes, &v.reach)
            }
            Utility::VersionSpace => Ok(()),
            Utility::Table(t) => {
                for idx in 0..prior.len() {
                    for set in ItemSet::full(n).subsets() {
                        match t.get(set, idx) {
                            None => {
                                return Err(Error::InvalidInstance(format!(
                                    "table: no value for subset {:?} under realization {idx}",
                                    set.to_vec()
                                )))
                            }
                            Some(v) if !(v >= 0.0 && v.is_finite()) => {
                                return Err(Error::InvalidInstance(format!(
                                    "table: value {v} for subset {:?} under realization {idx} is not non-negative",
                                    set.to_vec()
                                )))
                            }
                            _ => {}
                        }
                    }
                }
                let expected = (1usize << n) * prior.len();
                if t.len() != expected {
                    return Err(Error::InvalidInstance(format!(
                        "table: {} entries, expected {expected} (realization index out of range?)",
                        t.len()
                    )));
                }
                Ok(())
            }
        }
    }

    pub(crate) fn eval_indexed(&self, set: ItemSet, idx: usize, prior: &Prior) -> f64 {
        match self {
            Utility::Table(t) => t.get(set, idx).expect("table validated as total"),
            _ => self.eval_builtin(set, &prior.support()[idx], prior),
        }
    }

    pub(crate) fn eval_outside_support(&self, set: ItemSet, phi: &Realization, prior: &Prior) -> Result<f64> {
        match self {
            Utility::Table(_) => Err(Error::UnknownRealization(phi.to_string())),
            _ => Ok(self.eval_builtin(set, phi, prior)),
        }
    }

    fn eval_builtin(&self, set: ItemSet, phi: &Realization, prior: &Prior) -> f64 {
        match self {
            Utility::Coverage(Coverage { covers, .. }) | Utility::Viral(Viral { reach: covers, .. }) => {
                let covered = set.iter().fold(0u64, |acc, e| acc | covers[e.0][phi.state(e).index()]);
                covered.count_ones() as f64
            }
            Utility::VersionSpace => {
                if set.is_empty() || prior.len() < 2 {
                    return 0.0;
                }
                let p_min = prior.probs().iter().copied().fold(f64::INFINITY, f64::min);
                let remaining: f64 =
                    prior.iter().filter(|(h, _)| set.iter().all(|e| h.state(e) == phi.state(e))).map(|(_, p)| p).sum();
                ((1.0 - remaining) / (1.0 - p_min)).max(0.0)
            }
            Utility::Table(_) => unreachable!("tables are evaluated by index"),
        }
    }
}

/// `f(S, φ)`.
pub fn utility(instance: &Instance, set: ItemSet, phi: &Realization) -> Result<f64> {
    instance.utility_of(set, phi)
}

/// `∆(e | ψ) = E[f(dom(ψ) ∪ {e}, Φ) − f(dom(ψ), Φ) | Φ ∼ ψ]`, exact over the support.
pub fn marginal_item(instance: &Instance, item: ItemId, psi: &PartialRealization) -> Result<f64> {
    let post = instance.posterior(psi)?;
    Ok(marginal_given(instance, item, psi.dom(), &post))
}

pub(crate) fn marginal_given(instance: &Instance, item: ItemId, dom: ItemSet, post: &crate::model::Posterior) -> f64 {
    if dom.contains(item) {
        return 0.0;
    }
    let with = dom.with(item);
    post.expect(|i| instance.value(with, i) - instance.value(dom, i))
}

/// `∆(π | ψ)`: expected gain of running the pool policy `pi` on top of the
/// observations `psi`, i.e. `E[f(dom(ψ) ∪ E(π, Φ), Φ) − f(dom(ψ), Φ) | Φ ∼ ψ]`.
///
/// The policy starts from the state `psi`, may only pick items outside
/// `dom(ψ)`, and has the full budget `B`. It is simulated on every
/// realization consistent with `psi`.
pub fn marginal_policy(instance: &Instance, pi: &PoolPolicySpec, psi: &PartialRealization) -> Result<f64> {
    let post = instance.posterior(psi)?;
    let mut runner = crate::policies::PoolRunner::new(instance);
    let base = psi.dom();
    let mut total = 0.0;
    for &(idx, p) in post.entries() {
        let phi = &instance.prior().support()[idx];
        let trace = runner.run_from(pi, psi, phi)?;
        let chosen = trace.selected_set().union(base);
        total += p * (instance.value(chosen, idx) - instance.value(base, idx));
    }
    Ok(total)
}
