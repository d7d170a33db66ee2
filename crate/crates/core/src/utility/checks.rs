//! Exhaustive checkers for adaptive monotonicity, adaptive submodularity,
//! semi-policywise and policywise submodularity.
//!
//! Every checker walks the reachable partial realizations in the
//! deterministic order of [`enumerate_reachable_partials`] and reports the
//! first violation it meets, together with the violating margin.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::MarginalCache;
use crate::error::Result;
use crate::model::{enumerate_reachable_partials, Instance, ItemId, ItemSet, PartialRealization, EPS};
use crate::policies::{optimal_value, Oracle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    AdaptiveMonotone,
    AdaptiveSubmodular,
    SemiPolicywise,
    Policywise,
}

impl Property {
    pub const ALL: [Property; 4] =
        [Property::AdaptiveMonotone, Property::AdaptiveSubmodular, Property::SemiPolicywise, Property::Policywise];

    pub fn name(self) -> &'static str {
        match self {
            Property::AdaptiveMonotone => "adaptive_monotone",
            Property::AdaptiveSubmodular => "adaptive_submodular",
            Property::SemiPolicywise => "semi_policywise",
            Property::Policywise => "policywise",
        }
    }

    pub fn from_name(name: &str) -> Option<Property> {
        Property::ALL.into_iter().find(|p| p.name() == name)
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A concrete counterexample. `margin` is the amount by which the defining
/// inequality fails (always > ε).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Witness {
    /// `∆(item | psi) < 0`.
    Monotone {
        #[serde(serialize_with = "ser_psi")]
        psi: PartialRealization,
        item: ItemId,
        marginal: f64,
        margin: f64,
    },
    /// `∆(item | smaller) < ∆(item | larger)` with `smaller ⊆ larger`.
    Submodular {
        #[serde(serialize_with = "ser_psi")]
        smaller: PartialRealization,
        #[serde(serialize_with = "ser_psi")]
        larger: PartialRealization,
        item: ItemId,
        before: f64,
        after: f64,
        margin: f64,
    },
    /// `f_avg(π*) < max_π ∆(π | psi)`.
    SemiPolicywise {
        #[serde(serialize_with = "ser_psi")]
        psi: PartialRealization,
        optimum: f64,
        conditional_gain: f64,
        margin: f64,
    },
    /// `max_{π∈Ω} ∆(π | smaller) < max_{π∈Ω} ∆(π | larger)` for the policy
    /// class restricted to `subset` with the residual budget.
    Policywise {
        #[serde(serialize_with = "ser_psi")]
        smaller: PartialRealization,
        #[serde(serialize_with = "ser_psi")]
        larger: PartialRealization,
        #[serde(serialize_with = "ser_set")]
        subset: ItemSet,
        budget: f64,
        residual: f64,
        before: f64,
        after: f64,
        margin: f64,
    },
}

fn ser_psi<S: serde::Serializer>(psi: &PartialRealization, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(psi.observations().map(|(e, st)| (e.0, st.0)))
}

fn ser_set<S: serde::Serializer>(set: &ItemSet, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(set.iter().map(|e| e.0))
}

impl Witness {
    pub fn margin(&self) -> f64 {
        match self {
            Witness::Monotone { margin, .. }
            | Witness::Submodular { margin, .. }
            | Witness::SemiPolicywise { margin, .. }
            | Witness::Policywise { margin, .. } => *margin,
        }
    }

    /// Recomputes the violated inequality from scratch and returns its margin.
    pub fn recheck(&self, instance: &Instance) -> Result<f64> {
        match self {
            Witness::Monotone { psi, item, .. } => Ok(-super::marginal_item(instance, *item, psi)?),
            Witness::Submodular { smaller, larger, item, .. } => {
                Ok(super::marginal_item(instance, *item, larger)? - super::marginal_item(instance, *item, smaller)?)
            }
            Witness::SemiPolicywise { psi, .. } => {
                let gain = Oracle::new(instance).gain(psi, instance.ground_set(), instance.budget())?;
                Ok(gain - optimal_value(instance)?)
            }
            Witness::Policywise { smaller, larger, subset, residual, .. } => {
                let mut oracle = Oracle::new(instance);
                Ok(oracle.gain(larger, *subset, *residual)? - oracle.gain(smaller, *subset, *residual)?)
            }
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Monotone { psi, item, marginal, margin } => {
                write!(f, "Δ({item} | {psi}) = {marginal:.6} < 0 (margin {margin:.3e})")
            }
            Witness::Submodular { smaller, larger, item, before, after, margin } => write!(
                f,
                "Δ({item} | {smaller}) = {before:.6} < Δ({item} | {larger}) = {after:.6} (margin {margin:.3e})"
            ),
            Witness::SemiPolicywise { psi, optimum, conditional_gain, margin } => write!(
                f,
                "f_avg(π*) = {optimum:.6} < max_π Δ(π | {psi}) = {conditional_gain:.6} (margin {margin:.3e})"
            ),
            Witness::Policywise { smaller, larger, subset, budget, residual, before, after, margin } => write!(
                f,
                "B = {budget}, S = {:?}, residual {residual}: max Δ(π | {smaller}) = {before:.6} < max Δ(π | {larger}) = {after:.6} (margin {margin:.3e})",
                subset.iter().map(|e| e.0).collect::<Vec<_>>()
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub property: Property,
    pub holds: bool,
    pub witness: Option<Witness>,
    /// Smallest slack observed over all checked inequalities (negative on failure).
    pub tightest_slack: f64,
    pub checked: usize,
}

struct Tracker {
    property: Property,
    witness: Option<Witness>,
    tightest: f64,
    checked: usize,
}

impl Tracker {
    fn new(property: Property) -> Self {
        Tracker { property, witness: None, tightest: f64::INFINITY, checked: 0 }
    }

    /// Records `slack = lhs − rhs` of an inequality `lhs ≥ rhs`.
    fn record(&mut self, slack: f64, witness: impl FnOnce(f64) -> Witness) {
        self.checked += 1;
        self.tightest = self.tightest.min(slack);
        if slack < -EPS && self.witness.is_none() {
            self.witness = Some(witness(-slack));
        }
    }

    fn finish(self) -> PropertyReport {
        let tightest_slack = if self.checked == 0 { 0.0 } else { self.tightest };
        PropertyReport {
            property: self.property,
            holds: self.witness.is_none(),
            witness: self.witness,
            tightest_slack,
            checked: self.checked,
        }
    }
}

fn all_partials(instance: &Instance) -> Result<Vec<PartialRealization>> {
    enumerate_reachable_partials(instance, f64::INFINITY)
}

/// `∆(e | ψ) ≥ 0` for every reachable `ψ` and `e ∉ dom(ψ)`.
pub fn check_adaptive_monotone(instance: &Instance) -> Result<PropertyReport> {
    let mut cache = MarginalCache::new(instance);
    let mut t = Tracker::new(Property::AdaptiveMonotone);
    for psi in all_partials(instance)? {
        for e in instance.ground_set().difference(psi.dom()).iter() {
            let m = cache.marginal(e, &psi)?;
            t.record(m, |margin| Witness::Monotone { psi: psi.clone(), item: e, marginal: m, margin });
        }
    }
    Ok(t.finish())
}

/// `∆(e | ψ) ≥ ∆(e | ψ')` for reachable `ψ ⊆ ψ'` and `e ∉ dom(ψ')`.
pub fn check_adaptive_submodular(instance: &Instance) -> Result<PropertyReport> {
    let mut cache = MarginalCache::new(instance);
    let mut t = Tracker::new(Property::AdaptiveSubmodular);
    for larger in all_partials(instance)? {
        let outside = instance.ground_set().difference(larger.dom());
        for smaller in larger.subrealizations() {
            if smaller.dom() == larger.dom() {
                continue;
            }
            for e in outside.iter() {
                let before = cache.marginal(e, &smaller)?;
                let after = cache.marginal(e, &larger)?;
                t.record(before - after, |margin| Witness::Submodular {
                    smaller: smaller.clone(),
                    larger: larger.clone(),
                    item: e,
                    before,
                    after,
                    margin,
                });
            }
        }
    }
    Ok(t.finish())
}

/// `f_avg(π*) ≥ max_{π∈Ω^p} ∆(π | ψ)` for every reachable `ψ` with positive
/// mass. The conditioned maximization uses the full budget `B` and items
/// outside `dom(ψ)`.
pub fn check_semi_policywise(instance: &Instance) -> Result<PropertyReport> {
    let mut oracle = Oracle::new(instance);
    let empty = PartialRealization::empty(instance.n());
    let optimum =
        instance.expected_value(ItemSet::EMPTY) + oracle.gain(&empty, instance.ground_set(), instance.budget())?;
    let mut t = Tracker::new(Property::SemiPolicywise);
    for psi in all_partials(instance)? {
        let gain = oracle.gain(&psi, instance.ground_set(), instance.budget())?;
        t.record(optimum - gain, |margin| Witness::SemiPolicywise {
            psi: psi.clone(),
            optimum,
            conditional_gain: gain,
            margin,
        });
    }
    Ok(t.finish())
}

/// Which sets `S ⊆ E \ dom(ψ)` the policywise checker tries.
#[derive(Debug, Clone, PartialEq)]
pub enum SubsetFamily {
    /// `E \ dom(ψ)` plus `count` seeded random subsets of it.
    Sampled { count: usize, seed: u64 },
    /// Every subset of `E \ dom(ψ)`.
    All,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicywiseOptions {
    pub subsets: SubsetFamily,
    /// Knapsack budgets to test; `None` means the instance budget only.
    pub budgets: Option<Vec<f64>>,
}

impl Default for PolicywiseOptions {
    fn default() -> Self {
        PolicywiseOptions { subsets: SubsetFamily::Sampled { count: 8, seed: 0 }, budgets: None }
    }
}

impl PolicywiseOptions {
    /// All subsets and every budget `B + c(D)`, `D ⊆ E`: the family of
    /// knapsack constraints needed to derive semi-policywise submodularity
    /// at `B`.
    pub fn exhaustive(instance: &Instance) -> Self {
        let mut budgets: Vec<f64> =
            instance.ground_set().subsets().map(|d| instance.budget() + instance.costs().total(d)).collect();
        budgets.sort_by(|a, b| a.partial_cmp(b).unwrap());
        budgets.dedup();
        PolicywiseOptions { subsets: SubsetFamily::All, budgets: Some(budgets) }
    }
}

pub fn check_policywise(instance: &Instance) -> Result<PropertyReport> {
    check_policywise_with(instance, &PolicywiseOptions::default())
}

/// For reachable `ψ' ⊆ ψ` with `c(dom(ψ)) ≤ B` and `S ∩ dom(ψ) = ∅`:
/// `max_{π∈Ω} ∆(π | ψ') ≥ max_{π∈Ω} ∆(π | ψ)`, where `Ω` selects only from
/// `S` within the residual budget `B − c(dom(ψ))`.
///
/// With sampled subsets this is a falsifier, not a proof.
pub fn check_policywise_with(instance: &Instance, options: &PolicywiseOptions) -> Result<PropertyReport> {
    let budgets = options.budgets.clone().unwrap_or_else(|| vec![instance.budget()]);
    let mut oracle = Oracle::new(instance);
    let mut t = Tracker::new(Property::Policywise);
    for &budget in &budgets {
        let partials = enumerate_reachable_partials(instance, budget)?;
        for (k, psi) in partials.iter().enumerate() {
            let residual = budget - instance.costs().total(psi.dom());
            let rest = instance.ground_set().difference(psi.dom());
            for subset in subset_family(rest, &options.subsets, k) {
                let after = oracle.gain(psi, subset, residual)?;
                for smaller in psi.subrealizations() {
                    if smaller.dom() == psi.dom() {
                        continue;
                    }
                    let before = oracle.gain(&smaller, subset, residual)?;
                    t.record(before - after, |margin| Witness::Policywise {
                        smaller: smaller.clone(),
                        larger: psi.clone(),
                        subset,
                        budget,
                        residual,
                        before,
                        after,
                        margin,
                    });
                }
            }
        }
    }
    Ok(t.finish())
}

fn subset_family(rest: ItemSet, family: &SubsetFamily, salt: usize) -> Vec<ItemSet> {
    match family {
        SubsetFamily::All => rest.subsets().collect(),
        SubsetFamily::Sampled { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt as u64);
            let mut out = vec![rest];
            for _ in 0..*count {
                let s: ItemSet = rest.iter().filter(|_| rng.gen_bool(0.5)).collect();
                if !out.contains(&s) {
                    out.push(s);
                }
            }
            out
        }
    }
}

/// Runs all four checkers with default options.
pub fn check_all(instance: &Instance) -> Result<Vec<PropertyReport>> {
    Ok(vec![
        check_adaptive_monotone(instance)?,
        check_adaptive_submodular(instance)?,
        check_semi_policywise(instance)?,
        check_policywise(instance)?,
    ])
}
