//! Items, states, joint priors over realizations and partial realizations.
//!
//! The prior is an explicit finite table. Every expectation in the crate is an
//! exact weighted sum over that table; sampling only happens in
//! [`crate::eval`].

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::utility::Utility;

/// Shared tolerance for comparisons against the analytic inequalities.
pub const EPS: f64 = 1e-9;

/// Tolerance on the total mass of a prior.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Slack used for budget feasibility and argmax tie detection.
pub const TIE_TOL: f64 = 1e-12;

/// Default cap on the number of enumerated partial realizations.
pub const DEFAULT_MAX_PARTIALS: usize = 2_000_000;

/// Default cap on `n` for exhaustive permutation search (8! = 40320 orders).
pub const DEFAULT_MAX_ORDER_ITEMS: usize = 8;

/// Largest ground set the bitmask representation supports.
pub const MAX_ITEMS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemId(pub usize);

impl ItemId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct StateId(pub u16);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A subset of the ground set stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ItemSet(u64);

impl ItemSet {
    pub const EMPTY: ItemSet = ItemSet(0);

    pub fn from_bits(bits: u64) -> Self {
        ItemSet(bits)
    }

    pub fn full(n: usize) -> Self {
        if n >= 64 {
            ItemSet(u64::MAX)
        } else {
            ItemSet((1u64 << n) - 1)
        }
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, item: ItemId) -> bool {
        self.0 >> item.0 & 1 == 1
    }

    pub fn with(self, item: ItemId) -> Self {
        ItemSet(self.0 | 1u64 << item.0)
    }

    pub fn without(self, item: ItemId) -> Self {
        ItemSet(self.0 & !(1u64 << item.0))
    }

    pub fn union(self, other: ItemSet) -> Self {
        ItemSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ItemSet) -> Self {
        ItemSet(self.0 & other.0)
    }

    pub fn difference(self, other: ItemSet) -> Self {
        ItemSet(self.0 & !other.0)
    }

    pub fn is_subset_of(self, other: ItemSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Items in ascending order.
    pub fn iter(self) -> impl Iterator<Item = ItemId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(ItemId(i))
            }
        })
    }

    /// All subsets of `self`, including the empty set and `self`.
    pub fn subsets(self) -> impl Iterator<Item = ItemSet> {
        let full = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full { None } else { Some((cur.wrapping_sub(full)) & full) };
            Some(ItemSet(cur))
        })
    }

    pub fn to_vec(self) -> Vec<ItemId> {
        self.iter().collect()
    }
}

impl FromIterator<ItemId> for ItemSet {
    fn from_iter<T: IntoIterator<Item = ItemId>>(iter: T) -> Self {
        iter.into_iter().fold(ItemSet::EMPTY, ItemSet::with)
    }
}

/// A full realization: one state per item.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Realization(Vec<StateId>);

impl Realization {
    pub fn new(states: Vec<StateId>) -> Self {
        Realization(states)
    }

    pub fn from_indices(states: &[u16]) -> Self {
        Realization(states.iter().map(|&s| StateId(s)).collect())
    }

    pub fn state(&self, item: ItemId) -> StateId {
        self.0[item.0]
    }

    pub fn states(&self) -> &[StateId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The partial realization observing `self` on `dom`.
    pub fn restrict(&self, dom: ItemSet) -> PartialRealization {
        let mut states = vec![StateId::default(); self.0.len()];
        for e in dom.iter() {
            states[e.0] = self.0[e.0];
        }
        PartialRealization { dom, states }
    }
}

impl fmt::Display for Realization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "]")
    }
}

/// Observed states on a subset `dom` of the ground set.
///
/// Slots outside `dom` are kept at state 0 so that equality and hashing only
/// depend on the observations themselves.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialRealization {
    dom: ItemSet,
    states: Vec<StateId>,
}

impl PartialRealization {
    pub fn empty(n: usize) -> Self {
        PartialRealization { dom: ItemSet::EMPTY, states: vec![StateId::default(); n] }
    }

    /// Builds a partial realization from `(item, state)` pairs; duplicates are
    /// rejected.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (ItemId, StateId)>) -> Result<Self> {
        let mut psi = Self::empty(n);
        for (e, s) in pairs {
            if e.0 >= n {
                return Err(Error::InvalidInstance(format!("item {e} outside a ground set of {n} items")));
            }
            if psi.dom.contains(e) {
                return Err(Error::InvalidInstance(format!("item {e} observed twice")));
            }
            psi = psi.with(e, s);
        }
        Ok(psi)
    }

    pub fn dom(&self) -> ItemSet {
        self.dom
    }

    pub fn len(&self) -> usize {
        self.dom.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dom.is_empty()
    }

    pub fn ground_size(&self) -> usize {
        self.states.len()
    }

    pub fn get(&self, item: ItemId) -> Option<StateId> {
        self.dom.contains(item).then(|| self.states[item.0])
    }

    /// `self ∪ {(item, state)}`. Overwrites an existing observation of `item`.
    pub fn with(&self, item: ItemId, state: StateId) -> Self {
        let mut next = self.clone();
        next.dom = next.dom.with(item);
        next.states[item.0] = state;
        next
    }

    pub fn observations(&self) -> impl Iterator<Item = (ItemId, StateId)> + '_ {
        self.dom.iter().map(move |e| (e, self.states[e.0]))
    }

    pub fn restrict(&self, dom: ItemSet) -> Self {
        let dom = self.dom.intersection(dom);
        let mut states = vec![StateId::default(); self.states.len()];
        for e in dom.iter() {
            states[e.0] = self.states[e.0];
        }
        PartialRealization { dom, states }
    }

    /// `self ⊆ other`: the domain is contained and the observations agree on it.
    pub fn is_subrealization_of(&self, other: &PartialRealization) -> bool {
        self.dom.is_subset_of(other.dom) && self.dom.iter().all(|e| self.states[e.0] == other.states[e.0])
    }

    /// Every subrealization of `self` (restrictions to subsets of the domain).
    pub fn subrealizations(&self) -> impl Iterator<Item = PartialRealization> + '_ {
        self.dom.subsets().map(move |d| self.restrict(d))
    }

    /// Sort key: ascending item list of the domain, then the observed states.
    pub fn sort_key(&self) -> (Vec<usize>, Vec<u16>) {
        let items = self.dom.iter().map(|e| e.0).collect();
        let states = self.dom.iter().map(|e| self.states[e.0].0).collect();
        (items, states)
    }
}

impl fmt::Display for PartialRealization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (e, s)) in self.observations().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}->{s}")?;
        }
        write!(f, "}}")
    }
}

/// `φ ∼ ψ`: the realization agrees with every observation in `ψ`.
pub fn consistent(phi: &Realization, psi: &PartialRealization) -> bool {
    psi.observations().all(|(e, s)| phi.state(e) == s)
}

/// A joint distribution over full realizations, stored as an explicit table.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    support: Vec<Realization>,
    probs: Vec<f64>,
}

impl Prior {
    pub fn new(entries: Vec<(Realization, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInstance("prior has an empty support".into()));
        }
        let n = entries[0].0.len();
        let mut seen = HashMap::with_capacity(entries.len());
        let mut sum = 0.0;
        for (i, (phi, p)) in entries.iter().enumerate() {
            if phi.len() != n {
                return Err(Error::InvalidInstance(format!("prior entry {i} has {} states, expected {n}", phi.len())));
            }
            if !(*p > 0.0 && *p <= 1.0 + NORMALIZATION_TOL) {
                return Err(Error::InvalidInstance(format!("prior entry {i} has probability {p} outside (0,1]")));
            }
            if seen.insert(phi.clone(), i).is_some() {
                return Err(Error::InvalidInstance(format!("realization {phi} appears twice in the prior")));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::ProbabilityNotNormalized { sum });
        }
        let (support, probs) = entries.into_iter().unzip();
        Ok(Prior { support, probs })
    }

    /// Uniform prior over the given distinct realizations.
    pub fn uniform(support: Vec<Realization>) -> Result<Self> {
        let p = 1.0 / support.len() as f64;
        Self::new(support.into_iter().map(|r| (r, p)).collect())
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn support(&self) -> &[Realization] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Realization, f64)> {
        self.support.iter().zip(self.probs.iter().copied())
    }

    /// Probability of `phi`, zero outside the support.
    pub fn prob_of(&self, phi: &Realization) -> f64 {
        self.iter().find(|(r, _)| *r == phi).map_or(0.0, |(_, p)| p)
    }

    pub fn num_items(&self) -> usize {
        self.support[0].len()
    }
}

/// `p(φ | ψ)`: the prior restricted to realizations consistent with `psi`
/// and renormalized.
pub fn conditional_distribution(prior: &Prior, psi: &PartialRealization) -> Result<Prior> {
    if psi.is_empty() {
        return Ok(prior.clone());
    }
    let kept: Vec<(Realization, f64)> =
        prior.iter().filter(|(phi, _)| consistent(phi, psi)).map(|(phi, p)| (phi.clone(), p)).collect();
    let mass: f64 = kept.iter().map(|(_, p)| p).sum();
    if kept.is_empty() || mass <= 0.0 {
        return Err(Error::ZeroProbabilityObservation(psi.to_string()));
    }
    let (support, probs) = kept.into_iter().map(|(phi, p)| (phi, p / mass)).unzip();
    Ok(Prior { support, probs })
}

/// The conditioned prior as `(support index, probability)` pairs.
#[derive(Debug, Clone)]
pub struct Posterior {
    entries: Vec<(usize, f64)>,
}

impl Posterior {
    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn expect(&self, mut f: impl FnMut(usize) -> f64) -> f64 {
        self.entries.iter().map(|&(i, p)| p * f(i)).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostFunction(Vec<f64>);

impl CostFunction {
    pub fn new(costs: Vec<f64>) -> Result<Self> {
        for (i, &c) in costs.iter().enumerate() {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidInstance(format!("item {i} has non-positive cost {c}")));
            }
        }
        Ok(CostFunction(costs))
    }

    pub fn uniform(n: usize) -> Self {
        CostFunction(vec![1.0; n])
    }

    pub fn cost(&self, item: ItemId) -> f64 {
        self.0[item.0]
    }

    /// `c(S)`, summed in ascending item order.
    pub fn total(&self, set: ItemSet) -> f64 {
        set.iter().map(|e| self.0[e.0]).sum()
    }

    pub fn is_uniform(&self) -> bool {
        self.0.iter().all(|&c| c == 1.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// A permutation of the ground set: the adversary's arrival sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArrivalOrder(Vec<ItemId>);

impl ArrivalOrder {
    pub fn new(sequence: Vec<ItemId>, n: usize) -> Result<Self> {
        let mut seen = ItemSet::EMPTY;
        if sequence.len() != n {
            return Err(Error::InvalidInstance(format!("arrival order has {} entries, expected {n}", sequence.len())));
        }
        for &e in &sequence {
            if e.0 >= n || seen.contains(e) {
                return Err(Error::InvalidInstance(format!("arrival order is not a permutation of 0..{n}")));
            }
            seen = seen.with(e);
        }
        Ok(ArrivalOrder(sequence))
    }

    pub fn from_indices(indices: &[usize], n: usize) -> Result<Self> {
        Self::new(indices.iter().map(|&i| ItemId(i)).collect(), n)
    }

    pub fn identity(n: usize) -> Self {
        ArrivalOrder((0..n).map(ItemId).collect())
    }

    pub fn items(&self) -> &[ItemId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.0.iter().map(|e| e.0).collect()
    }
}

impl fmt::Display for ArrivalOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Enumeration caps shared by the oracle, the checkers and the order search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_partials: usize,
    pub max_order_items: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_partials: DEFAULT_MAX_PARTIALS, max_order_items: DEFAULT_MAX_ORDER_ITEMS }
    }
}

/// Cap on the dense `f(S, φ)` cache (entries).
const DENSE_VALUE_CAP: usize = 1 << 24;

/// A complete problem instance: ground set, costs, prior, utility and budget.
#[derive(Debug, Clone)]
pub struct Instance {
    num_states: usize,
    costs: CostFunction,
    prior: Prior,
    budget: f64,
    utility: Utility,
    pub arrival_orders: Vec<ArrivalOrder>,
    pub limits: Limits,
    index: HashMap<Realization, usize>,
    dense: Option<Vec<f64>>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.num_states == other.num_states
            && self.costs == other.costs
            && self.prior == other.prior
            && self.budget == other.budget
            && self.utility == other.utility
            && self.arrival_orders == other.arrival_orders
    }
}

impl Instance {
    pub fn new(num_states: usize, costs: CostFunction, prior: Prior, budget: f64, utility: Utility) -> Result<Self> {
        let n = costs.as_slice().len();
        if n == 0 {
            return Err(Error::InvalidInstance("the ground set is empty".into()));
        }
        if n > MAX_ITEMS {
            return Err(Error::InvalidInstance(format!("{n} items exceed the supported maximum of {MAX_ITEMS}")));
        }
        if num_states == 0 || num_states > u16::MAX as usize {
            return Err(Error::InvalidInstance(format!("num_states = {num_states} is out of range")));
        }
        if prior.num_items() != n {
            return Err(Error::InvalidInstance(format!(
                "prior realizations have {} states but there are {n} items",
                prior.num_items()
            )));
        }
        for phi in prior.support() {
            if let Some(s) = phi.states().iter().find(|s| s.index() >= num_states) {
                return Err(Error::InvalidInstance(format!("state {s} in {phi} exceeds num_states = {num_states}")));
            }
        }
        if !(budget > 0.0 && budget.is_finite()) {
            return Err(Error::InvalidInstance(format!("budget {budget} must be positive")));
        }
        if !costs.as_slice().iter().any(|&c| c <= budget + TIE_TOL) {
            return Err(Error::InvalidInstance("no item is individually affordable".into()));
        }
        utility.validate(n, num_states, &prior)?;
        let index = prior.support().iter().enumerate().map(|(i, r)| (r.clone(), i)).collect();
        let mut inst = Instance {
            num_states,
            costs,
            prior,
            budget,
            utility,
            arrival_orders: Vec::new(),
            limits: Limits::default(),
            index,
            dense: None,
        };
        inst.build_dense();
        Ok(inst)
    }

    fn build_dense(&mut self) {
        let n = self.n();
        let m = self.prior.len();
        if n >= 40 || (1usize << n).saturating_mul(m) > DENSE_VALUE_CAP {
            return;
        }
        let mut table = Vec::with_capacity((1usize << n) * m);
        for bits in 0..(1u64 << n) {
            let set = ItemSet::from_bits(bits);
            for idx in 0..m {
                table.push(self.utility.eval_indexed(set, idx, &self.prior));
            }
        }
        self.dense = Some(table);
    }

    pub fn with_arrival_orders(mut self, orders: Vec<ArrivalOrder>) -> Result<Self> {
        for o in &orders {
            ArrivalOrder::new(o.items().to_vec(), self.n())?;
        }
        self.arrival_orders = orders;
        Ok(self)
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    pub fn n(&self) -> usize {
        self.costs.as_slice().len()
    }

    pub fn items(&self) -> impl Iterator<Item = ItemId> {
        (0..self.n()).map(ItemId)
    }

    pub fn ground_set(&self) -> ItemSet {
        ItemSet::full(self.n())
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn costs(&self) -> &CostFunction {
        &self.costs
    }

    pub fn cost(&self, item: ItemId) -> f64 {
        self.costs.cost(item)
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn utility(&self) -> &Utility {
        &self.utility
    }

    /// Whether an item of cost `cost` fits when `used` has been spent out of `budget`.
    pub fn fits_within(used: f64, cost: f64, budget: f64) -> bool {
        used + cost <= budget + TIE_TOL
    }

    pub fn fits(&self, used: f64, cost: f64) -> bool {
        Self::fits_within(used, cost, self.budget)
    }

    /// Checks the preconditions of the uniform-cost path and returns `B` as a count.
    pub fn cardinality_budget(&self) -> Result<usize> {
        if let Some(e) = self.items().find(|&e| self.cost(e) != 1.0) {
            return Err(Error::NonUniformCost { item: e, cost: self.cost(e) });
        }
        let b = self.budget;
        if b.fract() != 0.0 || b < 1.0 {
            return Err(Error::NonIntegerBudget(b));
        }
        Ok(b as usize)
    }

    pub fn realization_index(&self, phi: &Realization) -> Option<usize> {
        self.index.get(phi).copied()
    }

    /// `f(S, φ_idx)` for a support realization.
    #[inline]
    pub fn value(&self, set: ItemSet, idx: usize) -> f64 {
        match &self.dense {
            Some(t) => t[set.bits() as usize * self.prior.len() + idx],
            None => self.utility.eval_indexed(set, idx, &self.prior),
        }
    }

    /// `f(S, φ)` for an arbitrary realization (tables only accept support members).
    pub fn utility_of(&self, set: ItemSet, phi: &Realization) -> Result<f64> {
        match self.realization_index(phi) {
            Some(idx) => Ok(self.value(set, idx)),
            None => self.utility.eval_outside_support(set, phi, &self.prior),
        }
    }

    /// Support indices consistent with `psi`, with renormalized probabilities.
    pub fn posterior(&self, psi: &PartialRealization) -> Result<Posterior> {
        let probs = self.prior.probs();
        let mut entries: Vec<(usize, f64)> = self
            .prior
            .support()
            .iter()
            .enumerate()
            .filter(|(_, phi)| consistent(phi, psi))
            .map(|(i, _)| (i, probs[i]))
            .collect();
        let mass: f64 = entries.iter().map(|e| e.1).sum();
        if entries.is_empty() || mass <= 0.0 {
            return Err(Error::ZeroProbabilityObservation(psi.to_string()));
        }
        for e in &mut entries {
            e.1 /= mass;
        }
        Ok(Posterior { entries })
    }

    /// `Pr[Φ(item) = s | ψ]` for each state with positive conditional mass, ascending by state.
    pub fn state_distribution(&self, post: &Posterior, item: ItemId) -> Vec<(StateId, f64)> {
        let mut mass = vec![0.0; self.num_states];
        for &(i, p) in post.entries() {
            mass[self.prior.support()[i].state(item).index()] += p;
        }
        mass.into_iter().enumerate().filter(|(_, p)| *p > 0.0).map(|(s, p)| (StateId(s as u16), p)).collect()
    }

    /// `E_Φ[f(S, Φ)]` under the prior.
    pub fn expected_value(&self, set: ItemSet) -> f64 {
        self.prior.probs().iter().enumerate().map(|(i, p)| p * self.value(set, i)).sum()
    }
}

/// All partial realizations with positive prior mass whose domain costs at
/// most `budget_cap`, sorted by domain (ascending item list) then states.
pub fn enumerate_reachable_partials(instance: &Instance, budget_cap: f64) -> Result<Vec<PartialRealization>> {
    let n = instance.n();
    let cap = instance.limits.max_partials;
    let mut out = Vec::new();
    let mut domains = Vec::new();
    collect_affordable_domains(instance, budget_cap, 0, ItemSet::EMPTY, 0.0, n, &mut domains);
    for dom in domains {
        let mut projections: Vec<PartialRealization> =
            instance.prior().support().iter().map(|phi| phi.restrict(dom)).collect();
        projections.sort_by_key(|p| p.sort_key());
        projections.dedup();
        out.extend(projections);
        if out.len() > cap {
            return Err(Error::StateSpaceTooLarge { count: out.len(), cap });
        }
    }
    out.sort_by_key(|p| p.sort_key());
    Ok(out)
}

fn collect_affordable_domains(
    instance: &Instance,
    budget_cap: f64,
    start: usize,
    dom: ItemSet,
    used: f64,
    n: usize,
    out: &mut Vec<ItemSet>,
) {
    out.push(dom);
    for i in start..n {
        let c = instance.cost(ItemId(i));
        if Instance::fits_within(used, c, budget_cap) {
            collect_affordable_domains(instance, budget_cap, i + 1, dom.with(ItemId(i)), used + c, n, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(states: &[u16]) -> Realization {
        Realization::from_indices(states)
    }

    fn two_binary_uniform() -> Instance {
        let prior = Prior::uniform(vec![r(&[0, 0]), r(&[0, 1]), r(&[1, 0]), r(&[1, 1])]).unwrap();
        let utility = Utility::modular(&prior, &[vec![0.0, 1.0], vec![0.0, 1.0]]);
        Instance::new(2, CostFunction::uniform(2), prior, 2.0, utility).unwrap()
    }

    #[test]
    fn conditioning_uniform_prior_on_one_item() {
        let inst = two_binary_uniform();
        let psi = PartialRealization::from_pairs(2, [(ItemId(0), StateId(1))]).unwrap();
        let cond = conditional_distribution(inst.prior(), &psi).unwrap();
        assert_eq!(cond.len(), 2);
        for (phi, p) in cond.iter() {
            assert_eq!(phi.state(ItemId(0)), StateId(1));
            assert_eq!(p, 0.5);
        }
    }

    #[test]
    fn conditioning_on_empty_is_identity() {
        let inst = two_binary_uniform();
        let cond = conditional_distribution(inst.prior(), &PartialRealization::empty(2)).unwrap();
        assert_eq!(&cond, inst.prior());
    }

    #[test]
    fn conditioning_renormalizes() {
        let prior = Prior::new(vec![(r(&[0, 0]), 0.2), (r(&[1, 0]), 0.3), (r(&[1, 1]), 0.5)]).unwrap();
        let psi = PartialRealization::from_pairs(2, [(ItemId(0), StateId(1))]).unwrap();
        let cond = conditional_distribution(&prior, &psi).unwrap();
        assert_eq!(cond.len(), 2);
        assert!((cond.prob_of(&r(&[1, 0])) - 0.375).abs() < 1e-15);
        assert!((cond.prob_of(&r(&[1, 1])) - 0.625).abs() < 1e-15);
    }

    #[test]
    fn conditioning_on_impossible_observation_fails() {
        let prior = Prior::new(vec![(r(&[0, 0]), 0.5), (r(&[1, 1]), 0.5)]).unwrap();
        let psi = PartialRealization::from_pairs(2, [(ItemId(0), StateId(0)), (ItemId(1), StateId(1))]).unwrap();
        assert!(matches!(conditional_distribution(&prior, &psi), Err(Error::ZeroProbabilityObservation(_))));
    }

    #[test]
    fn consistency() {
        let phi = r(&[1, 0]);
        let yes = PartialRealization::from_pairs(2, [(ItemId(0), StateId(1))]).unwrap();
        let no = PartialRealization::from_pairs(2, [(ItemId(1), StateId(1))]).unwrap();
        assert!(consistent(&phi, &yes));
        assert!(!consistent(&phi, &no));
        assert!(consistent(&phi, &PartialRealization::empty(2)));
    }

    #[test]
    fn duplicate_observation_rejected() {
        let res = PartialRealization::from_pairs(2, [(ItemId(0), StateId(1)), (ItemId(0), StateId(0))]);
        assert!(res.is_err());
    }

    #[test]
    fn reachable_partials_counts() {
        let inst = two_binary_uniform();
        let all = enumerate_reachable_partials(&inst, 2.0).unwrap();
        assert_eq!(all.len(), 9);
        assert!(all[0].is_empty());
        assert_eq!(enumerate_reachable_partials(&inst, 0.0).unwrap().len(), 1);

        let single = Prior::new(vec![(r(&[1, 0, 1]), 1.0)]).unwrap();
        let utility = Utility::modular(&single, &[vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0, 1.0]]);
        let inst = Instance::new(2, CostFunction::uniform(3), single, 3.0, utility).unwrap();
        let all = enumerate_reachable_partials(&inst, 3.0).unwrap();
        assert_eq!(all.len(), 8);
        assert!(all.iter().all(|psi| consistent(&inst.prior().support()[0], psi)));
    }

    #[test]
    fn reachable_partials_respect_cap() {
        let inst = two_binary_uniform().with_limits(Limits { max_partials: 4, ..Limits::default() });
        assert!(matches!(enumerate_reachable_partials(&inst, 2.0), Err(Error::StateSpaceTooLarge { .. })));
    }

    #[test]
    fn reachable_partials_sorted_lexicographically() {
        let inst = two_binary_uniform();
        let all = enumerate_reachable_partials(&inst, 2.0).unwrap();
        let keys: Vec<_> = all.iter().map(|p| p.sort_key()).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(keys[1], (vec![0], vec![0]));
        assert_eq!(keys[3], (vec![0, 1], vec![0, 0]));
    }

    #[test]
    fn prior_validation() {
        assert!(matches!(
            Prior::new(vec![(r(&[0]), 0.5), (r(&[1]), 0.4)]),
            Err(Error::ProbabilityNotNormalized { .. })
        ));
        assert!(Prior::new(vec![(r(&[0]), 0.5), (r(&[0]), 0.5)]).is_err());
    }

    #[test]
    fn subsets_enumerates_all() {
        let s = ItemSet::from_iter([ItemId(1), ItemId(3), ItemId(4)]);
        let subs: Vec<_> = s.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|x| x.is_subset_of(s)));
        assert_eq!(ItemSet::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn instance_requires_an_affordable_item() {
        let prior = Prior::new(vec![(r(&[0]), 1.0)]).unwrap();
        let utility = Utility::modular(&prior, &[vec![1.0]]);
        let res = Instance::new(1, CostFunction::new(vec![3.0]).unwrap(), prior, 2.0, utility);
        assert!(res.is_err());
    }
}
