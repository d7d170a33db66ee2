use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{PolicyTrace, SelectedStep, SkipReason, StopReason, StreamAlgorithm, StreamPolicySpec};
use crate::error::Result;
use crate::model::{ArrivalOrder, Instance, ItemId, PartialRealization, Realization, StateId, TIE_TOL};
use crate::utility::MarginalCache;

/// Outcome of the fair coin of the mixed policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Coin {
    /// Play the best singleton `e*`.
    Singleton,
    /// Play the knapsack threshold policy.
    Threshold,
}

pub fn coin_for_seed(seed: u64) -> Coin {
    if ChaCha8Rng::seed_from_u64(seed).gen_bool(0.5) {
        Coin::Singleton
    } else {
        Coin::Threshold
    }
}

struct Scan {
    selected: Vec<SelectedStep>,
    skipped: Vec<(ItemId, SkipReason)>,
    stop: StopReason,
}

/// Runs stream policies with a shared marginal cache.
///
/// Decisions only read `(ψ_t, σ(i), v, B, c)`; states come from the
/// `observe` callback, which is invoked for selected items only.
pub struct StreamRunner<'a> {
    cache: MarginalCache<'a>,
    singleton: Option<(ItemId, f64)>,
}

impl<'a> StreamRunner<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        StreamRunner { cache: MarginalCache::new(instance), singleton: None }
    }

    pub fn instance(&self) -> &'a Instance {
        self.cache.instance()
    }

    pub fn best_singleton(&mut self) -> (ItemId, f64) {
        *self.singleton.get_or_insert_with(|| super::best_singleton(self.cache.instance()))
    }

    pub fn run(&mut self, spec: &StreamPolicySpec, order: &ArrivalOrder, phi: &Realization) -> Result<PolicyTrace> {
        let mut observe = |e: ItemId| phi.state(e);
        let (scan, coin) = self.run_observing(spec, order, &mut observe)?;
        let set = scan.selected.iter().map(|s| s.item).collect();
        let final_value = self.instance().utility_of(set, phi)?;
        Ok(PolicyTrace { selected: scan.selected, skipped: scan.skipped, stop: scan.stop, final_value, coin })
    }

    /// Runs the policy against an observation oracle and returns the selected
    /// `(item, state)` pairs in order.
    pub fn decisions(
        &mut self,
        spec: &StreamPolicySpec,
        order: &ArrivalOrder,
        observe: &mut dyn FnMut(ItemId) -> StateId,
    ) -> Result<Vec<(ItemId, StateId)>> {
        let (scan, _) = self.run_observing(spec, order, observe)?;
        Ok(scan.selected.iter().map(|s| (s.item, s.state)).collect())
    }

    fn run_observing(
        &mut self,
        spec: &StreamPolicySpec,
        order: &ArrivalOrder,
        observe: &mut dyn FnMut(ItemId) -> StateId,
    ) -> Result<(Scan, Option<Coin>)> {
        match spec.algorithm {
            StreamAlgorithm::ThresholdUniform => Ok((self.scan_uniform(spec.v, order, observe)?, None)),
            StreamAlgorithm::ThresholdKnapsack => Ok((self.scan_knapsack(spec.v, order, observe, false)?, None)),
            StreamAlgorithm::ThresholdKnapsackPlus => Ok((self.scan_knapsack(spec.v, order, observe, true)?, None)),
            StreamAlgorithm::MixedSingleton => {
                let coin = coin_for_seed(spec.seed);
                let scan = match coin {
                    Coin::Singleton => self.scan_singleton(observe)?,
                    Coin::Threshold => self.scan_knapsack(spec.v, order, observe, false)?,
                };
                Ok((scan, Some(coin)))
            }
        }
    }

    fn scan_uniform(
        &mut self,
        v: f64,
        order: &ArrivalOrder,
        observe: &mut dyn FnMut(ItemId) -> StateId,
    ) -> Result<Scan> {
        let inst = self.cache.instance();
        let budget = inst.cardinality_budget()?;
        let threshold = v / (2.0 * budget as f64);
        let mut psi = PartialRealization::empty(inst.n());
        let mut scan = Scan { selected: Vec::new(), skipped: Vec::new(), stop: StopReason::StreamExhausted };
        for &e in order.items() {
            if scan.selected.len() >= budget {
                scan.stop = StopReason::CardinalityReached;
                break;
            }
            let marginal = self.cache.marginal(e, &psi)?;
            if marginal >= threshold - TIE_TOL {
                let state = observe(e);
                psi = psi.with(e, state);
                let cumulative_cost = (scan.selected.len() + 1) as f64;
                scan.selected.push(SelectedStep { item: e, state, marginal, cumulative_cost });
            } else {
                scan.skipped.push((e, SkipReason::BelowThreshold { marginal }));
            }
        }
        if scan.stop == StopReason::StreamExhausted && scan.selected.len() >= budget {
            scan.stop = StopReason::CardinalityReached;
        }
        Ok(scan)
    }

    fn scan_knapsack(
        &mut self,
        v: f64,
        order: &ArrivalOrder,
        observe: &mut dyn FnMut(ItemId) -> StateId,
        allow_overshoot: bool,
    ) -> Result<Scan> {
        let inst = self.cache.instance();
        let threshold = v / (2.0 * inst.budget());
        let mut psi = PartialRealization::empty(inst.n());
        let mut used = 0.0;
        let mut scan = Scan { selected: Vec::new(), skipped: Vec::new(), stop: StopReason::StreamExhausted };
        for &e in order.items() {
            let marginal = self.cache.marginal(e, &psi)?;
            let cost = inst.cost(e);
            if marginal / cost < threshold - TIE_TOL {
                scan.skipped.push((e, SkipReason::BelowThreshold { marginal }));
                continue;
            }
            let fits = inst.fits(used, cost);
            if !fits && !allow_overshoot {
                scan.stop = StopReason::BudgetBreak { item: e };
                break;
            }
            let state = observe(e);
            psi = psi.with(e, state);
            used += cost;
            scan.selected.push(SelectedStep { item: e, state, marginal, cumulative_cost: used });
            if !fits {
                scan.stop = StopReason::Overshoot { item: e };
                break;
            }
        }
        Ok(scan)
    }

    fn scan_singleton(&mut self, observe: &mut dyn FnMut(ItemId) -> StateId) -> Result<Scan> {
        let inst = self.cache.instance();
        let (e, _) = self.best_singleton();
        let mut scan = Scan { selected: Vec::new(), skipped: Vec::new(), stop: StopReason::Stopped };
        if !inst.fits(0.0, inst.cost(e)) {
            scan.stop = StopReason::SingletonUnaffordable;
            return Ok(scan);
        }
        let marginal = self.cache.marginal(e, &PartialRealization::empty(inst.n()))?;
        let state = observe(e);
        scan.selected.push(SelectedStep { item: e, state, marginal, cumulative_cost: inst.cost(e) });
        Ok(scan)
    }
}

/// Online threshold policy for uniform costs: accept `σ(i)` iff
/// `∆(σ(i) | ψ_t) ≥ v / 2B` while fewer than `B` items are selected.
pub fn run_threshold_uniform(
    instance: &Instance,
    spec: &StreamPolicySpec,
    order: &ArrivalOrder,
    phi: &Realization,
) -> Result<PolicyTrace> {
    let spec = spec.with_algorithm(StreamAlgorithm::ThresholdUniform);
    StreamRunner::new(instance).run(&spec, order, phi)
}

/// Online density-threshold policy for knapsack budgets. A passing item that
/// does not fit ends the whole scan.
pub fn run_threshold_knapsack(
    instance: &Instance,
    spec: &StreamPolicySpec,
    order: &ArrivalOrder,
    phi: &Realization,
) -> Result<PolicyTrace> {
    let spec = spec.with_algorithm(StreamAlgorithm::ThresholdKnapsack);
    StreamRunner::new(instance).run(&spec, order, phi)
}

/// Like [`run_threshold_knapsack`] but keeps the first passing item that
/// violates the budget. Not feasible; exists for the overshoot analysis.
pub fn run_threshold_knapsack_plus(
    instance: &Instance,
    spec: &StreamPolicySpec,
    order: &ArrivalOrder,
    phi: &Realization,
) -> Result<PolicyTrace> {
    let spec = spec.with_algorithm(StreamAlgorithm::ThresholdKnapsackPlus);
    StreamRunner::new(instance).run(&spec, order, phi)
}

/// Fair seeded coin between `{e*}` and the knapsack threshold policy.
pub fn run_mixed_singleton(
    instance: &Instance,
    spec: &StreamPolicySpec,
    order: &ArrivalOrder,
    phi: &Realization,
) -> Result<PolicyTrace> {
    let spec = spec.with_algorithm(StreamAlgorithm::MixedSingleton);
    StreamRunner::new(instance).run(&spec, order, phi)
}

pub fn run_stream(
    instance: &Instance,
    spec: &StreamPolicySpec,
    order: &ArrivalOrder,
    phi: &Realization,
) -> Result<PolicyTrace> {
    StreamRunner::new(instance).run(spec, order, phi)
}
