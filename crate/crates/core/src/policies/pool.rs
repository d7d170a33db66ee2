use super::{Oracle, PolicyTrace, PoolPolicySpec, SelectedStep, StopReason};
use crate::error::Result;
use crate::model::{Instance, ItemId, PartialRealization, Realization, TIE_TOL};
use crate::utility::MarginalCache;

/// `e* = argmax_e E[f({e}, Φ)]`, ties to the lowest id.
pub fn best_singleton(instance: &Instance) -> (ItemId, f64) {
    let mut best = (ItemId(0), f64::NEG_INFINITY);
    for e in instance.items() {
        let value = instance.expected_value(crate::model::ItemSet::EMPTY.with(e));
        if value > best.1 + TIE_TOL {
            best = (e, value);
        }
    }
    best
}

/// Runs pool-based policies. Holds a marginal cache and, lazily, the oracle.
pub struct PoolRunner<'a> {
    cache: MarginalCache<'a>,
    oracle: Option<Oracle<'a>>,
    singleton: Option<(ItemId, f64)>,
}

impl<'a> PoolRunner<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        PoolRunner { cache: MarginalCache::new(instance), oracle: None, singleton: None }
    }

    pub fn run(&mut self, spec: &PoolPolicySpec, phi: &Realization) -> Result<PolicyTrace> {
        let empty = PartialRealization::empty(self.cache.instance().n());
        self.run_from(spec, &empty, phi)
    }

    /// Runs `spec` on top of the observations `psi0`: the policy starts in
    /// state `psi0`, only considers items outside `dom(ψ₀)` and has the full
    /// budget. `final_value` is `f(dom(ψ₀) ∪ E, φ)`.
    pub fn run_from(
        &mut self,
        spec: &PoolPolicySpec,
        psi0: &PartialRealization,
        phi: &Realization,
    ) -> Result<PolicyTrace> {
        let inst = self.cache.instance();
        let mut psi = psi0.clone();
        let mut used = 0.0;
        let mut selected = Vec::new();
        let mut take = |cache: &mut MarginalCache<'a>, psi: &mut PartialRealization, used: &mut f64, e: ItemId| {
            let marginal = cache.marginal(e, psi)?;
            let state = phi.state(e);
            *psi = psi.with(e, state);
            *used += inst.cost(e);
            selected.push(SelectedStep { item: e, state, marginal, cumulative_cost: *used });
            Ok::<(), crate::Error>(())
        };

        let stop = match spec {
            PoolPolicySpec::Empty => StopReason::Stopped,
            PoolPolicySpec::FixedSingleStep(e) => {
                if !psi.dom().contains(*e) && inst.fits(0.0, inst.cost(*e)) {
                    take(&mut self.cache, &mut psi, &mut used, *e)?;
                }
                StopReason::Stopped
            }
            PoolPolicySpec::BestSingleton => {
                let (e, _) = *self.singleton.get_or_insert_with(|| best_singleton(inst));
                if !inst.fits(0.0, inst.cost(e)) {
                    StopReason::SingletonUnaffordable
                } else {
                    if !psi.dom().contains(e) {
                        take(&mut self.cache, &mut psi, &mut used, e)?;
                    }
                    StopReason::Stopped
                }
            }
            PoolPolicySpec::AdaptiveGreedy => {
                let rounds = inst.cardinality_budget()?;
                let mut stop = StopReason::RoundsCompleted;
                for _ in 0..rounds {
                    match self.argmax(&psi, false)? {
                        Some(e) => take(&mut self.cache, &mut psi, &mut used, e)?,
                        None => {
                            stop = StopReason::PoolExhausted;
                            break;
                        }
                    }
                }
                stop
            }
            PoolPolicySpec::DensityGreedy => loop {
                match self.argmax(&psi, true)? {
                    None => break StopReason::PoolExhausted,
                    Some(e) if !inst.fits(used, inst.cost(e)) => break StopReason::BudgetBreak { item: e },
                    Some(e) => take(&mut self.cache, &mut psi, &mut used, e)?,
                }
            },
            PoolPolicySpec::OptimalOracle => {
                let pool = inst.ground_set().difference(psi0.dom());
                let oracle = self.oracle.get_or_insert_with(|| Oracle::new(inst));
                loop {
                    let remaining = inst.budget() - used;
                    match oracle.best_action(&psi, pool, remaining)? {
                        Some(e) => take(&mut self.cache, &mut psi, &mut used, e)?,
                        None => break StopReason::Stopped,
                    }
                }
            }
        };
        let final_value = inst.utility_of(psi.dom(), phi)?;
        Ok(PolicyTrace { selected, skipped: Vec::new(), stop, final_value, coin: None })
    }

    /// Highest marginal (or marginal per unit cost) among unobserved items;
    /// ties go to the lowest id. Negative maxima are still returned.
    fn argmax(&mut self, psi: &PartialRealization, per_cost: bool) -> Result<Option<ItemId>> {
        let inst = self.cache.instance();
        let mut best: Option<(ItemId, f64)> = None;
        for e in inst.items() {
            if psi.dom().contains(e) {
                continue;
            }
            let mut score = self.cache.marginal(e, psi)?;
            if per_cost {
                score /= inst.cost(e);
            }
            if best.is_none_or(|(_, b)| score > b + TIE_TOL) {
                best = Some((e, score));
            }
        }
        Ok(best.map(|(e, _)| e))
    }
}

pub fn run_pool(instance: &Instance, spec: &PoolPolicySpec, phi: &Realization) -> Result<PolicyTrace> {
    PoolRunner::new(instance).run(spec, phi)
}

/// Offline adaptive greedy: `B` rounds of `argmax_e ∆(e | ψ_t)`.
pub fn run_pool_greedy(instance: &Instance, phi: &Realization) -> Result<PolicyTrace> {
    run_pool(instance, &PoolPolicySpec::AdaptiveGreedy, phi)
}

/// Offline density greedy: `argmax_e ∆(e | ψ_t) / c(e)` until the argmax does not fit.
pub fn run_pool_density_greedy(instance: &Instance, phi: &Realization) -> Result<PolicyTrace> {
    run_pool(instance, &PoolPolicySpec::DensityGreedy, phi)
}
