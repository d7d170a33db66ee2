use std::collections::HashMap;
use std::rc::Rc;

use crate::error::Result;
use crate::model::{Instance, ItemId, PartialRealization, Posterior, StateId};

/// Memoized posteriors and conditional marginals `∆(e | ψ)` for one instance.
///
/// Not `Send`; parallel evaluators build one per task.
pub struct MarginalCache<'a> {
    instance: &'a Instance,
    posteriors: HashMap<PartialRealization, Rc<Posterior>>,
    marginals: HashMap<PartialRealization, Vec<Option<f64>>>,
}

impl<'a> MarginalCache<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        MarginalCache { instance, posteriors: HashMap::new(), marginals: HashMap::new() }
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn posterior(&mut self, psi: &PartialRealization) -> Result<Rc<Posterior>> {
        if let Some(p) = self.posteriors.get(psi) {
            return Ok(Rc::clone(p));
        }
        let post = Rc::new(self.instance.posterior(psi)?);
        self.posteriors.insert(psi.clone(), Rc::clone(&post));
        Ok(post)
    }

    pub fn marginal(&mut self, item: ItemId, psi: &PartialRealization) -> Result<f64> {
        if let Some(Some(m)) = self.marginals.get(psi).map(|row| row[item.0]) {
            return Ok(m);
        }
        let post = self.posterior(psi)?;
        let m = super::marginal_given(self.instance, item, psi.dom(), &post);
        let n = self.instance.n();
        self.marginals.entry(psi.clone()).or_insert_with(|| vec![None; n])[item.0] = Some(m);
        Ok(m)
    }

    pub fn state_distribution(&mut self, psi: &PartialRealization, item: ItemId) -> Result<Vec<(StateId, f64)>> {
        let post = self.posterior(psi)?;
        Ok(self.instance.state_distribution(&post, item))
    }
}
