//! Pinned instances: the canonical three-item coverage problem and one
//! counterexample table per structural property.

use crate::model::{CostFunction, Instance, ItemSet, Prior, Realization};
use crate::utility::{Coverage, Property, Utility};

const A: u64 = 1;
const B: u64 = 2;
const C: u64 = 4;
const D: u64 = 8;

/// Probability that item `e` is in state 1 under the canonical prior.
const CANONICAL_P1: [f64; 3] = [0.5, 0.7, 0.4];

fn canonical_prior() -> Prior {
    let mut entries = Vec::with_capacity(8);
    for bits in 0..8u16 {
        let states = [bits >> 2 & 1, bits >> 1 & 1, bits & 1];
        let p = states.iter().zip(CANONICAL_P1).map(|(&s, p1)| if s == 1 { p1 } else { 1.0 - p1 }).product();
        entries.push((Realization::from_indices(&states), p));
    }
    Prior::new(entries).expect("canonical prior is normalized")
}

fn canonical_coverage() -> Utility {
    Utility::Coverage(Coverage { universe: 4, covers: vec![vec![A, A | B], vec![0, B | C], vec![D, C | D]] })
}

/// Three items with two states each, independent states, coverage over a
/// four-element universe `{a, b, c, d}`; unit costs and `B = 2`.
///
/// | item | state 0 | state 1 | `P[state 1]` |
/// |------|---------|---------|--------------|
/// | 0    | {a}     | {a, b}  | 0.5          |
/// | 1    | {}      | {b, c}  | 0.7          |
/// | 2    | {d}     | {c, d}  | 0.4          |
pub fn canonical_uniform() -> Instance {
    Instance::new(2, CostFunction::uniform(3), canonical_prior(), 2.0, canonical_coverage())
        .expect("canonical instance is valid")
}

/// [`canonical_uniform`] with costs `(1, 1, 2)`.
pub fn canonical_knapsack() -> Instance {
    let costs = CostFunction::new(vec![1.0, 1.0, 2.0]).expect("positive costs");
    Instance::new(2, costs, canonical_prior(), 2.0, canonical_coverage()).expect("canonical instance is valid")
}

/// A table that violates `property` and satisfies the other three checkers.
pub fn counterexample(property: Property) -> Instance {
    match property {
        Property::AdaptiveMonotone => not_monotone(),
        Property::AdaptiveSubmodular => not_adaptive_submodular(),
        Property::SemiPolicywise => not_semi_policywise(),
        Property::Policywise => not_policywise(),
    }
}

/// Selecting the only item destroys value.
fn not_monotone() -> Instance {
    let prior = Prior::new(vec![(Realization::from_indices(&[0]), 1.0)]).unwrap();
    let util = Utility::from_fn(&prior, |set, _| if set.is_empty() { 1.0 } else { 0.0 });
    Instance::new(1, CostFunction::uniform(1), prior, 1.0, util).unwrap()
}

/// Perfectly correlated binary states: observing item 1 in state 1 raises
/// the marginal of item 0 from 0.5 to 1. With `B = 1` no conditioned policy
/// has budget left to exploit it, so the policy-level checks hold.
fn not_adaptive_submodular() -> Instance {
    let prior = Prior::uniform(vec![Realization::from_indices(&[0, 0]), Realization::from_indices(&[1, 1])]).unwrap();
    let util = Utility::modular(&prior, &[vec![0.0, 1.0], vec![2.0, 2.0]]);
    Instance::new(2, CostFunction::uniform(2), prior, 1.0, util).unwrap()
}

/// Coverage over `{a, b, c}` tabulated under a dependent prior with unit costs.
fn coverage_table(support: &[(&[u16], f64)], covers: [[u64; 2]; 3], budget: f64) -> Instance {
    let prior = Prior::new(support.iter().map(|(s, p)| (Realization::from_indices(s), *p)).collect()).unwrap();
    let util = Utility::from_fn(&prior, |set: ItemSet, phi: &Realization| {
        set.iter().fold(0u64, |m, e| m | covers[e.0][phi.state(e).index()]).count_ones() as f64
    });
    Instance::new(2, CostFunction::uniform(3), prior, budget, util).unwrap()
}

/// Item 0 covers nothing but its state is informative: after observing
/// `Φ(0) = 1` a fresh budget of 2 earns 4/3, more than the unconditioned
/// optimum of 5/4. Item marginals still only shrink.
fn not_semi_policywise() -> Instance {
    let support: [(&[u16], f64); 4] = [(&[0, 1, 0], 0.25), (&[1, 0, 1], 0.25), (&[1, 1, 0], 0.25), (&[1, 1, 1], 0.25)];
    coverage_table(&support, [[0, 0], [B, C], [C, C]], 2.0)
}

/// With `S = {1, 2}` and two units of budget left, the best policy gains
/// 1.6 from the empty observation but 2 after observing `Φ(0) = 0`.
fn not_policywise() -> Instance {
    let support: [(&[u16], f64); 3] = [(&[0, 1, 0], 0.4), (&[1, 0, 1], 0.4), (&[1, 1, 0], 0.2)];
    coverage_table(&support, [[B, A | C], [C, A], [C, C]], 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::utility::check_all;

    #[test]
    fn each_counterexample_fails_only_its_property() {
        for property in Property::ALL {
            let inst = counterexample(property);
            for report in check_all(&inst).unwrap() {
                assert_eq!(report.holds, report.property != property, "{property}: {report:?}");
                if let Some(w) = &report.witness {
                    let margin = w.recheck(&inst).unwrap();
                    assert!((margin - w.margin()).abs() < 1e-12 && margin > 1e-9);
                }
            }
        }
    }

    #[test]
    fn canonical_marginals() {
        let inst = canonical_uniform();
        let f: Vec<f64> = inst.items().map(|e| inst.expected_value(ItemSet::EMPTY.with(e))).collect();
        for (a, b) in f.iter().zip([1.5, 1.4, 1.4]) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
