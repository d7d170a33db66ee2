mod common;

use std::collections::BTreeSet;

use adastream::eval::{
    estimate_v, exhaustive_orders, expected_utility_exact, expected_utility_pool, PolicySpec, VMode,
};
use adastream::instances::{
    from_json_str, generate, instance_hash, to_json_string, CostProfile, Family, GeneratorSpec,
};
use adastream::model::{ArrivalOrder, Instance, ItemId, ItemSet};
use adastream::policies::{optimal_value, run_stream, PoolPolicySpec, StreamAlgorithm, StreamPolicySpec, VProvenance};
use common::{naive_marginal, TOL};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![Just(Family::Coverage), Just(Family::Viral), Just(Family::Versionspace), Just(Family::TableRandom)]
}

prop_compose! {
    fn instance()(family in family(), n in 2usize..=4, budget in 1u8..=3, knapsack in any::<bool>(), seed in 0u64..10_000)
        -> Instance {
        let mut spec = GeneratorSpec::new(family, n, 2, budget as f64, seed);
        if knapsack {
            spec = spec.with_costs(CostProfile::Random { min: 0.5, max: 2.0 });
        }
        generate(&spec).unwrap()
    }
}

fn as_set(bits: u64) -> BTreeSet<usize> {
    (0..64).filter(|i| bits >> i & 1 == 1).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn itemset_matches_btreeset(a in any::<u64>(), b in any::<u64>()) {
        let (x, y) = (ItemSet::from_bits(a), ItemSet::from_bits(b));
        let (sa, sb) = (as_set(a), as_set(b));
        prop_assert_eq!(as_set(x.union(y).bits()), &sa | &sb);
        prop_assert_eq!(as_set(x.intersection(y).bits()), &sa & &sb);
        prop_assert_eq!(as_set(x.difference(y).bits()), &sa - &sb);
        prop_assert_eq!(x.is_subset_of(y), sa.is_subset(&sb));
        prop_assert_eq!(x.len(), sa.len());
        prop_assert_eq!(x.iter().map(|e| e.0).collect::<Vec<_>>(), sa.into_iter().collect::<Vec<_>>());
    }

    #[test]
    fn prior_is_normalized(inst in instance()) {
        let total: f64 = inst.prior().probs().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(inst.prior().probs().iter().all(|&p| p > 0.0));
    }

    #[test]
    fn empty_observation_marginals_match_naive(inst in instance()) {
        let empty = adastream::model::PartialRealization::empty(inst.n());
        for e in inst.items() {
            let lib = adastream::utility::marginal_item(&inst, e, &empty).unwrap();
            prop_assert!((lib - naive_marginal(&inst, e.0, &[])).abs() < TOL);
        }
    }

    #[test]
    fn oracle_dominates_every_policy(inst in instance(), order_seed in any::<u64>()) {
        let opt = optimal_value(&inst).unwrap();
        for p in [PoolPolicySpec::DensityGreedy, PoolPolicySpec::BestSingleton, PoolPolicySpec::Empty] {
            prop_assert!(expected_utility_pool(&inst, &p).unwrap() <= opt + TOL);
        }
        let v = estimate_v(&inst, VMode::DensityGreedy).unwrap().v;
        let orders = exhaustive_orders(&inst).unwrap();
        let o = &orders[(order_seed % orders.len() as u64) as usize];
        for a in [StreamAlgorithm::ThresholdKnapsack, StreamAlgorithm::MixedSingleton] {
            let s = StreamPolicySpec::new(a, v, VProvenance::Manual).unwrap();
            prop_assert!(expected_utility_exact(&inst, &PolicySpec::Stream(s), o).unwrap() <= opt + TOL);
        }
    }

    #[test]
    fn stream_runs_respect_the_budget(inst in instance(), order_seed in any::<u64>(), phi_index in any::<prop::sample::Index>()) {
        let v = estimate_v(&inst, VMode::DensityGreedy).unwrap().v;
        let orders = exhaustive_orders(&inst).unwrap();
        let o: &ArrivalOrder = &orders[(order_seed % orders.len() as u64) as usize];
        let phi = &inst.prior().support()[phi_index.index(inst.prior().len())];
        let b = inst.budget();
        let run = |a| run_stream(&inst, &StreamPolicySpec::new(a, v, VProvenance::Manual).unwrap(), o, phi).unwrap();
        let k = run(StreamAlgorithm::ThresholdKnapsack);
        prop_assert!(k.total_cost() <= b + 1e-12);
        let plus = run(StreamAlgorithm::ThresholdKnapsackPlus);
        // π^{k+} extends π^k by at most one item.
        prop_assert!(k.selected_set().is_subset_of(plus.selected_set()));
        prop_assert!(plus.selected.len() <= k.selected.len() + 1);
        // Selections follow the arrival order.
        let pos = |e: ItemId| o.items().iter().position(|&x| x == e).unwrap();
        let picked = plus.selected_items();
        prop_assert!(picked.windows(2).all(|w| pos(w[0]) < pos(w[1])));
        if inst.costs().is_uniform() {
            let c = run(StreamAlgorithm::ThresholdUniform);
            prop_assert!(c.selected.len() as f64 <= b + 1e-12);
        }
    }

    #[test]
    fn json_round_trip_preserves_hash(inst in instance()) {
        let text = to_json_string(&inst);
        let back = from_json_str(&text).unwrap();
        prop_assert_eq!(instance_hash(&inst), instance_hash(&back));
        prop_assert_eq!(to_json_string(&back), text);
        prop_assert!((optimal_value(&back).unwrap() - optimal_value(&inst).unwrap()).abs() < 1e-12);
    }
}
