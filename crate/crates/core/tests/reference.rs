//! Library policies against frozen canonical traces and the naive scans in
//! `common`.

mod common;

use adastream::eval::{estimate_v, exhaustive_orders, expected_utility_exact, PolicySpec, VMode};
use adastream::instances::fixtures;
use adastream::model::{ArrivalOrder, Realization};
use adastream::policies::{run_stream, StreamAlgorithm, StreamPolicySpec, VProvenance};
use common::*;

fn spec(algorithm: StreamAlgorithm, v: f64) -> StreamPolicySpec {
    StreamPolicySpec::new(algorithm, v, VProvenance::Manual).unwrap()
}

fn realization(bits: &str) -> Realization {
    let states: Vec<u16> = bits.bytes().map(|b| (b - b'0') as u16).collect();
    Realization::from_indices(&states)
}

fn selected(inst: &adastream::model::Instance, s: &StreamPolicySpec, order: &[usize], phi: &str) -> Vec<usize> {
    let order = ArrivalOrder::from_indices(order, inst.n()).unwrap();
    run_stream(inst, s, &order, &realization(phi)).unwrap().selected_items().iter().map(|e| e.0).collect()
}

const ALL_PHI: [&str; 8] = ["000", "001", "010", "011", "100", "101", "110", "111"];

#[test]
fn canonical_uniform_traces() {
    let inst = fixtures::canonical_uniform();
    let s = spec(StreamAlgorithm::ThresholdUniform, 2.9);
    let constant: [(&[usize], &[usize]); 4] =
        [(&[0, 2, 1], &[0, 2]), (&[1, 0, 2], &[1, 0]), (&[1, 2, 0], &[1, 2]), (&[2, 0, 1], &[2, 0])];
    for (order, expect) in constant {
        for phi in ALL_PHI {
            assert_eq!(selected(&inst, &s, order, phi), expect, "order {order:?} phi {phi}");
        }
    }
    // Order (0, 1, 2): the second pick depends on the state of item 0.
    for phi in ALL_PHI {
        let expect: &[usize] = if phi.starts_with('0') { &[0, 1] } else { &[0, 2] };
        assert_eq!(selected(&inst, &s, &[0, 1, 2], phi), expect);
    }
    // Order (2, 1, 0): item 1 is taken only when item 2 shows state 0.
    for phi in ALL_PHI {
        let expect: &[usize] = if phi.ends_with('0') { &[2, 1] } else { &[2, 0] };
        assert_eq!(selected(&inst, &s, &[2, 1, 0], phi), expect);
    }
}

#[test]
fn canonical_knapsack_traces() {
    let inst = fixtures::canonical_knapsack();
    let s = spec(StreamAlgorithm::ThresholdKnapsack, 2.55);
    let constant: [(&[usize], &[usize]); 5] =
        [(&[0, 1, 2], &[0, 1]), (&[0, 2, 1], &[0]), (&[1, 0, 2], &[1, 0]), (&[2, 0, 1], &[2]), (&[2, 1, 0], &[2])];
    for (order, expect) in constant {
        for phi in ALL_PHI {
            assert_eq!(selected(&inst, &s, order, phi), expect, "order {order:?} phi {phi}");
        }
    }
    for phi in ALL_PHI {
        let expect: &[usize] = if phi.as_bytes()[1] == b'1' { &[1, 0] } else { &[1] };
        assert_eq!(selected(&inst, &s, &[1, 2, 0], phi), expect);
    }
}

#[test]
fn canonical_expected_values() {
    let u = fixtures::canonical_uniform();
    let k = fixtures::canonical_knapsack();
    let pc = [2.9, 2.9, 2.55, 2.52, 2.9, 2.84];
    let pk = [2.55, 1.5, 2.55, 2.1, 1.4, 1.4];
    let pkp = [2.97, 2.9, 2.97, 2.52, 2.9, 2.52];
    let mix = [2.025, 1.5, 2.025, 1.8, 1.45, 1.45];
    let c = PolicySpec::Stream(spec(StreamAlgorithm::ThresholdUniform, 2.9));
    for (o, want) in exhaustive_orders(&u).unwrap().iter().zip(pc) {
        assert!((expected_utility_exact(&u, &c, o).unwrap() - want).abs() < TOL);
    }
    for (algorithm, table) in [
        (StreamAlgorithm::ThresholdKnapsack, pk),
        (StreamAlgorithm::ThresholdKnapsackPlus, pkp),
        (StreamAlgorithm::MixedSingleton, mix),
    ] {
        let p = PolicySpec::Stream(spec(algorithm, 2.55));
        for (o, want) in exhaustive_orders(&k).unwrap().iter().zip(table) {
            let got = expected_utility_exact(&k, &p, o).unwrap();
            assert!((got - want).abs() < TOL, "{algorithm:?} {o}: {got} vs {want}");
        }
    }
}

#[test]
fn library_scans_match_naive_scans() {
    let cases = [
        (uniform_suite(), VMode::Greedy, vec![(StreamAlgorithm::ThresholdUniform, Stream::Uniform)]),
        (
            knapsack_suite(),
            VMode::DensityGreedy,
            vec![
                (StreamAlgorithm::ThresholdKnapsack, Stream::Knapsack),
                (StreamAlgorithm::ThresholdKnapsackPlus, Stream::KnapsackPlus),
            ],
        ),
    ];
    for (suite, mode, pairs) in cases {
        for (name, inst) in suite.iter().filter(|(_, i)| i.n() <= 4) {
            let v = estimate_v(inst, mode).unwrap().v;
            for &(algorithm, kind) in &pairs {
                let p = PolicySpec::Stream(spec(algorithm, v));
                for o in exhaustive_orders(inst).unwrap() {
                    let lib = expected_utility_exact(inst, &p, &o).unwrap();
                    let naive = naive_stream_value(inst, kind, v, &o);
                    assert!((lib - naive).abs() < TOL, "{name} {algorithm:?} {o}: {lib} vs {naive}");
                }
            }
        }
    }
}

#[test]
fn mixed_is_average_of_its_branches() {
    for (name, inst) in knapsack_suite().iter().filter(|(_, i)| i.n() <= 4) {
        let v = estimate_v(inst, VMode::DensityGreedy).unwrap().v;
        let singleton = naive_best_singleton(inst);
        let p = PolicySpec::Stream(spec(StreamAlgorithm::MixedSingleton, v));
        for o in exhaustive_orders(inst).unwrap() {
            let want = 0.5 * (singleton + naive_stream_value(inst, Stream::Knapsack, v, &o));
            let got = expected_utility_exact(inst, &p, &o).unwrap();
            assert!((got - want).abs() < TOL, "{name} {o}");
        }
    }
}

#[test]
fn threshold_perturbation_changes_decision() {
    // Item 0 has marginal 1.5 from the empty observation; with B = 2 the
    // threshold is v / 4, so v = 6 sits exactly on it.
    let inst = fixtures::canonical_uniform();
    let at = selected(&inst, &spec(StreamAlgorithm::ThresholdUniform, 6.0), &[0, 1, 2], "000");
    assert_eq!(at.first(), Some(&0));
    let above = selected(&inst, &spec(StreamAlgorithm::ThresholdUniform, 6.0 + 1e-6), &[0, 1, 2], "000");
    assert!(!above.contains(&0));
}
