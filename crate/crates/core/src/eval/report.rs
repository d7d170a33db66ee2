use std::fmt::Write as _;

use serde::Serialize;

use super::{
    evaluate_orders, expected_utility_monte_carlo, mixed_bound, sampled_orders, uniform_bound, PolicySpec, VEstimate,
    ALPHA_GREEDY,
};
use crate::error::{Error, Result};
use crate::instances::instance_hash;
use crate::model::{ArrivalOrder, Instance, EPS};
use crate::policies::{optimal_value, PoolPolicySpec, StreamAlgorithm, VProvenance};

/// Which arrival orders a report covers.
#[derive(Debug, Clone, PartialEq)]
pub enum OrderSelection {
    Given(Vec<ArrivalOrder>),
    All,
    WorstSampled { count: usize, seed: u64 },
    Random { seed: u64 },
}

impl OrderSelection {
    fn label(&self) -> String {
        match self {
            OrderSelection::Given(_) => "given".into(),
            OrderSelection::All => "exhaustive".into(),
            OrderSelection::WorstSampled { count, .. } => format!("sampled:{count}"),
            OrderSelection::Random { .. } => "random".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EvalMode {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderValue {
    pub order: Vec<usize>,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Guarantee {
    /// Ratio bound against `f_avg(π*)`, when the policy has one.
    pub bound: Option<f64>,
    pub formula: &'static str,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    /// `certified`, `unverified bounds`, or `none`.
    pub status: &'static str,
    /// Whether `ratio ≥ bound − ε`.
    pub satisfied: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyDescriptor {
    pub algorithm: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_mode: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub instance_hash: String,
    pub policy: PolicyDescriptor,
    pub v_used: Option<f64>,
    pub v_provenance: Option<VProvenance>,
    pub order_search: String,
    pub per_order: Vec<OrderValue>,
    pub worst_order: Vec<usize>,
    pub worst_value: f64,
    pub oracle_value: f64,
    pub ratio: f64,
    pub guarantee: Guarantee,
    pub mode: EvalMode,
}

/// Evaluates `policy` over the selected orders and compares the worst
/// order against the exact optimum. `estimate` is the `v` the policy was
/// built with (pool policies may pass `None`).
pub fn evaluate(
    instance: &Instance,
    policy: &PolicySpec,
    estimate: Option<&VEstimate>,
    v_mode: Option<&'static str>,
    orders: &OrderSelection,
    mode: EvalMode,
) -> Result<EvaluationReport> {
    let n = instance.n();
    let order_list = match orders {
        OrderSelection::Given(list) if list.is_empty() => {
            return Err(Error::Config("--order given needs at least one permutation".into()))
        }
        OrderSelection::Given(list) => list.clone(),
        OrderSelection::All => super::exhaustive_orders(instance)?,
        OrderSelection::WorstSampled { count: 0, .. } => {
            return Err(Error::Config("worst-sampled needs at least one order".into()))
        }
        OrderSelection::WorstSampled { count, seed } => sampled_orders(n, *count, *seed),
        OrderSelection::Random { seed } => sampled_orders(n, 1, *seed),
    };
    let per_order: Vec<OrderValue> = match mode {
        EvalMode::Exact => evaluate_orders(instance, policy, &order_list)?
            .into_iter()
            .zip(&order_list)
            .map(|(value, o)| OrderValue { order: o.indices(), value, std_error: None })
            .collect(),
        EvalMode::MonteCarlo { samples, seed } => order_list
            .iter()
            .map(|o| {
                let mc = expected_utility_monte_carlo(instance, policy, o, samples, seed)?;
                Ok(OrderValue { order: o.indices(), value: mc.mean, std_error: Some(mc.std_error) })
            })
            .collect::<Result<_>>()?,
    };
    let mut worst = &per_order[0];
    for row in &per_order[1..] {
        if row.value < worst.value {
            worst = row;
        }
    }
    let oracle_value = optimal_value(instance)?;
    let ratio = if oracle_value > 0.0 { worst.value / oracle_value } else { 1.0 };
    let guarantee = guarantee_for(policy, estimate, oracle_value, ratio);
    let (v_used, v_provenance) = match policy {
        PolicySpec::Stream(s) => (Some(s.v), Some(s.v_provenance)),
        PolicySpec::Pool(_) => (estimate.map(|e| e.v), estimate.map(|e| e.provenance)),
    };
    let descriptor = PolicyDescriptor {
        algorithm: policy.name(),
        v: v_used,
        v_mode,
        seed: match policy {
            PolicySpec::Stream(s) if s.algorithm == StreamAlgorithm::MixedSingleton => Some(s.seed),
            _ => None,
        },
    };
    Ok(EvaluationReport {
        instance_hash: instance_hash(instance),
        policy: descriptor,
        v_used,
        v_provenance,
        order_search: orders.label(),
        worst_order: worst.order.clone(),
        worst_value: worst.value,
        per_order,
        oracle_value,
        ratio,
        guarantee,
        mode,
    })
}

fn guarantee_for(policy: &PolicySpec, estimate: Option<&VEstimate>, oracle_value: f64, ratio: f64) -> Guarantee {
    let none = |formula| Guarantee { bound: None, formula, alpha: None, beta: None, status: "none", satisfied: None };
    let (bound, formula, alpha, beta) = match policy {
        PolicySpec::Stream(s) => {
            let Some(est) = estimate else { return none("no v estimate") };
            match s.algorithm {
                StreamAlgorithm::ThresholdUniform => {
                    (uniform_bound(est.alpha, est.beta), "min{alpha/4, (2-beta)/4}", est.alpha, est.beta)
                }
                StreamAlgorithm::MixedSingleton => {
                    (mixed_bound(est.alpha, est.beta), "min{alpha/8, (2-beta)/8}", est.alpha, est.beta)
                }
                StreamAlgorithm::ThresholdKnapsack | StreamAlgorithm::ThresholdKnapsackPlus => {
                    return none("no standalone bound")
                }
            }
        }
        PolicySpec::Pool(PoolPolicySpec::AdaptiveGreedy) => (ALPHA_GREEDY, "1 - 1/e", 1.0, 1.0),
        PolicySpec::Pool(PoolPolicySpec::OptimalOracle) => (1.0, "1", 1.0, 1.0),
        PolicySpec::Pool(_) => return none("no standalone bound"),
    };
    let certified = match estimate.map(|e| e.provenance) {
        Some(VProvenance::Manual) => {
            let v = estimate.unwrap().v;
            alpha * oracle_value <= v + EPS && v <= beta * oracle_value + EPS
        }
        _ => true,
    };
    Guarantee {
        bound: Some(bound),
        formula,
        alpha: Some(alpha),
        beta: Some(beta),
        status: if certified { "certified" } else { "unverified bounds" },
        satisfied: Some(ratio >= bound - EPS),
    }
}

fn order_cell(order: &[usize]) -> String {
    order.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
}

fn opt_cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Columns `order,expected_utility[,std_error]`; one row per order (the
    /// permutation is space-separated), then footer rows keyed by name.
    pub fn to_csv(&self) -> String {
        let mc = matches!(self.mode, EvalMode::MonteCarlo { .. });
        let mut out = String::new();
        out.push_str(if mc { "order,expected_utility,std_error\n" } else { "order,expected_utility\n" });
        for row in &self.per_order {
            let _ = write!(out, "{},{}", order_cell(&row.order), row.value);
            if mc {
                let _ = write!(out, ",{}", opt_cell(row.std_error));
            }
            out.push('\n');
        }
        let mode = match self.mode {
            EvalMode::Exact => "exact".to_string(),
            EvalMode::MonteCarlo { samples, seed } => format!("monte_carlo samples={samples} seed={seed}"),
        };
        let footer = [
            ("worst", format!("{} ({})", self.worst_value, order_cell(&self.worst_order))),
            ("oracle", self.oracle_value.to_string()),
            ("ratio", self.ratio.to_string()),
            ("guarantee", format!("{} {}", opt_cell(self.guarantee.bound), self.guarantee.status)),
            ("v", opt_cell(self.v_used)),
            ("alpha", opt_cell(self.guarantee.alpha)),
            ("beta", opt_cell(self.guarantee.beta)),
            ("mode", mode),
        ];
        for (k, v) in footer {
            let _ = writeln!(out, "{k},{v}");
        }
        out
    }
}
