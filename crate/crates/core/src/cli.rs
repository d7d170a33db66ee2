//! Command-line front end. Exit codes: 0 success, 1 a verification
//! failed, 2 bad flags or configuration, 3 a cap was hit, 4 model error.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::eval::{
    estimate_v, evaluate, verify_lemma1, verify_proposition1, verify_theorem1, verify_theorem2, EvalMode,
    OrderSelection, PolicySpec, VEstimate, VMode, ALPHA_DENSITY_GREEDY, ALPHA_GREEDY,
};
use crate::instances::{self, CostProfile, Family, GeneratorSpec};
use crate::model::{ArrivalOrder, Instance, Limits, DEFAULT_MAX_ORDER_ITEMS, DEFAULT_MAX_PARTIALS};
use crate::policies::{best_singleton, optimal_value, PoolPolicySpec, StreamAlgorithm, StreamPolicySpec, VProvenance};
use crate::utility::{
    check_adaptive_monotone, check_adaptive_submodular, check_policywise, check_semi_policywise, Property,
    PropertyReport,
};

#[derive(Debug, Parser)]
#[command(name = "adastream", version, about = "Stream-based adaptive submodular maximization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads for order evaluation (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance and write it as JSON.
    Generate(GenerateArgs),
    /// Evaluate a policy over arrival orders against the exact optimum.
    Run(RunArgs),
    /// Run the property checkers and the guarantee checks.
    Verify(VerifyArgs),
    /// Print the offline quantities used to calibrate thresholds.
    Oracle(OracleArgs),
    /// Time the oracle and exhaustive order evaluation against n.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CostsArg {
    Uniform,
    Random,
}

#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// Instance JSON file.
    #[arg(long, conflicts_with = "generate")]
    pub instance: Option<PathBuf>,
    /// Generate an instance from a family instead of loading one.
    #[arg(long, value_name = "FAMILY")]
    pub generate: Option<String>,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub states: usize,
    #[arg(long, default_value_t = 2.0)]
    pub budget: f64,
    #[arg(long, value_enum, default_value = "uniform")]
    pub costs: CostsArg,
    #[arg(long, default_value_t = 0.5)]
    pub cost_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub cost_max: f64,
    /// Coverage universe size.
    #[arg(long)]
    pub universe: Option<usize>,
    /// Viral graph edge count.
    #[arg(long)]
    pub edges: Option<usize>,
    /// Support size for versionspace and random tables.
    #[arg(long)]
    pub support: Option<usize>,
    /// Property violated by a table_counterexample.
    #[arg(long)]
    pub property: Option<String>,
    /// Seed for generation, sampled orders, Monte Carlo and the mixed policy's coin.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cap on exhaustive order search (items).
    #[arg(long, default_value_t = DEFAULT_MAX_ORDER_ITEMS)]
    pub cap_orders: usize,
    /// Cap on oracle state-space size (partial realizations).
    #[arg(long, default_value_t = DEFAULT_MAX_PARTIALS)]
    pub cap_states: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VModeArg {
    Greedy,
    DensityGreedy,
    Exact,
    Manual,
}

#[derive(Debug, Clone, Args)]
pub struct VArgs {
    /// How to estimate the threshold numerator v (default: greedy for unit
    /// costs, density_greedy otherwise).
    #[arg(long, value_enum)]
    pub v_mode: Option<VModeArg>,
    /// v for --v-mode manual.
    #[arg(long)]
    pub v: Option<f64>,
    /// Claimed lower factor for a manual v.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Claimed upper factor for a manual v.
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long)]
    pub policy: String,
    #[command(flatten)]
    pub v: VArgs,
    /// given | all | worst-sampled:K | random
    #[arg(long, default_value = "all")]
    pub order: String,
    /// Arrival order for --order given, e.g. 2,0,1 (repeatable).
    #[arg(long)]
    pub permutation: Vec<String>,
    /// Monte Carlo samples per order (default: exact enumeration).
    #[arg(long)]
    pub samples: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Checks to skip (repeatable or comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub skip: Vec<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 6)]
    pub max_n: usize,
    #[arg(long, default_value = "coverage")]
    pub family: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` and runs the command. Returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return 2;
        }
        builder = builder.num_threads(t);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match pool.install(|| dispatch(&cli.command)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: &Command) -> Result<i32> {
    match command {
        Command::Generate(a) => cmd_generate(a),
        Command::Run(a) => cmd_run(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn generator_spec(a: &InstanceArgs, family: &str) -> Result<GeneratorSpec> {
    let family = Family::from_name(family).ok_or_else(|| config(format!("--generate: unknown family `{family}`")))?;
    let mut spec = GeneratorSpec::new(family, a.n, a.states, a.budget, a.seed);
    if a.costs == CostsArg::Random {
        spec.costs = CostProfile::Random { min: a.cost_min, max: a.cost_max };
    }
    spec.universe = a.universe;
    spec.edges = a.edges;
    spec.support = a.support;
    spec.property = match &a.property {
        None => None,
        Some(p) => Some(Property::from_name(p).ok_or_else(|| config(format!("--property: unknown property `{p}`")))?),
    };
    Ok(spec)
}

/// Loads or generates the instance and applies the caps.
pub fn load_instance(a: &InstanceArgs) -> Result<Instance> {
    let inst = match (&a.instance, &a.generate) {
        (Some(path), None) => instances::load(path)?,
        (None, Some(family)) => instances::generate(&generator_spec(a, family)?)?,
        (None, None) => return Err(config("one of --instance or --generate is required")),
        (Some(_), Some(_)) => return Err(config("--instance and --generate are mutually exclusive")),
    };
    Ok(inst.with_limits(Limits { max_partials: a.cap_states, max_order_items: a.cap_orders }))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source })
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|source| Error::Io { path: "<stdout>".into(), source })
        }
    }
}

fn to_json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn cmd_generate(a: &GenerateArgs) -> Result<i32> {
    if a.instance.instance.is_some() {
        return Err(config("generate takes --generate FAMILY, not --instance"));
    }
    let inst = load_instance(&a.instance)?;
    let mut text = instances::to_json_string(&inst);
    text.push('\n');
    emit(&a.out, &text)?;
    Ok(0)
}

fn parse_policy(name: &str) -> Result<std::result::Result<StreamAlgorithm, PoolPolicySpec>> {
    Ok(match name {
        "threshold_uniform" => Ok(StreamAlgorithm::ThresholdUniform),
        "threshold_knapsack" => Ok(StreamAlgorithm::ThresholdKnapsack),
        "threshold_knapsack_plus" => Ok(StreamAlgorithm::ThresholdKnapsackPlus),
        "mixed_singleton" => Ok(StreamAlgorithm::MixedSingleton),
        "pool_greedy" => Err(PoolPolicySpec::AdaptiveGreedy),
        "pool_density_greedy" => Err(PoolPolicySpec::DensityGreedy),
        "best_singleton" => Err(PoolPolicySpec::BestSingleton),
        "oracle" => Err(PoolPolicySpec::OptimalOracle),
        other => return Err(config(format!("--policy: unknown policy `{other}`"))),
    })
}

fn v_mode(inst: &Instance, v: &VArgs) -> Result<VMode> {
    let mode =
        v.v_mode.unwrap_or(if inst.cardinality_budget().is_ok() { VModeArg::Greedy } else { VModeArg::DensityGreedy });
    if mode != VModeArg::Manual && (v.v.is_some() || v.alpha.is_some() || v.beta.is_some()) {
        return Err(config("--v, --alpha and --beta require --v-mode manual"));
    }
    Ok(match mode {
        VModeArg::Greedy => VMode::Greedy,
        VModeArg::DensityGreedy => VMode::DensityGreedy,
        VModeArg::Exact => VMode::Exact,
        VModeArg::Manual => VMode::Manual {
            v: v.v.ok_or_else(|| config("--v-mode manual requires --v"))?,
            alpha: v.alpha.unwrap_or(0.0),
            beta: v.beta.unwrap_or(2.0),
        },
    })
}

fn parse_orders(a: &RunArgs, inst: &Instance) -> Result<OrderSelection> {
    let n = inst.n();
    Ok(match a.order.as_str() {
        "all" => {
            if n > inst.limits.max_order_items {
                return Err(Error::TooManyOrders { n, cap: inst.limits.max_order_items });
            }
            OrderSelection::All
        }
        "random" => OrderSelection::Random { seed: a.instance.seed },
        "given" => {
            let mut orders = Vec::new();
            for p in a.permutation.iter().filter(|p| !p.is_empty()) {
                let idx: Vec<usize> = p
                    .split(',')
                    .map(|x| {
                        x.trim().parse().map_err(|_| config(format!("--permutation: `{p}` is not a list of item ids")))
                    })
                    .collect::<Result<_>>()?;
                orders.push(ArrivalOrder::from_indices(&idx, n).map_err(|e| config(format!("--permutation: {e}")))?);
            }
            if orders.is_empty() {
                orders = inst.arrival_orders.clone();
            }
            if orders.is_empty() {
                return Err(config("--order given requires --permutation or arrival_orders in the instance"));
            }
            OrderSelection::Given(orders)
        }
        other => match other.strip_prefix("worst-sampled:") {
            Some(k) => {
                let count = k.parse().map_err(|_| config(format!("--order: bad sample count in `{other}`")))?;
                if count == 0 {
                    return Err(config("--order worst-sampled:K needs K ≥ 1"));
                }
                OrderSelection::WorstSampled { count, seed: a.instance.seed }
            }
            None => return Err(config(format!("--order: expected given|all|worst-sampled:K|random, got `{other}`"))),
        },
    })
}

fn cmd_run(a: &RunArgs) -> Result<i32> {
    let inst = load_instance(&a.instance)?;
    let policy = parse_policy(&a.policy)?;
    let orders = parse_orders(a, &inst)?;
    let mode = match a.samples {
        None => EvalMode::Exact,
        Some(0) => return Err(config("--samples must be at least 1")),
        Some(samples) => EvalMode::MonteCarlo { samples, seed: a.instance.seed },
    };
    let (spec, estimate, mode_name) = match policy {
        Ok(algorithm) => {
            if algorithm == StreamAlgorithm::ThresholdUniform {
                inst.cardinality_budget()?;
            }
            let vm = v_mode(&inst, &a.v)?;
            let est = estimate_v(&inst, vm)?;
            let spec = StreamPolicySpec::new(algorithm, est.v, est.provenance)?.with_seed(a.instance.seed);
            (PolicySpec::Stream(spec), Some(est), Some(vm.name()))
        }
        Err(pool) => {
            if pool == PoolPolicySpec::AdaptiveGreedy {
                inst.cardinality_budget()?;
            }
            match a.v.v_mode {
                Some(_) => {
                    let vm = v_mode(&inst, &a.v)?;
                    (PolicySpec::Pool(pool), Some(estimate_v(&inst, vm)?), Some(vm.name()))
                }
                None => (PolicySpec::Pool(pool), None, None),
            }
        }
    };
    let report = evaluate(&inst, &spec, estimate.as_ref(), mode_name, &orders, mode)?;
    let text = match a.output.format {
        Format::Json => {
            let mut s = report.to_json();
            s.push('\n');
            s
        }
        Format::Csv => report.to_csv(),
    };
    emit(&a.output.out, &text)?;
    Ok(0)
}

/// Names accepted by `verify --skip`.
pub const VERIFY_CHECKS: [&str; 9] = [
    "adaptive_monotone",
    "adaptive_submodular",
    "semi_policywise",
    "policywise",
    "proposition1",
    "proposition1_sum",
    "lemma1",
    "theorem1",
    "theorem2",
];

#[derive(Debug, Serialize)]
struct CheckOutcome {
    name: &'static str,
    /// pass | fail | skipped | not_applicable
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    slack: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<serde_json::Value>,
}

type Checker = fn(&Instance) -> Result<PropertyReport>;

fn property_outcome(name: &'static str, report: PropertyReport) -> CheckOutcome {
    CheckOutcome {
        name,
        status: if report.holds { "pass" } else { "fail" },
        slack: Some(report.tightest_slack),
        detail: Some(json!({
            "checked": report.checked,
            "witness": report.witness.as_ref().map(|w| json!({"text": w.to_string(), "data": w})),
        })),
    }
}

fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    for s in &a.skip {
        if !VERIFY_CHECKS.contains(&s.as_str()) {
            return Err(config(format!("--skip: unknown check `{s}` (expected one of {})", VERIFY_CHECKS.join(", "))));
        }
    }
    let inst = load_instance(&a.instance)?;
    let skipped = |name: &str| a.skip.iter().any(|s| s == name);
    let mut outcomes: Vec<CheckOutcome> = Vec::new();

    let checkers: [(&'static str, Checker); 4] = [
        ("adaptive_monotone", check_adaptive_monotone),
        ("adaptive_submodular", check_adaptive_submodular),
        ("semi_policywise", check_semi_policywise),
        ("policywise", check_policywise),
    ];
    let mut preconditions = true;
    for (name, check) in checkers {
        if skipped(name) {
            outcomes.push(CheckOutcome { name, status: "skipped", slack: None, detail: None });
            continue;
        }
        let report = check(&inst)?;
        if name != "policywise" {
            preconditions &= report.holds;
        }
        outcomes.push(property_outcome(name, report));
    }

    // the guarantees are only claimed on instances with the three properties
    let not_applicable = |name| CheckOutcome {
        name,
        status: "not_applicable",
        slack: None,
        detail: Some(json!("requires adaptive monotone, adaptive submodular and semi-policywise")),
    };
    let opt = optimal_value(&inst)?;
    let density = estimate_v(&inst, VMode::DensityGreedy)?;
    let bound = |name: &'static str, check: crate::eval::BoundCheck| CheckOutcome {
        name,
        status: if check.holds { "pass" } else { "fail" },
        slack: Some(check.slack),
        detail: Some(
            json!({"coefficient": check.coefficient, "target": check.target, "worst": check.worst, "rows": check.rows}),
        ),
    };

    let wants_prop1 = !skipped("proposition1") || !skipped("proposition1_sum");
    let prop1 = if preconditions && wants_prop1 { Some(verify_proposition1(&inst, density.v)?) } else { None };
    for (name, max_form) in [("proposition1", true), ("proposition1_sum", false)] {
        outcomes.push(if skipped(name) {
            CheckOutcome { name, status: "skipped", slack: None, detail: None }
        } else if let Some(r) = &prop1 {
            let (holds, slack) = if max_form { (r.holds_max, r.tightest_max) } else { (r.holds_sum, r.tightest_sum) };
            CheckOutcome {
                name,
                status: if holds { "pass" } else { "fail" },
                slack: Some(slack),
                detail: Some(json!({"v": r.v, "rows": r.rows})),
            }
        } else {
            not_applicable(name)
        });
    }

    let name = "lemma1";
    outcomes.push(if skipped(name) {
        CheckOutcome { name, status: "skipped", slack: None, detail: None }
    } else if preconditions {
        bound(name, verify_lemma1(&inst, &density, opt)?)
    } else {
        not_applicable(name)
    });

    let name = "theorem1";
    outcomes.push(if skipped(name) {
        CheckOutcome { name, status: "skipped", slack: None, detail: None }
    } else if inst.cardinality_budget().is_err() {
        CheckOutcome { name, status: "not_applicable", slack: None, detail: Some(json!("requires unit costs")) }
    } else if preconditions {
        bound(name, verify_theorem1(&inst, &estimate_v(&inst, VMode::Greedy)?, opt)?)
    } else {
        not_applicable(name)
    });

    let name = "theorem2";
    outcomes.push(if skipped(name) {
        CheckOutcome { name, status: "skipped", slack: None, detail: None }
    } else if preconditions {
        bound(name, verify_theorem2(&inst, &density, opt)?)
    } else {
        not_applicable(name)
    });

    let failed: Vec<&str> = outcomes.iter().filter(|o| o.status == "fail").map(|o| o.name).collect();
    for o in &outcomes {
        let mut line = format!("{:<20} {}", o.name, o.status);
        if let Some(w) = o.detail.as_ref().and_then(|d| d.get("witness")).and_then(|w| w.get("text")) {
            line.push_str(&format!("  witness: {}", w.as_str().unwrap_or_default()));
        }
        eprintln!("{line}");
    }
    let text = match a.output.format {
        Format::Json => to_json(&json!({
            "instance_hash": instances::instance_hash(&inst),
            "v_provenance": density.provenance,
            "v": density.v,
            "oracle_value": opt,
            "checks": outcomes,
            "failed": failed,
        })),
        Format::Csv => {
            let mut s = String::from("check,status,slack\n");
            for o in &outcomes {
                s.push_str(&format!(
                    "{},{},{}\n",
                    o.name,
                    o.status,
                    o.slack.map(|x| x.to_string()).unwrap_or_default()
                ));
            }
            s
        }
    };
    emit(&a.output.out, &text)?;
    Ok(if failed.is_empty() { 0 } else { 1 })
}

fn cmd_oracle(a: &OracleArgs) -> Result<i32> {
    let inst = load_instance(&a.instance)?;
    let opt = optimal_value(&inst)?;
    let (e_star, f_star) = best_singleton(&inst);
    let greedy = match inst.cardinality_budget() {
        Ok(_) => Some(estimate_v(&inst, VMode::Greedy)?.v),
        Err(_) => None,
    };
    let density: VEstimate = estimate_v(&inst, VMode::DensityGreedy)?;
    let gn = crate::eval::expected_utility_pool(&inst, &PoolPolicySpec::DensityGreedy)?;
    let ratio = |x: f64| if opt > 0.0 { x / opt } else { 1.0 };
    let rows = [
        ("oracle", Some(opt)),
        ("pool_greedy", greedy),
        ("pool_density_greedy", Some(gn)),
        ("best_singleton", Some(f_star)),
        ("density_greedy_v", Some(density.v)),
    ];
    let text = match a.output.format {
        Format::Json => to_json(&json!({
            "instance_hash": instances::instance_hash(&inst),
            "oracle_value": opt,
            "pool_greedy": greedy,
            "pool_density_greedy": gn,
            "best_singleton": {"item": e_star, "value": f_star},
            "estimates": {
                "greedy": greedy.map(|v| json!({
                    "v": v, "ratio": ratio(v), "alpha": ALPHA_GREEDY, "beta": 1.0,
                    "provenance": VProvenance::GreedyEstimate,
                })),
                "density_greedy": {
                    "v": density.v, "ratio": ratio(density.v), "alpha": ALPHA_DENSITY_GREEDY, "beta": 1.0,
                    "provenance": density.provenance,
                },
                "exact": {"v": opt, "ratio": 1.0, "alpha": 1.0, "beta": 1.0, "provenance": VProvenance::ExactOracle},
            },
        })),
        Format::Csv => {
            let mut s = String::from("quantity,value,ratio_to_oracle\n");
            for (k, v) in rows {
                if let Some(v) = v {
                    s.push_str(&format!("{k},{v},{}\n", ratio(v)));
                }
            }
            s
        }
    };
    emit(&a.output.out, &text)?;
    Ok(0)
}

fn cmd_bench(a: &BenchArgs) -> Result<i32> {
    let family =
        Family::from_name(&a.family).ok_or_else(|| config(format!("--family: unknown family `{}`", a.family)))?;
    let mut rows = Vec::new();
    for n in 1..=a.max_n {
        let spec = GeneratorSpec::new(family, n, 2, 2.0f64.min(n as f64), a.seed);
        let inst = instances::generate(&spec)?;
        let t = Instant::now();
        let opt = optimal_value(&inst)?;
        let oracle_s = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let est = estimate_v(&inst, VMode::DensityGreedy)?;
        let spec = StreamPolicySpec::new(StreamAlgorithm::ThresholdKnapsack, est.v, est.provenance)?;
        let orders = crate::eval::exhaustive_orders(&inst)?;
        crate::eval::evaluate_orders(&inst, &PolicySpec::Stream(spec), &orders)?;
        let orders_s = t.elapsed().as_secs_f64();
        rows.push(json!({
            "n": n, "support": inst.prior().len(), "orders": orders.len(),
            "oracle_value": opt, "oracle_seconds": oracle_s, "orders_seconds": orders_s,
        }));
    }
    emit(&a.out, &to_json(&rows))?;
    Ok(0)
}
