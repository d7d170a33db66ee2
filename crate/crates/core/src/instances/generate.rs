use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fixtures;
use crate::error::{Error, Result};
use crate::model::{CostFunction, Instance, ItemSet, Prior, Realization};
use crate::utility::{Coverage, Edge, Property, Utility, UtilityTable, Viral};

/// Largest number of edges in a generated viral-marketing graph (the prior
/// enumerates all `2^edges` live-edge graphs).
pub const MAX_VIRAL_EDGES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Coverage,
    Viral,
    Versionspace,
    TableRandom,
    TableCounterexample,
}

impl Family {
    pub fn from_name(name: &str) -> Option<Family> {
        Some(match name {
            "coverage" => Family::Coverage,
            "viral" => Family::Viral,
            "versionspace" => Family::Versionspace,
            "table_random" => Family::TableRandom,
            "table_counterexample" => Family::TableCounterexample,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostProfile {
    Uniform,
    /// Costs drawn from `[min, min(max, B)]` on a grid of 0.25.
    Random {
        min: f64,
        max: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: usize,
    pub num_states: usize,
    pub budget: f64,
    pub costs: CostProfile,
    pub seed: u64,
    /// Coverage universe size (default `n + 2`).
    #[serde(default)]
    pub universe: Option<usize>,
    /// Viral graph edge count (default `min(n(n−1), 5)`).
    #[serde(default)]
    pub edges: Option<usize>,
    /// Number of support realizations for versionspace and random tables
    /// (default `min(num_states^n, 16)`).
    #[serde(default)]
    pub support: Option<usize>,
    #[serde(default = "default_max_support")]
    pub max_support: usize,
    /// Which property the counterexample table should violate.
    #[serde(default)]
    pub property: Option<Property>,
}

fn default_max_support() -> usize {
    64
}

impl GeneratorSpec {
    pub fn new(family: Family, n: usize, num_states: usize, budget: f64, seed: u64) -> Self {
        GeneratorSpec {
            family,
            n,
            num_states,
            budget,
            costs: CostProfile::Uniform,
            seed,
            universe: None,
            edges: None,
            support: None,
            max_support: default_max_support(),
            property: None,
        }
    }

    pub fn with_costs(mut self, costs: CostProfile) -> Self {
        self.costs = costs;
        self
    }
}

/// Builds a random instance. The same spec always yields the same instance.
pub fn generate(spec: &GeneratorSpec) -> Result<Instance> {
    if spec.family == Family::TableCounterexample {
        let property =
            spec.property.ok_or_else(|| Error::Config("table_counterexample needs a property to violate".into()))?;
        return Ok(fixtures::counterexample(property));
    }
    if spec.n == 0 || spec.n > 16 {
        return Err(Error::CapExceeded(format!("generators support 1..=16 items, got {}", spec.n)));
    }
    if spec.num_states == 0 {
        return Err(Error::Config("num_states must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let costs = draw_costs(spec, &mut rng)?;
    let (num_states, prior, utility) = match spec.family {
        Family::Coverage => coverage(spec, &mut rng)?,
        Family::Viral => viral(spec, &mut rng)?,
        Family::Versionspace => {
            let prior = dependent_prior(spec, &mut rng)?;
            (spec.num_states, prior, Utility::VersionSpace)
        }
        Family::TableRandom => {
            let prior = dependent_prior(spec, &mut rng)?;
            let table = monotone_table(spec.n, prior.len(), &mut rng);
            (spec.num_states, prior, Utility::Table(table))
        }
        Family::TableCounterexample => unreachable!(),
    };
    Instance::new(num_states, costs, prior, spec.budget, utility)
}

fn draw_costs(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Result<CostFunction> {
    match spec.costs {
        CostProfile::Uniform => Ok(CostFunction::uniform(spec.n)),
        CostProfile::Random { min, max } => {
            let hi = max.min(spec.budget);
            if !(min > 0.0 && min <= hi) {
                return Err(Error::Config(format!("cost range [{min}, {max}] is empty under budget {}", spec.budget)));
            }
            let lo_step = (min * 4.0).ceil() as u32;
            let hi_step = ((hi * 4.0).floor() as u32).max(lo_step);
            CostFunction::new((0..spec.n).map(|_| rng.gen_range(lo_step..=hi_step) as f64 / 4.0).collect())
        }
    }
}

fn support_size_cap(spec: &GeneratorSpec, size: u128) -> Result<()> {
    if size > spec.max_support as u128 {
        return Err(Error::CapExceeded(format!(
            "support of {size} realizations exceeds the cap of {}",
            spec.max_support
        )));
    }
    Ok(())
}

/// Decodes `index` as a base-`k` number with item 0 most significant.
fn realization_from_index(mut index: usize, n: usize, k: usize) -> Realization {
    let mut states = vec![0u16; n];
    for slot in states.iter_mut().rev() {
        *slot = (index % k) as u16;
        index /= k;
    }
    Realization::from_indices(&states)
}

/// Independent states with random marginals.
fn product_prior(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Result<Prior> {
    let (n, k) = (spec.n, spec.num_states);
    support_size_cap(spec, (k as u128).pow(n as u32))?;
    let marginals: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
            let total: f64 = w.iter().sum();
            w.into_iter().map(|x| x / total).collect()
        })
        .collect();
    let entries = (0..k.pow(n as u32))
        .map(|i| {
            let phi = realization_from_index(i, n, k);
            let p = phi.states().iter().enumerate().map(|(e, s)| marginals[e][s.index()]).product();
            (phi, p)
        })
        .collect();
    Prior::new(entries)
}

/// A random joint table over `support` distinct realizations.
fn dependent_prior(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Result<Prior> {
    let (n, k) = (spec.n, spec.num_states);
    let total = (k as u128).pow(n as u32);
    let size = spec.support.unwrap_or_else(|| total.min(16) as usize);
    support_size_cap(spec, size as u128)?;
    if size == 0 || size as u128 > total {
        return Err(Error::Config(format!("support size {size} must lie in 1..={total}")));
    }
    let mut indices: Vec<usize> = if total <= 4096 {
        let mut all: Vec<usize> = (0..total as usize).collect();
        all.shuffle(rng);
        all.truncate(size);
        all
    } else {
        let mut chosen = std::collections::BTreeSet::new();
        while chosen.len() < size {
            chosen.insert(rng.gen_range(0..total as usize));
        }
        chosen.into_iter().collect()
    };
    indices.sort_unstable();
    let weights: Vec<f64> = indices.iter().map(|_| rng.gen_range(0.2..1.0)).collect();
    let mass: f64 = weights.iter().sum();
    Prior::new(indices.into_iter().zip(weights).map(|(i, w)| (realization_from_index(i, n, k), w / mass)).collect())
}

fn coverage(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Result<(usize, Prior, Utility)> {
    let universe = spec.universe.unwrap_or(spec.n + 2);
    if universe == 0 || universe > 64 {
        return Err(Error::CapExceeded(format!("coverage universe of {universe} elements (1..=64 supported)")));
    }
    let prior = product_prior(spec, rng)?;
    let covers = (0..spec.n)
        .map(|_| {
            (0..spec.num_states)
                .map(|_| (0..universe).filter(|_| rng.gen_bool(0.4)).fold(0u64, |m, x| m | 1 << x))
                .collect()
        })
        .collect();
    Ok((spec.num_states, prior, Utility::Coverage(Coverage { universe, covers })))
}

/// Independent cascade on a random graph with full-adoption feedback. Each
/// item is a seed node, and its state indexes the set of nodes it reaches
/// over live edges. The state count is whatever the graph needs.
fn viral(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Result<(usize, Prior, Utility)> {
    let n = spec.n;
    let possible = n * (n - 1);
    let m = spec.edges.unwrap_or(possible.min(5));
    if m > MAX_VIRAL_EDGES || m > possible {
        return Err(Error::CapExceeded(format!(
            "{m} edges requested; at most {} fit on {n} nodes with the cap of {MAX_VIRAL_EDGES}",
            possible.min(MAX_VIRAL_EDGES)
        )));
    }
    let mut pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b))).collect();
    pairs.shuffle(rng);
    pairs.truncate(m);
    pairs.sort_unstable();
    let edges: Vec<Edge> =
        pairs.into_iter().map(|(from, to)| Edge { from, to, p: rng.gen_range(1..=4) as f64 / 5.0 }).collect();

    // reach masks per live-edge graph
    let mut outcomes: Vec<(Vec<u64>, f64)> = Vec::with_capacity(1 << m);
    for live in 0..(1u32 << m) {
        let mut p = 1.0;
        let mut adj = vec![0u64; n];
        for (j, edge) in edges.iter().enumerate() {
            if live >> j & 1 == 1 {
                p *= edge.p;
                adj[edge.from] |= 1 << edge.to;
            } else {
                p *= 1.0 - edge.p;
            }
        }
        let reach = (0..n)
            .map(|s| {
                let mut seen = 1u64 << s;
                let mut frontier = seen;
                while frontier != 0 {
                    let next = ItemSet::from_bits(frontier).iter().fold(0, |acc, v| acc | adj[v.0]) & !seen;
                    seen |= next;
                    frontier = next;
                }
                seen
            })
            .collect();
        outcomes.push((reach, p));
    }
    let mut masks: Vec<Vec<u64>> = (0..n)
        .map(|e| {
            let mut ms: Vec<u64> = outcomes.iter().map(|(r, _)| r[e]).collect();
            ms.sort_unstable();
            ms.dedup();
            ms
        })
        .collect();
    let num_states = masks.iter().map(Vec::len).max().unwrap_or(1);
    let mut joint: BTreeMap<Vec<u16>, f64> = BTreeMap::new();
    for (reach, p) in &outcomes {
        let states: Vec<u16> = (0..n).map(|e| masks[e].binary_search(&reach[e]).unwrap() as u16).collect();
        *joint.entry(states).or_insert(0.0) += p;
    }
    support_size_cap(spec, joint.len() as u128)?;
    for (e, ms) in masks.iter_mut().enumerate() {
        ms.resize(num_states, 1 << e);
    }
    let prior = Prior::new(joint.into_iter().map(|(s, p)| (Realization::from_indices(&s), p)).collect())?;
    Ok((num_states, prior, Utility::Viral(Viral { nodes: n, edges, reach: masks })))
}

/// Random values made monotone by a running maximum over subsets.
fn monotone_table(n: usize, support: usize, rng: &mut ChaCha8Rng) -> UtilityTable {
    let mut table = UtilityTable::new();
    for idx in 0..support {
        let mut values = vec![0.0f64; 1 << n];
        for bits in 1..(1u64 << n) {
            let set = ItemSet::from_bits(bits);
            let below = set.iter().map(|e| values[set.without(e).bits() as usize]).fold(0.0, f64::max);
            values[bits as usize] = below.max((rng.gen_range(0..=40) as f64) / 10.0);
        }
        for (bits, v) in values.into_iter().enumerate() {
            table.set(ItemSet::from_bits(bits as u64), idx, v);
        }
    }
    table
}
