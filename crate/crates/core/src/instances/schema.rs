//! The instance JSON format.
//!
//! ```json
//! {
//!   "items": [{"id": 0, "cost": 1.0}, {"id": 1, "cost": 2.0}],
//!   "num_states": 2,
//!   "prior": [{"states": [0, 1], "p": 0.25}, {"states": [1, 0], "p": 0.75}],
//!   "budget": 2.0,
//!   "utility": {"kind": "coverage", "universe": 3, "covers": [[[0], [0, 1]], [[], [2]]]},
//!   "arrival_orders": [[1, 0]]
//! }
//! ```
//!
//! Coverage and viral masks are written as sorted element lists. Table
//! utilities list every `(subset, realization index)` pair:
//! `{"kind": "table", "values": [{"subset": [0], "realization": 1, "f": 0.5}]}`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{ArrivalOrder, CostFunction, Instance, ItemSet, Prior, Realization};
use crate::utility::{Coverage, Edge, Utility, UtilityTable, Viral};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    items: Vec<ItemEntry>,
    num_states: usize,
    prior: Vec<PriorEntry>,
    budget: f64,
    utility: UtilitySpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    arrival_orders: Vec<Vec<usize>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ItemEntry {
    id: usize,
    cost: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PriorEntry {
    states: Vec<u16>,
    p: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum UtilitySpec {
    Coverage { universe: usize, covers: Vec<Vec<Vec<usize>>> },
    Viral { nodes: usize, edges: Vec<EdgeEntry>, reach: Vec<Vec<Vec<usize>>> },
    Versionspace,
    Table { values: Vec<TableEntry> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeEntry {
    from: usize,
    to: usize,
    p: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableEntry {
    subset: Vec<usize>,
    realization: usize,
    f: f64,
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema { path: path.into(), message: message.into() }
}

fn mask_to_list(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

fn list_to_mask(list: &[usize], width: usize, path: &str) -> Result<u64> {
    let mut mask = 0u64;
    for (k, &x) in list.iter().enumerate() {
        if x >= width.min(64) {
            return Err(schema(format!("{path}[{k}]"), format!("element {x} is outside 0..{width}")));
        }
        mask |= 1 << x;
    }
    Ok(mask)
}

fn masks_from_lists(lists: &[Vec<Vec<usize>>], width: usize, path: &str) -> Result<Vec<Vec<u64>>> {
    lists
        .iter()
        .enumerate()
        .map(|(e, per_state)| {
            per_state.iter().enumerate().map(|(s, l)| list_to_mask(l, width, &format!("{path}[{e}][{s}]"))).collect()
        })
        .collect()
}

fn to_file(instance: &Instance) -> InstanceFile {
    let items = instance.items().map(|e| ItemEntry { id: e.0, cost: instance.cost(e) }).collect();
    let prior = instance
        .prior()
        .iter()
        .map(|(phi, p)| PriorEntry { states: phi.states().iter().map(|s| s.0).collect(), p })
        .collect();
    let lists = |masks: &[Vec<u64>]| masks.iter().map(|m| m.iter().map(|&x| mask_to_list(x)).collect()).collect();
    let utility = match instance.utility() {
        Utility::Coverage(c) => UtilitySpec::Coverage { universe: c.universe, covers: lists(&c.covers) },
        Utility::Viral(v) => UtilitySpec::Viral {
            nodes: v.nodes,
            edges: v.edges.iter().map(|e| EdgeEntry { from: e.from, to: e.to, p: e.p }).collect(),
            reach: lists(&v.reach),
        },
        Utility::VersionSpace => UtilitySpec::Versionspace,
        Utility::Table(t) => UtilitySpec::Table {
            values: t
                .entries()
                .into_iter()
                .map(|(set, realization, f)| TableEntry { subset: set.iter().map(|e| e.0).collect(), realization, f })
                .collect(),
        },
    };
    InstanceFile {
        items,
        num_states: instance.num_states(),
        prior,
        budget: instance.budget(),
        utility,
        arrival_orders: instance.arrival_orders.iter().map(|o| o.indices()).collect(),
    }
}

fn from_file(file: InstanceFile) -> Result<Instance> {
    let n = file.items.len();
    for (k, item) in file.items.iter().enumerate() {
        if item.id != k {
            return Err(schema(format!("items[{k}].id"), format!("expected id {k}, got {}", item.id)));
        }
    }
    for (k, entry) in file.prior.iter().enumerate() {
        if entry.states.len() != n {
            return Err(schema(
                format!("prior[{k}].states"),
                format!("expected {n} states, got {}", entry.states.len()),
            ));
        }
    }
    let costs = CostFunction::new(file.items.iter().map(|i| i.cost).collect())?;
    let prior = Prior::new(file.prior.iter().map(|e| (Realization::from_indices(&e.states), e.p)).collect())?;
    let utility = match file.utility {
        UtilitySpec::Coverage { universe, covers } => {
            Utility::Coverage(Coverage { universe, covers: masks_from_lists(&covers, universe, "utility.covers")? })
        }
        UtilitySpec::Viral { nodes, edges, reach } => Utility::Viral(Viral {
            nodes,
            edges: edges.into_iter().map(|e| Edge { from: e.from, to: e.to, p: e.p }).collect(),
            reach: masks_from_lists(&reach, nodes, "utility.reach")?,
        }),
        UtilitySpec::Versionspace => Utility::VersionSpace,
        UtilitySpec::Table { values } => {
            let mut table = UtilityTable::new();
            for (k, entry) in values.iter().enumerate() {
                let bits = list_to_mask(&entry.subset, n, &format!("utility.values[{k}].subset"))?;
                if entry.realization >= prior.len() {
                    return Err(schema(
                        format!("utility.values[{k}].realization"),
                        format!("index {} is outside the {} prior entries", entry.realization, prior.len()),
                    ));
                }
                table.set(ItemSet::from_bits(bits), entry.realization, entry.f);
            }
            Utility::Table(table)
        }
    };
    let mut orders = Vec::with_capacity(file.arrival_orders.len());
    for (k, o) in file.arrival_orders.iter().enumerate() {
        orders
            .push(ArrivalOrder::from_indices(o, n).map_err(|e| schema(format!("arrival_orders[{k}]"), e.to_string()))?);
    }
    Instance::new(file.num_states, costs, prior, file.budget, utility)?.with_arrival_orders(orders)
}

pub fn from_json_str(text: &str) -> Result<Instance> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: InstanceFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(path, e.into_inner().to_string())
    })?;
    from_file(file)
}

/// Pretty-printed JSON; field order and table entry order are fixed.
pub fn to_json_string(instance: &Instance) -> String {
    serde_json::to_string_pretty(&to_file(instance)).expect("instance serialization cannot fail")
}

pub fn load(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    from_json_str(&text)
}

pub fn save(instance: &Instance, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = to_json_string(instance);
    text.push('\n');
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

/// Hex SHA-256 of the compact JSON form.
pub fn instance_hash(instance: &Instance) -> String {
    let bytes = serde_json::to_vec(&to_file(instance)).expect("instance serialization cannot fail");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}
