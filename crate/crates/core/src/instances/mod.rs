//! Instance generators, pinned fixtures and JSON load/save.

pub mod fixtures;
mod generate;
mod schema;

pub use generate::{generate, CostProfile, Family, GeneratorSpec, MAX_VIRAL_EDGES};
pub use schema::{from_json_str, instance_hash, load, save, to_json_string};
