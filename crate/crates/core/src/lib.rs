//! Adaptive submodular maximization over adversarially ordered streams.
//!
//! Items arrive one by one in an order chosen by an adversary. A policy
//! examines each arriving item once, observes the state of the items it
//! selects, and must respect a knapsack budget. The crate provides the
//! threshold policies for this setting, the offline greedy policies used to
//! calibrate their threshold, an exact dynamic-programming oracle for the
//! optimal offline policy, exhaustive checkers for the structural
//! properties the guarantees depend on, and exact or Monte Carlo evaluation
//! against the worst arrival order.
//!
//! ```
//! use adastream::instances::fixtures;
//! use adastream::policies::optimal_value;
//!
//! let inst = fixtures::canonical_uniform();
//! assert!((optimal_value(&inst).unwrap() - 2.9).abs() < 1e-12);
//! ```

pub mod cli;
pub mod error;
pub mod eval;
pub mod instances;
pub mod model;
pub mod policies;
pub mod utility;

pub use error::{Error, Result};
