use thiserror::Error;

use crate::model::ItemId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no support realization is consistent with the observation {0}")]
    ZeroProbabilityObservation(String),

    #[error("state space too large: {count} partial realizations exceed the cap of {cap}")]
    StateSpaceTooLarge { count: usize, cap: usize },

    #[error("{n} items exceed the exhaustive order cap of {cap} (use a sampled order strategy)")]
    TooManyOrders { n: usize, cap: usize },

    #[error("generator cap exceeded: {0}")]
    CapExceeded(String),

    #[error("realization {0} is not in the prior support")]
    UnknownRealization(String),

    #[error("item {item} has cost {cost}, the uniform-cost path requires every cost to be 1")]
    NonUniformCost { item: ItemId, cost: f64 },

    #[error("budget {0} is not a positive integer, required by the uniform-cost path")]
    NonIntegerBudget(f64),

    #[error("threshold value v must be positive and finite, got {0}")]
    InvalidThreshold(f64),

    #[error("alpha must lie in [0,1] and beta in [1,2], got alpha={alpha}, beta={beta}")]
    InvalidAlphaBeta { alpha: f64, beta: f64 },

    #[error("prior probabilities sum to {sum}, expected 1")]
    ProbabilityNotNormalized { sum: f64 },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidAlphaBeta { .. } | Error::Io { .. } => 2,
            Error::StateSpaceTooLarge { .. } | Error::TooManyOrders { .. } | Error::CapExceeded(_) => 3,
            _ => 4,
        }
    }
}
