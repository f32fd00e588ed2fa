use thiserror::Error;

use crate::schedule::Condition;

/// Errors surfaced by the library. Verification failures are generally
/// reported, not raised; errors are reserved for violated preconditions,
/// malformed inputs and refused oversize oracle calls.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid schedule: {condition}: {detail}")]
    InvalidSchedule { condition: Condition, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("integral data required: {0}")]
    NonIntegral(String),

    #[error("size guard exceeded: {dimension} is {value}, limit {limit}")]
    SizeGuard {
        dimension: &'static str,
        value: String,
        limit: String,
    },

    #[error("infeasible network: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
