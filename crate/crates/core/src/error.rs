//! Error type shared by the engines.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The conductance-cumulant recurrence has a vanishing leading
    /// coefficient at this order; higher orders must come from the
    /// symbolic MGF series instead.
    #[error("recurrence-singular order: leading coefficient (2n+nu)^2 - l^2 vanishes at l = {order}")]
    RecurrenceSingular { order: i64 },

    #[error("joint recurrence needs conductance cumulants up to order {required}, only {available} available")]
    BoundaryDepth { required: usize, available: usize },

    #[error("internal consistency error: {0}")]
    Inconsistency(String),

    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),

    #[error("integration failure at z = {last_good_z}: {message}")]
    Integration { last_good_z: f64, message: String },

    #[error("evaluation outside stored grid: {0}")]
    OutOfRange(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("insufficient samples: need at least {required}, got {got}")]
    InsufficientSamples { required: usize, got: usize },
}
