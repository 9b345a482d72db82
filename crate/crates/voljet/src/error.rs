//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum VoljetError {
    /// An input lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quoted price lies outside the attainable no-arbitrage band, so no
    /// implied volatility reproduces it.
    #[error("unattainable price {price} at (tau={tau}, kappa={kappa})")]
    UnattainablePrice { tau: f64, kappa: f64, price: f64 },

    /// A term structure violates one of its admissibility conditions.
    #[error("model invalid: {0}")]
    ModelInvalid(String),

    /// An API contract was violated (shape mismatch, nonuniform grid, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Non-finite values surfaced during numerical evaluation.
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, VoljetError>;
