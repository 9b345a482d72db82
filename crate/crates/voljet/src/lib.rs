//! Arbitrage-free neural representation of option implied volatility and
//! implied risk-neutral density.
//!
//! The crate is organized around six layers:
//!
//! - [`special`] — scalar special functions (normal/logistic/beta/polygamma);
//! - [`market`] — the dimensionless pricing layer: Black-Scholes and the
//!   additive-logistic synthetic market, implied-vol inversion, dataset
//!   generation;
//! - [`parity`] — the density–volatility correctors ζ/ξ, implied CDF/PDF
//!   recovery from a total-volatility jet, static-arbitrage errors, and a
//!   finite-difference parity audit;
//! - [`neural`] — a shallow feedforward net for the total implied volatility
//!   with exact analytic input derivatives and a hand-derived reverse pass;
//! - [`training`] — losses, Adam, and the mini-batch training loop;
//! - [`sweep`] / [`report`] — experiment orchestration and figure-data CSVs.
//!
//! See the crate `examples/` directory for one runnable example per major
//! capability.

pub mod error;
pub mod market;
pub mod neural;
pub mod parity;
pub mod quad;
pub mod report;
pub mod seed;
pub mod special;
pub mod sweep;
pub mod training;

pub use error::{Result, VoljetError};
