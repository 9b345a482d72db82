//! The dimensionless option-pricing layer.
//!
//! Prices are quoted relative to the dividend-adjusted spot, coordinates are
//! (tenor, log-forward-moneyness). [`bs`] holds the Black-Scholes side
//! (pricing, vega, implied-vol inversion); [`lb`] the additive-logistic
//! synthetic market; [`dataset`] grid generation and CSV I/O.

pub mod bs;
pub mod config;
pub mod dataset;
pub mod lb;

pub use bs::{bs_call, bs_otm, bs_put, bs_vega, implied_total_vol, to_moneyness, to_relative_price};
pub use config::{parse_term_structure, term_structure_to_config};
pub use dataset::{generate_dataset, ChainDataset, GridSpec, RelativeQuote};
pub use lb::{
    check_term_structure, lb_cdf, lb_dispersion_for_variance, lb_location, lb_moments, lb_pdf,
    lb_price, lb_tilted_cdf, lb_tilted_pdf, term_structure_eval, LbMarginal, LbTermStructure,
    TermCondition, TermViolation,
};
