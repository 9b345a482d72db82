//! Neural total-volatility representation: activations with derivatives
//! through third order, the shallow feedforward network, forward jet
//! recursions, and the hand-derived reverse pass.

pub mod activation;
pub mod network;

pub use activation::{ActivationKind, ActJet, HIDDEN_KINDS};
pub use network::{NetworkJet, ParamGrads, VolNetwork};
