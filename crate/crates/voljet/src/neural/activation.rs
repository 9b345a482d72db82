//! Activation functions with derivatives through third order.
//!
//! Third derivatives are needed because the loss depends on `∂κκω̂`, whose
//! parameter gradient differentiates `A″` once more during the reverse pass.
//!
//! Conventions at the kink (all measure-zero, fixed for reproducibility):
//! `ReLU′(0)=0`, `ReLU″(0)=0`, `ReLU2″(0)=0`, `ReLU3‴(0)=0`, `ELU″(0)=1`.

use crate::error::{Result, VoljetError};
use crate::special::{logistic_cdf_raw, logistic_pdf_raw};

/// Hidden-layer activation choices, plus the fixed Softplus output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ActivationKind {
    Relu,
    /// `½((x)⁺)²`
    Relu2,
    /// `⅙((x)⁺)³`
    Relu3,
    Elu,
    Tanh,
    Softplus,
}

/// The five hidden-layer candidates, in sweep order.
pub const HIDDEN_KINDS: [ActivationKind; 5] = [
    ActivationKind::Relu,
    ActivationKind::Relu2,
    ActivationKind::Relu3,
    ActivationKind::Elu,
    ActivationKind::Tanh,
];

/// `(A, A′, A″, A‴)` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActJet {
    pub a: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl ActivationKind {
    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Relu => "relu",
            ActivationKind::Relu2 => "relu2",
            ActivationKind::Relu3 => "relu3",
            ActivationKind::Elu => "elu",
            ActivationKind::Tanh => "tanh",
            ActivationKind::Softplus => "softplus",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "relu" => Ok(ActivationKind::Relu),
            "relu2" => Ok(ActivationKind::Relu2),
            "relu3" => Ok(ActivationKind::Relu3),
            "elu" => Ok(ActivationKind::Elu),
            "tanh" => Ok(ActivationKind::Tanh),
            "softplus" => Ok(ActivationKind::Softplus),
            other => Err(VoljetError::ModelInvalid(format!(
                "unknown activation `{other}` (expected relu, relu2, relu3, elu, tanh, softplus)"
            ))),
        }
    }

    /// Evaluates the activation and its first three derivatives.
    pub fn eval(self, x: f64) -> ActJet {
        match self {
            ActivationKind::Relu => {
                if x > 0.0 {
                    ActJet { a: x, d1: 1.0, d2: 0.0, d3: 0.0 }
                } else {
                    ActJet { a: 0.0, d1: 0.0, d2: 0.0, d3: 0.0 }
                }
            }
            ActivationKind::Relu2 => {
                if x > 0.0 {
                    ActJet { a: 0.5 * x * x, d1: x, d2: 1.0, d3: 0.0 }
                } else {
                    ActJet { a: 0.0, d1: 0.0, d2: 0.0, d3: 0.0 }
                }
            }
            ActivationKind::Relu3 => {
                if x > 0.0 {
                    ActJet {
                        a: x * x * x / 6.0,
                        d1: 0.5 * x * x,
                        d2: x,
                        d3: 1.0,
                    }
                } else {
                    ActJet { a: 0.0, d1: 0.0, d2: 0.0, d3: 0.0 }
                }
            }
            ActivationKind::Elu => {
                if x > 0.0 {
                    ActJet { a: x, d1: 1.0, d2: 0.0, d3: 0.0 }
                } else {
                    let e = x.exp();
                    ActJet { a: e - 1.0, d1: e, d2: e, d3: e }
                }
            }
            ActivationKind::Tanh => {
                let t = x.tanh();
                let s = 1.0 - t * t; // sech²x
                ActJet {
                    a: t,
                    d1: s,
                    d2: -2.0 * t * s,
                    d3: -2.0 * s * (s - 2.0 * t * t),
                }
            }
            ActivationKind::Softplus => {
                // A = ln(1+eˣ); A′ = Φ_L(x); A″ = φ_L(x); A‴ = φ_L(x)(1−2Φ_L(x))
                let cdf = logistic_cdf_raw(x);
                let pdf = logistic_pdf_raw(x);
                let a = if x > 0.0 {
                    x + (-x).exp().ln_1p()
                } else {
                    x.exp().ln_1p()
                };
                ActJet {
                    a,
                    d1: cdf,
                    d2: pdf,
                    d3: pdf * (1.0 - 2.0 * cdf),
                }
            }
        }
    }
}
