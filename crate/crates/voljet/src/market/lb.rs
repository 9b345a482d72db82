//! The additive-logistic synthetic market.
//!
//! Every marginal of the return is logistic-beta `LB(μ, ς, α, β)`: a standard
//! logistic variable pushed through a beta tilt, located and scaled. The
//! exponential (Esscher) tilt shifts the shape pair `(α, β) → (α+ς, β−ς)`,
//! which is what makes closed-form pricing possible. The location is pinned
//! by martingality: `E[e^X] = e^μ · B(α+ς, β−ς)/B(α, β)` must equal one, so
//! `μ = log B(α, β) − log B(α+ς, β−ς)`.

use crate::error::{Result, VoljetError};
use crate::special::{
    log_beta, logistic_cdf_raw, reg_inc_beta_raw, polygamma_raw, Probability,
};

/// One marginal: location, dispersion, right tail, left tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LbMarginal {
    pub mu: f64,
    pub dispersion: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl LbMarginal {
    pub fn new(dispersion: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !(dispersion > 0.0) || !(alpha > 0.0) || !(beta > dispersion) {
            return Err(VoljetError::ModelInvalid(format!(
                "marginal requires 0 < dispersion < beta and alpha > 0, \
                 got (dispersion={dispersion}, alpha={alpha}, beta={beta})"
            )));
        }
        let mu = lb_location(dispersion, alpha, beta)?;
        Ok(LbMarginal {
            mu,
            dispersion,
            alpha,
            beta,
        })
    }

    #[inline]
    fn pivot(&self, x: f64) -> f64 {
        (x - self.mu) / self.dispersion
    }
}

/// Martingale location `μ = ln B(α, β) − ln B(α+ς, β−ς)`.
pub fn lb_location(dispersion: f64, alpha: f64, beta: f64) -> Result<f64> {
    if !(dispersion >= 0.0) || !(alpha > 0.0) || !(beta > dispersion) {
        return Err(VoljetError::Domain(format!(
            "lb_location requires 0 <= dispersion < beta, alpha > 0, \
             got ({dispersion}, {alpha}, {beta})"
        )));
    }
    if dispersion == 0.0 {
        return Ok(0.0);
    }
    Ok(log_beta(alpha, beta)? - log_beta(alpha + dispersion, beta - dispersion)?)
}

/// Log of the standard logistic-beta density at pivot `z` with shapes (a, b).
#[inline]
fn ln_phi_lb(z: f64, a: f64, b: f64, ln_b_ab: f64) -> f64 {
    // ln φ_L = z − 2·softplus(z); ln Φ_L = −softplus(−z); ln(1−Φ_L) = −softplus(z)
    let sp = softplus(z);
    let sm = softplus(-z);
    (z - 2.0 * sp) - (a - 1.0) * sm - (b - 1.0) * sp - ln_b_ab
}

#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Risk-neutral density `ψ_LB(x) = φ_LB((x−μ)/ς; α, β) / ς`.
pub fn lb_pdf(x: f64, m: &LbMarginal) -> f64 {
    let ln_b = log_beta(m.alpha, m.beta).expect("marginal invariant");
    (ln_phi_lb(m.pivot(x), m.alpha, m.beta, ln_b)).exp() / m.dispersion
}

/// Tilted density `ψ̃_LB(x) = e^x ψ_LB(x)`, evaluated with the shifted shapes.
pub fn lb_tilted_pdf(x: f64, m: &LbMarginal) -> f64 {
    let (a, b) = (m.alpha + m.dispersion, m.beta - m.dispersion);
    let ln_b = log_beta(a, b).expect("marginal invariant");
    (ln_phi_lb(m.pivot(x), a, b, ln_b)).exp() / m.dispersion
}

/// Risk-neutral CDF `Ψ_LB(x) = I_{Φ_L(z)}(α, β)`.
pub fn lb_cdf(x: f64, m: &LbMarginal) -> Probability {
    let u = logistic_cdf_raw(m.pivot(x));
    Probability::new_clamped(reg_inc_beta_raw(u, m.alpha, m.beta))
}

/// Tilted CDF with shapes `(α+ς, β−ς)`.
pub fn lb_tilted_cdf(x: f64, m: &LbMarginal) -> Probability {
    let u = logistic_cdf_raw(m.pivot(x));
    Probability::new_clamped(reg_inc_beta_raw(u, m.alpha + m.dispersion, m.beta - m.dispersion))
}

/// First four central moments: (mean, variance, skewness, excess kurtosis).
pub fn lb_moments(m: &LbMarginal) -> (f64, f64, f64, f64) {
    let (a, b, s) = (m.alpha, m.beta, m.dispersion);
    let tri = polygamma_raw(1, a) + polygamma_raw(1, b);
    let mean = s * (polygamma_raw(0, a) - polygamma_raw(0, b)) + m.mu;
    let var = s * s * tri;
    let skew = (polygamma_raw(2, a) - polygamma_raw(2, b)) / tri.powf(1.5);
    let kurt = (polygamma_raw(3, a) + polygamma_raw(3, b)) / (tri * tri);
    (mean, var, skew, kurt)
}

/// Dispersion that hits a target variance: `ς = (V / (ψ'(α)+ψ'(β)))^{1/2}`.
pub fn lb_dispersion_for_variance(target_variance: f64, alpha: f64, beta: f64) -> Result<f64> {
    if !(target_variance > 0.0) || !(alpha > 0.0) || !(beta > 0.0) {
        return Err(VoljetError::Domain(format!(
            "requires V, alpha, beta > 0, got ({target_variance}, {alpha}, {beta})"
        )));
    }
    Ok((target_variance / (polygamma_raw(1, alpha) + polygamma_raw(1, beta))).sqrt())
}

// ---------------------------------------------------------------------------
// Term structure
// ---------------------------------------------------------------------------

/// Parameter curves `ς(τ) = ς₀ τ^{h₀}`, `α(τ) = α₁ + (α₀−α₁)/(1+ς)`,
/// `β(τ) = β₁ + (β₀−β₁)/(1+ς) + ς`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LbTermStructure {
    pub sigma0: f64,
    pub h0: f64,
    pub alpha0: f64,
    pub alpha1: f64,
    pub beta0: f64,
    pub beta1: f64,
}

impl LbTermStructure {
    /// The left-skewed reference parameterization used throughout the
    /// experiments: ς₀=0.15, h₀=0.5, α₀=0.5, α₁=1, β₀=1, β₁=1.
    pub fn reference() -> Self {
        LbTermStructure {
            sigma0: 0.15,
            h0: 0.5,
            alpha0: 0.5,
            alpha1: 1.0,
            beta0: 1.0,
            beta1: 1.0,
        }
    }

    pub fn dispersion(&self, tau: f64) -> f64 {
        self.sigma0 * tau.powf(self.h0)
    }

    pub fn alpha(&self, tau: f64) -> f64 {
        self.alpha1 + (self.alpha0 - self.alpha1) / (1.0 + self.dispersion(tau))
    }

    pub fn beta(&self, tau: f64) -> f64 {
        let s = self.dispersion(tau);
        self.beta1 + (self.beta0 - self.beta1) / (1.0 + s) + s
    }
}

/// Evaluates the marginal at `τ`, enforcing the marginal invariants.
pub fn term_structure_eval(tau: f64, ts: &LbTermStructure) -> Result<LbMarginal> {
    if !(tau > 0.0) {
        return Err(VoljetError::Domain(format!("tenor must be > 0, got {tau}")));
    }
    LbMarginal::new(ts.dispersion(tau), ts.alpha(tau), ts.beta(tau))
}

/// The four admissibility conditions on the parameter curves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermCondition {
    /// (i) ς(τ) < β(τ)
    DispersionBelowBeta,
    /// (ii) α(τ) > 0 and β(τ) > 0
    PositiveShapes,
    /// (iii) ς nondecreasing with ς(0) = 0
    DispersionNondecreasing,
    /// (iv) α/ς and β/ς nonincreasing
    ShapeRatiosNonincreasing,
}

impl std::fmt::Display for TermCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TermCondition::DispersionBelowBeta => "(i) dispersion < beta",
            TermCondition::PositiveShapes => "(ii) alpha, beta > 0",
            TermCondition::DispersionNondecreasing => {
                "(iii) dispersion nondecreasing with value 0 at tenor 0"
            }
            TermCondition::ShapeRatiosNonincreasing => "(iv) alpha/dispersion and beta/dispersion nonincreasing",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct TermViolation {
    pub condition: TermCondition,
    pub tau: f64,
    pub detail: String,
}

/// Evaluates conditions (i)–(iv) on a dense tenor grid. An empty report
/// means the term structure is admissible on the range.
pub fn check_term_structure(
    ts: &LbTermStructure,
    tau_min: f64,
    tau_max: f64,
    step: f64,
) -> Result<Vec<TermViolation>> {
    if !(tau_min > 0.0) || !(tau_max > tau_min) || !(step > 0.0) {
        return Err(VoljetError::Domain(format!(
            "invalid check range ({tau_min}, {tau_max}, {step})"
        )));
    }
    let mut violations = Vec::new();
    let n = ((tau_max - tau_min) / step).round() as usize + 1;
    let mut prev: Option<(f64, f64, f64, f64)> = None; // (s, a/s, b/s, tau)
    // ς(0) = 0 needs ς₀·0^{h₀} = 0, i.e. h₀ > 0 (any ς₀) or ς₀ = 0.
    if ts.h0 <= 0.0 && ts.sigma0 != 0.0 {
        violations.push(TermViolation {
            condition: TermCondition::DispersionNondecreasing,
            tau: 0.0,
            detail: format!("dispersion at tenor 0 is {} != 0", ts.sigma0),
        });
    }
    for i in 0..n {
        let tau = tau_min + i as f64 * step;
        let s = ts.dispersion(tau);
        let a = ts.alpha(tau);
        let b = ts.beta(tau);
        if !(a > 0.0) || !(b > 0.0) {
            violations.push(TermViolation {
                condition: TermCondition::PositiveShapes,
                tau,
                detail: format!("alpha={a}, beta={b}"),
            });
        }
        if !(s < b) {
            violations.push(TermViolation {
                condition: TermCondition::DispersionBelowBeta,
                tau,
                detail: format!("dispersion={s} >= beta={b}"),
            });
        }
        if let Some((s_prev, as_prev, bs_prev, tau_prev)) = prev {
            if s < s_prev - 1e-14 {
                violations.push(TermViolation {
                    condition: TermCondition::DispersionNondecreasing,
                    tau,
                    detail: format!("dispersion fell from {s_prev} at tau={tau_prev} to {s}"),
                });
            }
            let (a_s, b_s) = (a / s, b / s);
            if a_s > as_prev + 1e-12 || b_s > bs_prev + 1e-12 {
                violations.push(TermViolation {
                    condition: TermCondition::ShapeRatiosNonincreasing,
                    tau,
                    detail: format!(
                        "alpha/dispersion {as_prev}->{a_s}, beta/dispersion {bs_prev}->{b_s}"
                    ),
                });
            }
        }
        prev = Some((s, a / s, b / s, tau));
    }
    Ok(violations)
}

/// Relative (put, call, otm) prices under the term structure at `(τ, κ)`.
///
/// `p = e^κ Ψ_LB(κ) − Ψ̃_LB(κ)`; the call uses the reflected-shape formula
/// `c = Φ_LB(−z; β−ς, α+ς) − e^κ Φ_LB(−z; β, α)`.
pub fn lb_price(tau: f64, kappa: f64, ts: &LbTermStructure) -> Result<(f64, f64, f64)> {
    let m = term_structure_eval(tau, ts).map_err(|e| match e {
        VoljetError::ModelInvalid(s) => {
            VoljetError::ModelInvalid(format!("term structure invalid at tau={tau}: {s}"))
        }
        other => other,
    })?;
    let z = m.pivot(kappa);
    let ek = kappa.exp();
    let (put, call) = if kappa <= 0.0 {
        let put = ek * lb_cdf(kappa, &m).value() - lb_tilted_cdf(kappa, &m).value();
        (put, put + 1.0 - ek)
    } else {
        let u = logistic_cdf_raw(-z);
        let call = reg_inc_beta_raw(u, m.beta - m.dispersion, m.alpha + m.dispersion)
            - ek * reg_inc_beta_raw(u, m.beta, m.alpha);
        (call - 1.0 + ek, call)
    };
    let otm = if kappa <= 0.0 { put } else { call };
    Ok((put, call, otm))
}
