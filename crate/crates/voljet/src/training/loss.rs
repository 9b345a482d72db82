//! Price, arbitrage, and density losses, and the adjoint assembly that
//! backpropagates them through the network jet.
//!
//! Every training loss is a root-mean-square over the dataset:
//!
//! ```text
//! ℒ_P = √( (1/N) Σ (ô − o)² / v̂^m )     m = 1 (linear) or 2 (squared)
//! ℒ_C = √( (1/N) Σ ε_C² )               ε_C = (−∂τω̂)⁺
//! ℒ_V = √( (1/N) Σ ε_V² )               ε_V = (−Ψ_BS^ω̂ − ζ)⁺
//! ℒ_B = √( (1/N) Σ ε_B² )               ε_B = (−ξ)⁺
//! ```
//!
//! The total is the unit-weight sum. The density loss
//! `ℒ_D = √( (1/|𝔗|) Σ (ψ̂ − ψ_LB)² Δκ )` is evaluation-only and never
//! enters the gradient.

use crate::error::{Result, VoljetError};
use crate::market::bs::{bs_otm_raw, bs_vega_raw, pivots};
use crate::market::dataset::{ChainDataset, RelativeQuote};
use crate::market::lb::{lb_pdf, term_structure_eval, LbTermStructure};
use crate::neural::{NetworkJet, ParamGrads, VolNetwork};
use crate::parity::{implied_pdf, SurfaceJet};
use crate::special::{normal_cdf_raw, normal_pdf_raw};

/// Weighting of the price residual: `1/v̂` exactly as printed, or `1/v̂²`
/// which makes the loss an implied-volatility RMS to first order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VegaWeightMode {
    Linear,
    Squared,
}

impl VegaWeightMode {
    pub fn name(self) -> &'static str {
        match self {
            VegaWeightMode::Linear => "linear",
            VegaWeightMode::Squared => "squared",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "linear" => Ok(VegaWeightMode::Linear),
            "squared" => Ok(VegaWeightMode::Squared),
            other => Err(VoljetError::ModelInvalid(format!(
                "unknown vega-weight mode `{other}` (expected linear or squared)"
            ))),
        }
    }
}

/// Default floor on `v̂` in the price weight, guarding against He-initialized
/// networks producing near-zero volatility at extreme moneyness.
pub const DEFAULT_VEGA_FLOOR: f64 = 1e-8;

/// RMS loss components; `density` is present only when evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossBreakdown {
    pub price: f64,
    pub calendar: f64,
    pub vertical: f64,
    pub butterfly: f64,
    pub density: Option<f64>,
}

impl LossBreakdown {
    /// Unit-weight training total `ℒ_P + ℒ_C + ℒ_V + ℒ_B`.
    pub fn total(&self) -> f64 {
        self.price + self.calendar + self.vertical + self.butterfly
    }

    pub fn is_finite(&self) -> bool {
        self.total().is_finite() && self.density.map_or(true, f64::is_finite)
    }
}

/// 1 bps = 1e-4.
pub fn to_bps(loss: f64) -> f64 {
    loss * 1e4
}

/// Per-point pieces shared between the loss value and its adjoints.
struct PointEval {
    jet: NetworkJet,
    /// price residual ô − o
    residual: f64,
    /// price weight 1/v̂ or 1/v̂²
    weight: f64,
    /// whether the vega floor clipped v̂ (kills the weight's ω-derivative)
    floored: bool,
    vega: f64,
    eps_c: f64,
    eps_v: f64,
    eps_b: f64,
}

fn eval_point(
    net: &VolNetwork,
    q: &RelativeQuote,
    mode: VegaWeightMode,
    vega_floor: f64,
) -> Result<PointEval> {
    let jet = net.forward_jet(q.tau, q.kappa)?;
    let w = jet.omega;
    let residual = bs_otm_raw(q.kappa, w) - q.price;
    let raw_vega = bs_vega_raw(q.tau, q.kappa, w);
    let floored = raw_vega < vega_floor;
    let vega = raw_vega.max(vega_floor);
    let weight = match mode {
        VegaWeightMode::Linear => 1.0 / vega,
        VegaWeightMode::Squared => 1.0 / (vega * vega),
    };
    // arbitrage errors from the corrector formulas
    let g = jet.d_kappa;
    let h = jet.d_kappa2;
    let (zp, _) = pivots(q.kappa, w);
    let cdf_plus_zeta = normal_cdf_raw(zp) + normal_pdf_raw(zp) * g;
    let a = 1.0 - q.kappa / w * g;
    let xi = a * a - 0.25 * (w * g) * (w * g) + w * h;
    Ok(PointEval {
        residual,
        weight,
        floored,
        vega,
        eps_c: (-jet.d_tau).max(0.0),
        eps_v: (-cdf_plus_zeta).max(0.0),
        eps_b: (-xi).max(0.0),
        jet,
    })
}

/// Loss breakdown over a slice of quotes (no density term).
pub fn evaluate_losses(
    net: &VolNetwork,
    quotes: &[RelativeQuote],
    mode: VegaWeightMode,
    vega_floor: f64,
) -> Result<LossBreakdown> {
    let n = quotes.len();
    if n == 0 {
        return Err(VoljetError::Contract("loss over empty dataset".into()));
    }
    let (mut sp, mut sc, mut sv, mut sb) = (0.0, 0.0, 0.0, 0.0);
    for q in quotes {
        let e = eval_point(net, q, mode, vega_floor)?;
        sp += e.residual * e.residual * e.weight;
        sc += e.eps_c * e.eps_c;
        sv += e.eps_v * e.eps_v;
        sb += e.eps_b * e.eps_b;
    }
    let nf = n as f64;
    Ok(LossBreakdown {
        price: (sp / nf).sqrt(),
        calendar: (sc / nf).sqrt(),
        vertical: (sv / nf).sqrt(),
        butterfly: (sb / nf).sqrt(),
        density: None,
    })
}

/// Mini-batch loss and its exact parameter gradient.
///
/// Two passes: the first accumulates the RMS sums, the second assembles the
/// per-point adjoints `∂ℒ/∂(ω̂, ∂τω̂, ∂κω̂, ∂κκω̂)` and backpropagates them.
/// Terms whose sum is zero are skipped entirely, so points with `ε = 0`
/// contribute exactly zero arbitrage gradient.
pub fn batch_loss_and_grad(
    net: &VolNetwork,
    quotes: &[RelativeQuote],
    mode: VegaWeightMode,
    vega_floor: f64,
) -> Result<(LossBreakdown, ParamGrads)> {
    let n = quotes.len();
    if n == 0 {
        return Err(VoljetError::Contract("gradient over empty batch".into()));
    }
    let mut evals = Vec::with_capacity(n);
    let (mut sp, mut sc, mut sv, mut sb) = (0.0, 0.0, 0.0, 0.0);
    for q in quotes {
        let e = eval_point(net, q, mode, vega_floor)?;
        sp += e.residual * e.residual * e.weight;
        sc += e.eps_c * e.eps_c;
        sv += e.eps_v * e.eps_v;
        sb += e.eps_b * e.eps_b;
        evals.push(e);
    }
    let nf = n as f64;
    let losses = LossBreakdown {
        price: (sp / nf).sqrt(),
        calendar: (sc / nf).sqrt(),
        vertical: (sv / nf).sqrt(),
        butterfly: (sb / nf).sqrt(),
        density: None,
    };
    if !losses.is_finite() {
        return Err(VoljetError::Numeric(format!(
            "non-finite batch loss {losses:?}"
        )));
    }

    // d√(S/N)/dS = 1/(2 N L); zero-sum terms contribute nothing
    let cp = if sp > 0.0 { 1.0 / (2.0 * nf * losses.price) } else { 0.0 };
    let cc = if sc > 0.0 { 1.0 / (2.0 * nf * losses.calendar) } else { 0.0 };
    let cv = if sv > 0.0 { 1.0 / (2.0 * nf * losses.vertical) } else { 0.0 };
    let cb = if sb > 0.0 { 1.0 / (2.0 * nf * losses.butterfly) } else { 0.0 };

    let mut grads = ParamGrads::zeros_like(net);
    for (q, e) in quotes.iter().zip(&evals) {
        let w = e.jet.omega;
        let g = e.jet.d_kappa;
        let h = e.jet.d_kappa2;
        let (zp, zm) = pivots(q.kappa, w);
        let phi_p = normal_pdf_raw(zp);
        let phi_m = normal_pdf_raw(zm);
        let mut adj = [0.0; 4];

        if cp > 0.0 {
            // d(r² wgt)/dω = 2 r φ(z₋) wgt + r² dwgt/dω, with
            // dwgt/dω = −m wgt/v̂ · dv̂/dω dropped when the floor clips v̂
            let mut d = 2.0 * e.residual * phi_m * e.weight;
            if !e.floored {
                let dz_m = -q.kappa / (w * w) - 0.5;
                let dvega = q.tau.sqrt() * (-zm * phi_m) * dz_m;
                let m_exp = match mode {
                    VegaWeightMode::Linear => 1.0,
                    VegaWeightMode::Squared => 2.0,
                };
                d += e.residual * e.residual * (-m_exp * e.weight / e.vega) * dvega;
            }
            adj[0] += cp * d;
        }
        if cc > 0.0 && e.eps_c > 0.0 {
            // ε_C = −∂τω̂ on the active branch
            adj[1] += cc * 2.0 * e.eps_c * -1.0;
        }
        if cv > 0.0 && e.eps_v > 0.0 {
            // ε_V = −(Φ(z₊) + φ(z₊) g); z₊′ = −κ/ω² + ½
            let dz_p = -q.kappa / (w * w) + 0.5;
            let d_domega = phi_p * dz_p * (1.0 - zp * g);
            let d_dg = phi_p;
            adj[0] += cv * 2.0 * e.eps_v * -d_domega;
            adj[2] += cv * 2.0 * e.eps_v * -d_dg;
        }
        if cb > 0.0 && e.eps_b > 0.0 {
            // ε_B = −ξ, ξ = (1 − (κ/ω)g)² − ¼ω²g² + ωh
            let a = 1.0 - q.kappa / w * g;
            let dxi_domega = 2.0 * a * (q.kappa * g / (w * w)) - 0.5 * w * g * g + h;
            let dxi_dg = -2.0 * a * (q.kappa / w) - 0.5 * w * w * g;
            let dxi_dh = w;
            adj[0] += cb * 2.0 * e.eps_b * -dxi_domega;
            adj[2] += cb * 2.0 * e.eps_b * -dxi_dg;
            adj[3] += cb * 2.0 * e.eps_b * -dxi_dh;
        }
        if adj != [0.0; 4] {
            net.backward(&e.jet, adj, &mut grads);
        }
    }
    Ok((losses, grads))
}

/// Density loss `√( (1/|𝔗|) Σ (ψ̂ − ψ_LB)² Δκ )` over the dataset grid.
/// The `1/|𝔗|` normalization and the `Δκ` factor are exactly as printed —
/// there is no `1/|𝔎|`.
pub fn density_loss(
    net: &VolNetwork,
    dataset: &ChainDataset,
    ts: &LbTermStructure,
) -> Result<f64> {
    let dk = dataset.delta_kappa()?;
    let mut sum = 0.0;
    for &tau in dataset.taus() {
        let marginal = term_structure_eval(tau, ts)?;
        for &kappa in dataset.kappas() {
            let j = net.forward_jet(tau, kappa)?;
            let jet = SurfaceJet::new(tau, kappa, j.omega, j.d_tau, j.d_kappa, j.d_kappa2)?;
            let dev = implied_pdf(&jet) - lb_pdf(kappa, &marginal);
            sum += dev * dev * dk;
        }
    }
    Ok((sum / dataset.taus().len() as f64).sqrt())
}
