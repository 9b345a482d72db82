//! Density–volatility parity.
//!
//! The total implied volatility surface `ω(τ, κ)` acts as a pointwise
//! corrector mapping the Black-Scholes quasi-density into the implied
//! risk-neutral density:
//!
//! ```text
//! Ψ(τ, κ)   = Ψ_BS^ω + ζ,        ζ = ψ_BS^ω · ω · ∂κω
//! ψ(τ, κ)   = ψ_BS^ω · ξ,        ξ = (1 − (κ/ω)∂κω)² − ¼(ω ∂κω)² + ω ∂κκω
//! ∂τp(τ, κ) = ψ̃_BS^ω · ω · ∂τω
//! ```
//!
//! with quasi-densities `ψ_BS^ω = φ(z₊)/ω`, `ψ̃_BS^ω = φ(z₋)/ω`,
//! `Ψ_BS^ω = Φ(z₊)` evaluated at the smile-varying ω. The reduced
//! static-arbitrage conditions are `∂τω ≥ 0`, `Ψ_BS^ω + ζ ≥ 0`, `ξ ≥ 0`.

use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Result, VoljetError};
use crate::market::bs::{bs_put_raw, implied_total_vol, pivots};
use crate::market::dataset::fmt_g17;
use crate::market::lb::{lb_cdf, lb_pdf, lb_price, term_structure_eval, LbTermStructure};
use crate::special::{normal_cdf_raw, normal_pdf_raw, Probability};

/// A total-implied-volatility value bundled with the partials that the
/// correctors need: `(ω, ∂τω, ∂κω, ∂κκω)` at one `(τ, κ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceJet {
    pub tau: f64,
    pub kappa: f64,
    pub omega: f64,
    pub d_tau: f64,
    pub d_kappa: f64,
    pub d_kappa2: f64,
}

impl SurfaceJet {
    pub fn new(
        tau: f64,
        kappa: f64,
        omega: f64,
        d_tau: f64,
        d_kappa: f64,
        d_kappa2: f64,
    ) -> Result<Self> {
        let all = [tau, kappa, omega, d_tau, d_kappa, d_kappa2];
        if !(omega > 0.0) || all.iter().any(|v| !v.is_finite()) {
            return Err(VoljetError::Domain(format!(
                "jet requires finite entries and omega > 0, got {all:?}"
            )));
        }
        Ok(SurfaceJet {
            tau,
            kappa,
            omega,
            d_tau,
            d_kappa,
            d_kappa2,
        })
    }
}

/// Quasi-densities at the smile-varying ω.
#[derive(Clone, Copy, Debug)]
pub struct QuasiDensity {
    /// ψ_BS^ω = φ(z₊)/ω
    pub pdf: f64,
    /// ψ̃_BS^ω = φ(z₋)/ω
    pub tilted_pdf: f64,
    /// Ψ_BS^ω = Φ(z₊)
    pub cdf: Probability,
}

/// `(ψ_BS^ω, ψ̃_BS^ω, Ψ_BS^ω)` at `(τ, κ)` with total volatility ω.
pub fn quasi_density(_tau: f64, kappa: f64, omega: f64) -> Result<QuasiDensity> {
    if !(omega > 0.0) {
        return Err(VoljetError::Domain(format!(
            "quasi_density requires omega > 0, got {omega}"
        )));
    }
    let (zp, zm) = pivots(kappa, omega);
    Ok(QuasiDensity {
        pdf: normal_pdf_raw(zp) / omega,
        tilted_pdf: normal_pdf_raw(zm) / omega,
        cdf: Probability::new_clamped(normal_cdf_raw(zp)),
    })
}

/// Correction addend ζ, multiplier ξ, and the quasi-densities they act on.
#[derive(Clone, Copy, Debug)]
pub struct CorrectorBundle {
    pub zeta: f64,
    pub xi: f64,
    pub quasi_pdf: f64,
    pub quasi_cdf: Probability,
    pub tilted_quasi_pdf: f64,
}

/// Computes `ζ = ψ_BS^ω ω ∂κω` and
/// `ξ = (1 − (κ/ω)∂κω)² − ¼(ω ∂κω)² + ω ∂κκω`.
pub fn correctors(jet: &SurfaceJet) -> CorrectorBundle {
    let q = quasi_density(jet.tau, jet.kappa, jet.omega).expect("jet invariant");
    let g = jet.d_kappa;
    let w = jet.omega;
    let zeta = q.pdf * w * g;
    let a = 1.0 - jet.kappa / w * g;
    let xi = a * a - 0.25 * (w * g) * (w * g) + w * jet.d_kappa2;
    CorrectorBundle {
        zeta,
        xi,
        quasi_pdf: q.pdf,
        quasi_cdf: q.cdf,
        tilted_quasi_pdf: q.tilted_pdf,
    }
}

/// Implied CDF `Ψ = Ψ_BS^ω + ζ`. Values outside [0, 1] are returned as-is;
/// they signal arbitrage and are measured by [`arbitrage_errors`].
pub fn implied_cdf(jet: &SurfaceJet) -> f64 {
    let c = correctors(jet);
    c.quasi_cdf.value() + c.zeta
}

/// Implied PDF `ψ = ψ_BS^ω · ξ`. May be negative under butterfly arbitrage.
pub fn implied_pdf(jet: &SurfaceJet) -> f64 {
    let c = correctors(jet);
    c.quasi_pdf * c.xi
}

/// Calendar density `∂τp = ψ̃_BS^ω ω ∂τω`.
pub fn calendar_density(jet: &SurfaceJet) -> f64 {
    let c = correctors(jet);
    c.tilted_quasi_pdf * jet.omega * jet.d_tau
}

/// Static-arbitrage violation magnitudes `(ε_C, ε_V, ε_B)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ArbitrageErrors {
    pub calendar: f64,
    pub vertical: f64,
    pub butterfly: f64,
}

/// `ε_C = (−∂τω)⁺`, `ε_V = (−Ψ_BS^ω − ζ)⁺`, `ε_B = (−ξ)⁺`.
pub fn arbitrage_errors(jet: &SurfaceJet) -> ArbitrageErrors {
    let c = correctors(jet);
    ArbitrageErrors {
        calendar: (-jet.d_tau).max(0.0),
        vertical: (-c.quasi_cdf.value() - c.zeta).max(0.0),
        butterfly: (-c.xi).max(0.0),
    }
}

// ---------------------------------------------------------------------------
// Parity audit
// ---------------------------------------------------------------------------

/// Per-point audit record: relative errors of each parity identity plus the
/// arbitrage errors of the finite-difference jet.
#[derive(Clone, Copy, Debug)]
pub struct AuditRow {
    pub tau: f64,
    pub kappa: f64,
    pub err_pdf: f64,
    pub err_cdf: f64,
    pub err_calendar: f64,
    pub eps_c: f64,
    pub eps_v: f64,
    pub eps_b: f64,
}

#[derive(Clone, Debug, Default)]
pub struct AuditReport {
    pub rows: Vec<AuditRow>,
    /// (tau, kappa) points where implied-vol inversion failed.
    pub skipped: Vec<(f64, f64)>,
    /// Max error of the total-vega identity ∂ωp = φ(z₋) over the audit.
    pub err_total_vega: f64,
    /// Max error of the pivot identity e^κ φ(z₊) = φ(z₋).
    pub err_pivot_identity: f64,
}

impl AuditReport {
    pub fn max_err_pdf(&self) -> f64 {
        self.rows.iter().map(|r| r.err_pdf).fold(0.0, f64::max)
    }
    pub fn max_err_cdf(&self) -> f64 {
        self.rows.iter().map(|r| r.err_cdf).fold(0.0, f64::max)
    }
    pub fn max_err_calendar(&self) -> f64 {
        self.rows.iter().map(|r| r.err_calendar).fold(0.0, f64::max)
    }

    /// CSV schema: `tau,kappa,err_pdf,err_cdf,err_calendar,eps_C,eps_V,eps_B`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        w.write_all(b"tau,kappa,err_pdf,err_cdf,err_calendar,eps_C,eps_V,eps_B\n")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                fmt_g17(r.tau),
                fmt_g17(r.kappa),
                fmt_g17(r.err_pdf),
                fmt_g17(r.err_cdf),
                fmt_g17(r.err_calendar),
                fmt_g17(r.eps_c),
                fmt_g17(r.eps_v),
                fmt_g17(r.eps_b)
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Relative error normalized by `max(|reference|, 1e-6)`.
fn rel_err(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(1e-6)
}

fn invert(tau: f64, kappa: f64, ts: &LbTermStructure) -> Result<f64> {
    let (_, _, otm) = lb_price(tau, kappa, ts)?;
    implied_total_vol(tau, kappa, otm)
}

/// Builds a jet at `(τ, κ)` from the market by implied-vol inversion and
/// central finite differences with step `h` in both coordinates.
pub fn finite_difference_jet(
    tau: f64,
    kappa: f64,
    ts: &LbTermStructure,
    h: f64,
) -> Result<SurfaceJet> {
    let w0 = invert(tau, kappa, ts)?;
    let w_tp = invert(tau + h, kappa, ts)?;
    let w_tm = invert(tau - h, kappa, ts)?;
    let w_kp = invert(tau, kappa + h, ts)?;
    let w_km = invert(tau, kappa - h, ts)?;
    SurfaceJet::new(
        tau,
        kappa,
        w0,
        (w_tp - w_tm) / (2.0 * h),
        (w_kp - w_km) / (2.0 * h),
        (w_kp - 2.0 * w0 + w_km) / (h * h),
    )
}

/// Audits every parity identity against the analytic market.
///
/// At each `(τ, κ)`: invert the implied vol, build the jet by central finite
/// differences (step `fd_step`), and compare (a) `ψ_BS^ω ξ` to the analytic
/// density, (b) `Ψ_BS^ω + ζ` to the analytic CDF, (c) `ψ̃_BS^ω ω ∂τω` to a
/// finite difference of the put price in τ. The intermediate identities of
/// the derivation — `∂ωp = φ(z₋)` and `e^κ φ(z₊) = φ(z₋)` — are verified on
/// the same points. Inversion failures are skipped and recorded.
pub fn parity_audit(
    ts: &LbTermStructure,
    tau_set: &[f64],
    kappa_min: f64,
    kappa_max: f64,
    kappa_step: f64,
    fd_step: f64,
) -> Result<AuditReport> {
    if !(kappa_step > 0.0) || !(fd_step > 0.0) || kappa_max < kappa_min {
        return Err(VoljetError::Domain(format!(
            "invalid audit grid ({kappa_min}, {kappa_max}, {kappa_step}, fd {fd_step})"
        )));
    }
    let n_kappa = ((kappa_max - kappa_min) / kappa_step).round() as usize + 1;
    let points: Vec<(f64, f64)> = tau_set
        .iter()
        .flat_map(|&tau| (0..n_kappa).map(move |i| (tau, kappa_min + i as f64 * kappa_step)))
        .collect();

    let results: Vec<std::result::Result<(AuditRow, f64, f64), (f64, f64)>> = points
        .par_iter()
        .map(|&(tau, kappa)| {
            let jet = match finite_difference_jet(tau, kappa, ts, fd_step) {
                Ok(j) => j,
                Err(_) => return Err((tau, kappa)),
            };
            let m = term_structure_eval(tau, ts).expect("audited market is admissible");
            let err_pdf = rel_err(implied_pdf(&jet), lb_pdf(kappa, &m));
            let err_cdf = rel_err(implied_cdf(&jet), lb_cdf(kappa, &m).value());
            // ∂τp by central difference of the analytic put price
            let p_plus = lb_price(tau + fd_step, kappa, ts).expect("admissible").0;
            let p_minus = lb_price(tau - fd_step, kappa, ts).expect("admissible").0;
            let dp_dtau = (p_plus - p_minus) / (2.0 * fd_step);
            let err_calendar = rel_err(calendar_density(&jet), dp_dtau);
            let eps = arbitrage_errors(&jet);

            // intermediate identities from the derivation
            let (zp, zm) = pivots(kappa, jet.omega);
            let dw = 1e-5;
            let fd_vega =
                (bs_put_raw(kappa, jet.omega + dw) - bs_put_raw(kappa, jet.omega - dw)) / (2.0 * dw);
            let err_vega = rel_err(fd_vega, normal_pdf_raw(zm));
            let err_pivot = rel_err(kappa.exp() * normal_pdf_raw(zp), normal_pdf_raw(zm));

            Ok((
                AuditRow {
                    tau,
                    kappa,
                    err_pdf,
                    err_cdf,
                    err_calendar,
                    eps_c: eps.calendar,
                    eps_v: eps.vertical,
                    eps_b: eps.butterfly,
                },
                err_vega,
                err_pivot,
            ))
        })
        .collect();

    let mut report = AuditReport::default();
    for r in results {
        match r {
            Ok((row, ev, ep)) => {
                report.err_total_vega = report.err_total_vega.max(ev);
                report.err_pivot_identity = report.err_pivot_identity.max(ep);
                report.rows.push(row);
            }
            Err(pt) => report.skipped.push(pt),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_jet(tau: f64, kappa: f64, omega: f64, d_tau: f64) -> SurfaceJet {
        SurfaceJet::new(tau, kappa, omega, d_tau, 0.0, 0.0).unwrap()
    }

    #[test]
    fn quasi_density_pivot_arithmetic() {
        let q = quasi_density(1.0, 0.0, 0.4).unwrap();
        assert_eq!(q.pdf, normal_pdf_raw(0.2) / 0.4);
        assert_eq!(q.cdf.value(), normal_cdf_raw(0.2));
        assert!(quasi_density(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn pivot_identity_random_points() {
        // e^κ φ(z₊) = φ(z₋), the workhorse identity of the derivation
        for (kappa, omega) in [(0.3, 0.45), (-0.7, 0.2), (1.0, 1.3), (-0.05, 0.08)] {
            let (zp, zm) = pivots(kappa, omega);
            let lhs = kappa.exp() * normal_pdf_raw(zp);
            let rhs = normal_pdf_raw(zm);
            assert!((lhs / rhs - 1.0).abs() < 1e-12, "({kappa}, {omega})");
        }
    }

    #[test]
    fn flat_smile_recovers_black_scholes() {
        let jet = flat_jet(1.0, 0.2, 0.4, 0.08);
        let c = correctors(&jet);
        assert_eq!(c.zeta, 0.0);
        assert_eq!(c.xi, 1.0);
        assert_eq!(implied_pdf(&jet), c.quasi_pdf);
        let eps = arbitrage_errors(&jet);
        assert_eq!(eps, ArbitrageErrors::default());
    }

    #[test]
    fn corrector_formula_at_atm() {
        // κ=0 kills the (κ/ω) term: ξ = 1 − ¼(ω g)² + ω h
        let jet = SurfaceJet::new(1.0, 0.0, 0.4, 0.0, -0.1, 0.2).unwrap();
        let c = correctors(&jet);
        let expected = 1.0 - 0.25 * (0.4f64 * -0.1).powi(2) + 0.4 * 0.2;
        assert!((c.xi - expected).abs() < 1e-15);
        assert!((c.zeta - c.quasi_pdf * 0.4 * -0.1).abs() < 1e-15);
    }

    #[test]
    fn stationary_total_variance_has_zero_calendar_density() {
        let jet = SurfaceJet::new(1.0, 0.1, 0.3, 0.0, -0.05, 0.1).unwrap();
        assert_eq!(calendar_density(&jet), 0.0);
    }

    #[test]
    fn arbitrage_error_definitions() {
        let jet = SurfaceJet::new(1.0, 0.0, 0.4, -0.01, 0.0, 0.0).unwrap();
        let eps = arbitrage_errors(&jet);
        assert!((eps.calendar - 0.01).abs() < 1e-15);
        // force ξ = 1 + ω·h = -0.3 via h = -1.3/ω
        let jet = SurfaceJet::new(1.0, 0.0, 0.4, 0.0, 0.0, -1.3 / 0.4).unwrap();
        let eps = arbitrage_errors(&jet);
        assert!((eps.butterfly - 0.3).abs() < 1e-12);
    }

    #[test]
    fn correctors_depend_on_tau_only_through_the_smile() {
        let a = SurfaceJet::new(0.5, 0.2, 0.33, 0.4, -0.08, 0.15).unwrap();
        let b = SurfaceJet::new(1.7, 0.2, 0.33, -0.2, -0.08, 0.15).unwrap();
        let (ca, cb) = (correctors(&a), correctors(&b));
        assert_eq!(ca.zeta, cb.zeta);
        assert_eq!(ca.xi, cb.xi);
    }

    #[test]
    fn parity_against_lb_market_at_one_year() {
        let ts = LbTermStructure::reference();
        let m = term_structure_eval(1.0, &ts).unwrap();
        let mut kappa = -0.8;
        while kappa <= 0.8 {
            let jet = finite_difference_jet(1.0, kappa, &ts, 1e-4).unwrap();
            let pdf = implied_pdf(&jet);
            let cdf = implied_cdf(&jet);
            assert!(
                rel_err(pdf, lb_pdf(kappa, &m)) < 1e-3,
                "pdf mismatch at kappa={kappa}: {pdf} vs {}",
                lb_pdf(kappa, &m)
            );
            assert!(rel_err(cdf, lb_cdf(kappa, &m).value()) < 1e-3, "cdf at {kappa}");
            kappa += 0.1;
        }
    }

    #[test]
    fn flat_black_scholes_market_is_exact() {
        // ω = σ√τ has no smile: correctors trivial, identities near machine level
        let sigma = 0.35;
        for tau in [0.5, 1.0, 2.0] {
            for kappa in [-0.4, 0.0, 0.6] {
                let h = 1e-4;
                let w = |t: f64| sigma * t.sqrt();
                let jet = SurfaceJet::new(
                    tau,
                    kappa,
                    w(tau),
                    (w(tau + h) - w(tau - h)) / (2.0 * h),
                    0.0,
                    0.0,
                )
                .unwrap();
                // analytic lognormal density of the return at κ
                let (zp, _) = pivots(kappa, w(tau));
                let psi = normal_pdf_raw(zp) / w(tau);
                assert!(rel_err(implied_pdf(&jet), psi) < 1e-9);
                assert!(rel_err(implied_cdf(&jet), normal_cdf_raw(zp)) < 1e-9);
            }
        }
    }

    #[test]
    fn implied_pdf_mass_on_band() {
        // trapezoid over [−1, 1] at τ=1: most but not all of the mass
        let ts = LbTermStructure::reference();
        let dk = 0.001;
        let n = 2001;
        let mut mass = 0.0;
        for i in 0..n {
            let kappa = -1.0 + i as f64 * dk;
            let jet = finite_difference_jet(1.0, kappa, &ts, 1e-4).unwrap();
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            mass += w * implied_pdf(&jet) * dk;
        }
        assert!(
            (0.97..=1.0).contains(&mass),
            "band mass {mass} outside [0.97, 1.0]"
        );
    }

    #[test]
    fn cdf_is_kappa_derivative_of_discounted_put() {
        // Ψ = e^{−κ} ∂κ p along the smile, via finite differences of bs_put
        let ts = LbTermStructure::reference();
        let h = 1e-5;
        for kappa in [-0.5, -0.1, 0.0, 0.2, 0.6] {
            let w = |k: f64| invert(1.0, k, &ts).unwrap();
            let p = |k: f64| bs_put_raw(k, w(k));
            let fd = (p(kappa + h) - p(kappa - h)) / (2.0 * h) * (-kappa).exp();
            let jet = finite_difference_jet(1.0, kappa, &ts, 1e-4).unwrap();
            assert!(
                (implied_cdf(&jet) - fd).abs() < 1e-5,
                "kappa={kappa}: {} vs {fd}",
                implied_cdf(&jet)
            );
        }
    }

    #[test]
    fn pdf_is_kappa_derivative_of_implied_cdf() {
        let ts = LbTermStructure::reference();
        let h = 1e-4;
        for kappa in [-0.4, 0.0, 0.3] {
            let cdf = |k: f64| implied_cdf(&finite_difference_jet(1.0, k, &ts, 1e-4).unwrap());
            let fd = (cdf(kappa + h) - cdf(kappa - h)) / (2.0 * h);
            let jet = finite_difference_jet(1.0, kappa, &ts, 1e-4).unwrap();
            assert!((implied_pdf(&jet) - fd).abs() < 1e-4, "kappa={kappa}");
        }
    }

    #[test]
    fn audit_on_reference_market() {
        let ts = LbTermStructure::reference();
        let report = parity_audit(&ts, &[0.5, 1.0, 2.0], -0.8, 0.8, 0.05, 1e-4).unwrap();
        assert!(report.skipped.is_empty());
        assert!(report.max_err_pdf() < 1e-3, "pdf {}", report.max_err_pdf());
        assert!(report.max_err_cdf() < 1e-3);
        assert!(report.max_err_calendar() < 1e-3);
        assert!(report.err_total_vega < 1e-7);
        assert!(report.err_pivot_identity < 1e-7);
    }
}
