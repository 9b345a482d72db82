//! Black-Scholes pricing in total-volatility form.
//!
//! All prices are relative (put-to-adjusted-spot, call-to-adjusted-spot) and
//! parameterized by the total volatility `ω = σ√τ`. The pivots are
//! `z± = (κ ± ω²/2) / ω`.

use crate::error::{Result, VoljetError};
use crate::special::{normal_cdf_raw, normal_pdf_raw};

/// Log-forward-moneyness `κ = ln(K / F)`.
pub fn to_moneyness(strike: f64, forward: f64) -> Result<f64> {
    if !(strike > 0.0) || !(forward > 0.0) {
        return Err(VoljetError::Domain(format!(
            "to_moneyness requires positive strike and forward, got ({strike}, {forward})"
        )));
    }
    Ok((strike / forward).ln())
}

/// Dollar price divided by the dividend-adjusted spot `S·D_d`.
pub fn to_relative_price(dollar_price: f64, spot: f64, dividend_discount: f64) -> Result<f64> {
    if !(spot > 0.0) || !(dividend_discount > 0.0) || dollar_price < 0.0 {
        return Err(VoljetError::Domain(format!(
            "to_relative_price requires spot, discount > 0 and price >= 0, \
             got ({dollar_price}, {spot}, {dividend_discount})"
        )));
    }
    Ok(dollar_price / (spot * dividend_discount))
}

fn check_tau_omega(tau: f64, omega: f64) -> Result<()> {
    if !(tau > 0.0) {
        return Err(VoljetError::Domain(format!("tenor must be > 0, got {tau}")));
    }
    if omega < 0.0 || !omega.is_finite() {
        return Err(VoljetError::Domain(format!(
            "total volatility must be >= 0, got {omega}"
        )));
    }
    Ok(())
}

#[inline]
pub(crate) fn pivots(kappa: f64, omega: f64) -> (f64, f64) {
    let half = 0.5 * omega;
    (kappa / omega + half, kappa / omega - half)
}

#[inline]
pub(crate) fn bs_put_raw(kappa: f64, omega: f64) -> f64 {
    if omega == 0.0 {
        return (kappa.exp() - 1.0).max(0.0);
    }
    let (zp, zm) = pivots(kappa, omega);
    kappa.exp() * normal_cdf_raw(zp) - normal_cdf_raw(zm)
}

#[inline]
pub(crate) fn bs_call_raw(kappa: f64, omega: f64) -> f64 {
    if omega == 0.0 {
        return (1.0 - kappa.exp()).max(0.0);
    }
    let (zp, zm) = pivots(kappa, omega);
    normal_cdf_raw(-zm) - kappa.exp() * normal_cdf_raw(-zp)
}

#[inline]
pub(crate) fn bs_otm_raw(kappa: f64, omega: f64) -> f64 {
    if kappa <= 0.0 {
        bs_put_raw(kappa, omega)
    } else {
        bs_call_raw(kappa, omega)
    }
}

/// Relative Black-Scholes put `p = e^κ Φ(z₊) − Φ(z₋)`; `ω = 0` returns the
/// intrinsic value.
pub fn bs_put(tau: f64, kappa: f64, omega: f64) -> Result<f64> {
    check_tau_omega(tau, omega)?;
    Ok(bs_put_raw(kappa, omega))
}

/// Relative Black-Scholes call `c = Φ(−z₋) − e^κ Φ(−z₊)`.
pub fn bs_call(tau: f64, kappa: f64, omega: f64) -> Result<f64> {
    check_tau_omega(tau, omega)?;
    Ok(bs_call_raw(kappa, omega))
}

/// Out-of-the-money dispatch: put for `κ ≤ 0`, call for `κ > 0`.
pub fn bs_otm(tau: f64, kappa: f64, omega: f64) -> Result<f64> {
    check_tau_omega(tau, omega)?;
    Ok(bs_otm_raw(kappa, omega))
}

#[inline]
pub(crate) fn bs_vega_raw(tau: f64, kappa: f64, omega: f64) -> f64 {
    let (_, zm) = pivots(kappa, omega);
    normal_pdf_raw(zm) * tau.sqrt()
}

/// Black-Scholes vega `∂p/∂σ = φ(z₋)√τ`.
pub fn bs_vega(tau: f64, kappa: f64, omega: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(VoljetError::Domain(format!("tenor must be > 0, got {tau}")));
    }
    if !(omega > 0.0) {
        return Err(VoljetError::Domain(format!(
            "bs_vega requires omega > 0, got {omega}"
        )));
    }
    Ok(bs_vega_raw(tau, kappa, omega))
}

const IV_BRACKET_LO: f64 = 1e-8;
const IV_BRACKET_HI: f64 = 10.0;
const IV_PRICE_TOL: f64 = 1e-12;

/// Inverts an OTM price to the total implied volatility.
///
/// Bracketed Newton on ω with bisection fallback; the bracket is
/// `(1e-8, 10)`. Convergence is in ω (Newton step below 1e-15·ω) so the
/// root stays sharp even deep in the wings where vega is tiny; the price
/// residual check is a secondary guard.
pub fn implied_total_vol(tau: f64, kappa: f64, otm_price: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(VoljetError::Domain(format!("tenor must be > 0, got {tau}")));
    }
    // OTM intrinsic value is 0; the upper bound is e^κ for puts, 1 for calls.
    let upper = if kappa <= 0.0 { kappa.exp() } else { 1.0 };
    if !(otm_price > 0.0) || otm_price >= upper {
        return Err(VoljetError::UnattainablePrice {
            tau,
            kappa,
            price: otm_price,
        });
    }
    let f = |w: f64| bs_otm_raw(kappa, w) - otm_price;
    let mut lo = IV_BRACKET_LO;
    let mut hi = IV_BRACKET_HI;
    if f(lo) > 0.0 || f(hi) < 0.0 {
        return Err(VoljetError::UnattainablePrice {
            tau,
            kappa,
            price: otm_price,
        });
    }
    let mut w = 0.25f64.clamp(lo, hi);
    for _ in 0..200 {
        let diff = f(w);
        if diff > 0.0 {
            hi = w;
        } else if diff < 0.0 {
            lo = w;
        } else {
            return Ok(w);
        }
        // total vega ∂(price)/∂ω = φ(z₋)
        let vega = normal_pdf_raw(pivots(kappa, w).1);
        let newton = w - diff / vega;
        if vega > 0.0 && newton > lo && newton < hi {
            if (newton - w).abs() <= 1e-15 * w {
                return Ok(newton);
            }
            w = newton;
        } else {
            w = 0.5 * (lo + hi);
        }
        if hi - lo < f64::EPSILON * hi {
            break;
        }
    }
    let diff = f(w);
    if diff.abs() <= IV_PRICE_TOL {
        Ok(w)
    } else {
        Err(VoljetError::Numeric(format!(
            "implied vol iteration stalled at omega={w}, residual={diff}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moneyness_and_relative_price() {
        assert_eq!(to_moneyness(100.0, 100.0).unwrap(), 0.0);
        assert!((to_moneyness(105.0, 100.0).unwrap() - 0.048790164169432).abs() < 1e-12);
        assert!((to_relative_price(5.25, 105.0, 1.0).unwrap() - 0.05).abs() < 1e-15);
        assert!(to_moneyness(-1.0, 100.0).is_err());
        assert!(to_relative_price(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn atm_put_value() {
        // p(1, 0, 0.4) = 2Φ(0.2) − 1, frozen from the normal_cdf oracle
        let p = bs_put(1.0, 0.0, 0.4).unwrap();
        assert!((p - 0.15851941887820605).abs() < 1e-15);
    }

    #[test]
    fn intrinsic_limit() {
        assert!((bs_put(1.0, 0.1, 0.0).unwrap() - (0.1f64.exp() - 1.0)).abs() < 1e-15);
        assert_eq!(bs_put(1.0, -0.1, 0.0).unwrap(), 0.0);
        assert_eq!(bs_call(1.0, 0.1, 0.0).unwrap(), 0.0);
        assert!(bs_put(1.0, 0.0, -0.1).is_err());
        assert!(bs_put(0.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn put_call_parity() {
        for (tau, kappa, omega) in [(1.0, 0.0, 0.4), (0.5, 0.2, 0.13), (2.0, -0.7, 0.9)] {
            let p = bs_put(tau, kappa, omega).unwrap();
            let c = bs_call(tau, kappa, omega).unwrap();
            assert!(
                (c - p - (1.0 - kappa.exp())).abs() < 1e-14,
                "parity broke at ({tau}, {kappa}, {omega})"
            );
        }
    }

    #[test]
    fn vega_values() {
        let v = bs_vega(1.0, 0.0, 0.4).unwrap();
        // φ(−0.2)·1, frozen from the normal_pdf oracle
        assert!((v - 0.3910426939754559).abs() < 1e-15);
        assert!(bs_vega(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn vega_matches_finite_difference_in_sigma() {
        let (tau, kappa, sigma) = (1.0, 0.1, 0.4);
        let h = 1e-6;
        let f = |s: f64| bs_put(tau, kappa, s * tau.sqrt()).unwrap();
        let fd = (f(sigma + h) - f(sigma - h)) / (2.0 * h);
        let v = bs_vega(tau, kappa, sigma * tau.sqrt()).unwrap();
        assert!((fd - v).abs() < 1e-7, "fd={fd} vega={v}");
    }

    #[test]
    fn vega_positive_and_price_monotone() {
        let mut prev = 0.0;
        for i in 1..40 {
            let omega = 0.05 * i as f64;
            let p = bs_put(1.3, -0.2, omega).unwrap();
            assert!(p > prev, "put not increasing in omega at {omega}");
            prev = p;
            assert!(bs_vega(1.3, -0.2, omega).unwrap() > 0.0);
        }
    }

    #[test]
    fn implied_vol_round_trip() {
        for (tau, kappa, omega) in [(1.0, 0.0, 0.37), (0.3, -0.6, 0.21), (2.0, 0.8, 0.95)] {
            let price = bs_otm(tau, kappa, omega).unwrap();
            let w = implied_total_vol(tau, kappa, price).unwrap();
            assert!((w - omega).abs() < 1e-10, "({tau},{kappa}): {w} vs {omega}");
        }
    }

    #[test]
    fn implied_vol_atm_value() {
        let w = implied_total_vol(1.0, 0.0, 0.15851941887820605).unwrap();
        assert!((w - 0.4).abs() < 1e-10);
    }

    #[test]
    fn implied_vol_rejects_unattainable() {
        assert!(matches!(
            implied_total_vol(1.0, -0.1, 0.0),
            Err(VoljetError::UnattainablePrice { .. })
        ));
        assert!(implied_total_vol(1.0, 0.2, 1.0).is_err());
        assert!(implied_total_vol(1.0, -0.2, (-0.2f64).exp() + 0.01).is_err());
    }
}
