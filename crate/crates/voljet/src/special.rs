//! Scalar special functions and elementary distributions.
//!
//! Everything is plain `f64`; the algorithms are fixed in source so results
//! are reproducible across platforms:
//!
//! - normal CDF through Cody's rational Chebyshev approximation of `erfc`
//!   (W. J. Cody, "Rational Chebyshev approximation for the error function",
//!   Math. Comp. 23, 1969), max relative error a few ulps;
//! - log-gamma through the Lanczos approximation with `g = 7` and the
//!   standard 9-coefficient set (see `LANCZOS_G` / `LANCZOS_COEF` below);
//! - regularized incomplete beta through the continued fraction evaluated
//!   with the modified Lentz algorithm, switching tails at
//!   `x > (a + 1) / (a + b + 2)`;
//! - polygamma of order 0..=3 through upward recurrence to `x >= 12`
//!   followed by the Bernoulli asymptotic series.

use crate::error::{Result, VoljetError};

/// A value certified to lie in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(VoljetError::Domain(format!(
                "probability out of range: {value}"
            )));
        }
        Ok(Probability(value))
    }

    /// Clamps round-off excursions like `1.0 + 1e-16` back into range.
    /// Anything further out than `1e-9` is a genuine bug and panics.
    pub(crate) fn new_clamped(value: f64) -> Self {
        assert!(
            (-1e-9..=1.0 + 1e-9).contains(&value),
            "value {value} too far outside [0,1] to be round-off"
        );
        Probability(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

fn check_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(VoljetError::Domain(format!("{name} must be finite, got {x}")))
    }
}

// ---------------------------------------------------------------------------
// Standard normal distribution
// ---------------------------------------------------------------------------

const FRAC_1_SQRT_2PI: f64 = 0.3989422804014326779399460599343818684758586311649;

/// `(2π)^{-1/2} e^{-z²/2}` without domain checks; hot-path helper.
#[inline]
pub(crate) fn normal_pdf_raw(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal density.
pub fn normal_pdf(z: f64) -> Result<f64> {
    check_finite("z", z)?;
    Ok(normal_pdf_raw(z))
}

// Cody (1969) coefficients for erf on |x| <= 0.46875.
const ERF_A: [f64; 5] = [
    3.16112374387056560e0,
    1.13864154151050156e2,
    3.77485237685302021e2,
    3.20937758913846947e3,
    1.85777706184603153e-1,
];
const ERF_B: [f64; 4] = [
    2.36012909523441209e1,
    2.44024637934444173e2,
    1.28261652607737228e3,
    2.84423683343917062e3,
];
// erfc on 0.46875 < x <= 4.
const ERF_C: [f64; 9] = [
    5.64188496988670089e-1,
    8.88314979438837594e0,
    6.61191906371416295e1,
    2.98635138197400131e2,
    8.81952221241769090e2,
    1.71204761263407058e3,
    2.05107837782607147e3,
    1.23033935479799725e3,
    2.15311535474403846e-8,
];
const ERF_D: [f64; 8] = [
    1.57449261107098347e1,
    1.17693950891312499e2,
    5.37181101862009858e2,
    1.62138957456669019e3,
    3.29079923573345963e3,
    4.36261909014324716e3,
    3.43936767414372164e3,
    1.23033935480374942e3,
];
// erfc asymptotic part for x > 4.
const ERF_P: [f64; 6] = [
    3.05326634961232344e-1,
    3.60344899949804439e-1,
    1.25781726111229246e-1,
    1.60837851487422766e-2,
    6.58749161529837803e-4,
    1.63153871373020978e-2,
];
const ERF_Q: [f64; 5] = [
    2.56852019228982242e0,
    1.87295284992346047e0,
    5.27905102951428412e-1,
    6.05183413124413191e-2,
    2.33520497626869185e-3,
];

/// Complementary error function, Cody's algorithm.
pub(crate) fn erfc_raw(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= 0.46875 {
        // erfc = 1 - erf on the central interval
        let y = x * x;
        let mut num = ERF_A[4] * y;
        let mut den = y;
        for i in 0..3 {
            num = (num + ERF_A[i]) * y;
            den = (den + ERF_B[i]) * y;
        }
        return 1.0 - x * (num + ERF_A[3]) / (den + ERF_B[3]);
    }

    let erfc_abs = if ax <= 4.0 {
        let mut num = ERF_C[8] * ax;
        let mut den = ax;
        for i in 0..7 {
            num = (num + ERF_C[i]) * ax;
            den = (den + ERF_D[i]) * ax;
        }
        let r = (num + ERF_C[7]) / (den + ERF_D[7]);
        scaled_exp_sq(ax) * r
    } else if ax < 26.6 {
        let y = 1.0 / (ax * ax);
        let mut num = ERF_P[5] * y;
        let mut den = y;
        for i in 0..4 {
            num = (num + ERF_P[i]) * y;
            den = (den + ERF_Q[i]) * y;
        }
        let r = y * (num + ERF_P[4]) / (den + ERF_Q[4]);
        scaled_exp_sq(ax) * (1.0 / std::f64::consts::PI.sqrt() - r) / ax
    } else {
        0.0
    };

    if x < 0.0 {
        2.0 - erfc_abs
    } else {
        erfc_abs
    }
}

/// `exp(-x²)` split as `exp(-t²)·exp(-(x-t)(x+t))` with `t = trunc(16x)/16`
/// to dodge the cancellation in forming `x²` directly.
#[inline]
fn scaled_exp_sq(x: f64) -> f64 {
    let t = (x * 16.0).trunc() / 16.0;
    let del = (x - t) * (x + t);
    (-t * t).exp() * (-del).exp()
}

/// Standard normal CDF `Φ(z) = erfc(-z/√2)/2`.
pub fn normal_cdf(z: f64) -> Result<Probability> {
    check_finite("z", z)?;
    Ok(Probability::new_clamped(normal_cdf_raw(z)))
}

#[inline]
pub(crate) fn normal_cdf_raw(z: f64) -> f64 {
    0.5 * erfc_raw(-z * std::f64::consts::FRAC_1_SQRT_2)
}

// ---------------------------------------------------------------------------
// Standard logistic distribution
// ---------------------------------------------------------------------------

/// `φ_L(z) = e^z / (1 + e^z)²`, sign-symmetric so large `|z|` underflows
/// cleanly instead of overflowing.
#[inline]
pub(crate) fn logistic_pdf_raw(z: f64) -> f64 {
    let e = (-z.abs()).exp();
    let d = 1.0 + e;
    e / (d * d)
}

pub fn logistic_pdf(z: f64) -> Result<f64> {
    check_finite("z", z)?;
    Ok(logistic_pdf_raw(z))
}

/// `Φ_L(z) = e^z / (1 + e^z)`.
#[inline]
pub(crate) fn logistic_cdf_raw(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn logistic_cdf(z: f64) -> Result<Probability> {
    check_finite("z", z)?;
    Ok(Probability::new_clamped(logistic_cdf_raw(z)))
}

// ---------------------------------------------------------------------------
// Log-gamma / log-beta
// ---------------------------------------------------------------------------

/// Lanczos parameter `g = 7` with the matching 9-coefficient set.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

/// `ln Γ(x)` for `x > 0` via Lanczos; reflection is not needed on this domain.
pub(crate) fn ln_gamma_raw(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // ln Γ(x) = ln(π / sin(πx)) − ln Γ(1 − x)
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma_raw(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// `ln B(a, b) = ln Γ(a) + ln Γ(b) − ln Γ(a + b)`.
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(VoljetError::Domain(format!(
            "log_beta requires a, b > 0, got ({a}, {b})"
        )));
    }
    Ok(ln_gamma_raw(a) + ln_gamma_raw(b) - ln_gamma_raw(a + b))
}

// ---------------------------------------------------------------------------
// Regularized incomplete beta
// ---------------------------------------------------------------------------

/// Continued fraction for the incomplete beta, modified Lentz evaluation.
fn beta_cont_frac(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

#[inline]
pub(crate) fn reg_inc_beta_raw(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_pre = a * x.ln() + b * (-x).ln_1p() - (ln_gamma_raw(a) + ln_gamma_raw(b) - ln_gamma_raw(a + b));
    if x < (a + 1.0) / (a + b + 2.0) {
        (ln_pre.exp() / a * beta_cont_frac(a, b, x)).clamp(0.0, 1.0)
    } else {
        (1.0 - ln_pre.exp() / b * beta_cont_frac(b, a, 1.0 - x)).clamp(0.0, 1.0)
    }
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn reg_inc_beta(x: Probability, a: f64, b: f64) -> Result<Probability> {
    if !(a > 0.0) || !(b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(VoljetError::Domain(format!(
            "reg_inc_beta requires a, b > 0, got ({a}, {b})"
        )));
    }
    Ok(Probability::new_clamped(reg_inc_beta_raw(x.value(), a, b)))
}

// ---------------------------------------------------------------------------
// Polygamma
// ---------------------------------------------------------------------------

/// Bernoulli numbers B_2, B_4, ..., B_14.
const BERNOULLI: [f64; 7] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
];

const POLYGAMMA_SHIFT: f64 = 12.0;

pub(crate) fn polygamma_raw(n: usize, x: f64) -> f64 {
    debug_assert!(n <= 3 && x > 0.0);
    // ψ⁽ⁿ⁾(x) = ψ⁽ⁿ⁾(x + m) − Σ_{j<m} (−1)ⁿ n! (x + j)^{−(n+1)}
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let n_fact = [1.0, 1.0, 2.0, 6.0][n];
    let mut shift_sum = 0.0;
    let mut y = x;
    while y < POLYGAMMA_SHIFT {
        shift_sum += sign * n_fact * y.powi(-(n as i32 + 1));
        y += 1.0;
    }

    let asymptotic = if n == 0 {
        // ψ(y) ≈ ln y − 1/(2y) − Σ B_2k / (2k y^{2k})
        let mut s = y.ln() - 0.5 / y;
        let y2 = y * y;
        let mut yp = y2;
        for (k, b) in BERNOULLI.iter().enumerate() {
            let two_k = 2.0 * (k as f64 + 1.0);
            s -= b / (two_k * yp);
            yp *= y2;
        }
        s
    } else {
        // (−1)^{n+1} [ (n−1)!/yⁿ + n!/(2y^{n+1}) + Σ B_2k (2k+n−1)!/(2k)! y^{−(2k+n)} ]
        let nm1_fact = [1.0, 1.0, 1.0, 2.0][n];
        let mut s = nm1_fact / y.powi(n as i32) + n_fact / (2.0 * y.powi(n as i32 + 1));
        let y2 = y * y;
        let mut yp = y.powi(n as i32) * y2;
        for (k, b) in BERNOULLI.iter().enumerate() {
            let two_k = 2 * (k + 1);
            // (2k + n − 1)! / (2k)!
            let mut ratio = 1.0;
            for j in (two_k + 1)..=(two_k + n - 1) {
                ratio *= j as f64;
            }
            s += b * ratio / yp;
            yp *= y2;
        }
        if n % 2 == 0 {
            -s
        } else {
            s
        }
    };

    asymptotic - shift_sum
}

/// Polygamma `ψ⁽ⁿ⁾(x)` for orders 0..=3 and `x > 0`.
pub fn polygamma(n: usize, x: f64) -> Result<f64> {
    if n > 3 {
        return Err(VoljetError::Domain(format!(
            "polygamma order must be in 0..=3, got {n}"
        )));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(VoljetError::Domain(format!(
            "polygamma requires x > 0, got {x}"
        )));
    }
    Ok(polygamma_raw(n, x))
}
