//! Adaptive Gauss–Kronrod quadrature.
//!
//! A 7-point Gauss / 15-point Kronrod pair with bisection refinement. Used by
//! the verification paths (martingality, moment, and price cross-checks); the
//! pricing engine itself is closed-form.

/// G7–K15 abscissae on [0, 1] side (symmetric).
const KRONROD_X: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const KRONROD_W: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const GAUSS_W: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One G7/K15 evaluation over [a, b]; returns (kronrod, |kronrod − gauss|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for i in 0..8 {
        let pair = if i == 7 {
            f(c)
        } else {
            let dx = h * KRONROD_X[i];
            f(c - dx) + f(c + dx)
        };
        kronrod += KRONROD_W[i] * pair;
        if i % 2 == 1 {
            gauss += GAUSS_W[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (val, err) = gk15(f, a, b);
    if err < tol || depth >= 48 {
        return val;
    }
    let c = 0.5 * (a + b);
    adaptive(f, a, c, tol * 0.5, depth + 1) + adaptive(f, c, b, tol * 0.5, depth + 1)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_quad<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // Seed with a handful of panels so narrow features are not missed.
    let n = 8;
    let h = (b - a) / n as f64;
    (0..n)
        .map(|i| {
            let lo = a + i as f64 * h;
            adaptive(f, lo, lo + h, tol / n as f64, 0)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = adaptive_quad(&|x| 3.0 * x * x, 0.0, 2.0, 1e-12);
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_integral() {
        let v = adaptive_quad(&crate::special::normal_pdf_raw, -10.0, 10.0, 1e-12);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn narrow_peak() {
        // width-0.01 Gaussian inside a wide interval
        let f = |x: f64| crate::special::normal_pdf_raw(x / 0.01) / 0.01;
        let v = adaptive_quad(&f, -5.0, 5.0, 1e-10);
        assert!((v - 1.0).abs() < 1e-9, "v={v}");
    }
}
