//! Small special-function helpers shared across modules.

use num_complex::Complex64;

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Truncated power series of the two-parameter Mittag-Leffler function
/// `E_{α,β}(x) = Σ xʲ / Γ(αj + β)`.
///
/// Accurate to roughly machine precision for `|x| ≲ 3`; cancellation grows
/// quickly for large negative `x`.
pub fn mittag_leffler_series(alpha: f64, beta: f64, x: f64, terms: usize) -> f64 {
    let mut sum = 0.0;
    let mut pow = 1.0;
    for j in 0..terms {
        let term = pow / gamma(alpha * j as f64 + beta);
        sum += term;
        if j > 8 && term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
        pow *= x;
    }
    sum
}

const SERIES_RADIUS: f64 = 0.5;
const SERIES_TERMS: usize = 22;

/// `φ₁(z) = (eᶻ − 1)/z`, evaluated without cancellation near `z = 0`.
pub fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_RADIUS {
        // Σ zʲ/(j+1)!
        let mut acc = Complex64::new(0.0, 0.0);
        for j in (0..SERIES_TERMS).rev() {
            acc = acc * z / (j as f64 + 2.0) + 1.0;
        }
        acc
    } else {
        (z.exp() - 1.0) / z
    }
}

/// `φ₂(z) = (eᶻ − 1 − z)/z²`, evaluated without cancellation near `z = 0`.
pub fn phi2(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_RADIUS {
        // Σ zʲ/(j+2)!
        let mut acc = Complex64::new(0.0, 0.0);
        for j in (0..SERIES_TERMS).rev() {
            acc = acc * z / (j as f64 + 3.0) + 1.0;
        }
        acc / 2.0
    } else {
        (z.exp() - 1.0 - z) / (z * z)
    }
}

/// `(eᶻ, φ₁(z), φ₂(z))` sharing one exponential.
pub fn exp_phi12(z: Complex64) -> (Complex64, Complex64, Complex64) {
    let e = z.exp();
    if z.norm() < SERIES_RADIUS {
        (e, phi1(z), phi2(z))
    } else {
        let p1 = (e - 1.0) / z;
        (e, p1, (p1 - 1.0) / z)
    }
}
