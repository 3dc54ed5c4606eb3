//! Quadratic-cost reference for the piecewise-linear convolution.

use crate::contour::{invert_at, ContourConstants};
use crate::kernels::SectorialTransform;
use crate::{Error, Result};

/// Node count of the per-distance inversion used when no closed forms exist.
pub const ORACLE_K: usize = 80;

/// `(f₁(d), f₂(d))` from closed forms, or from a dedicated contour per distance.
pub fn reference_f12(kernel: &SectorialTransform, d: f64) -> (f64, f64) {
    if d == 0.0 {
        return (0.0, 0.0);
    }
    match (kernel.closed_f1(d), kernel.closed_f2(d)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            let consts = ContourConstants::preset_k50().with_k(ORACLE_K);
            (
                invert_at(kernel, d, &consts, 1),
                invert_at(kernel, d, &consts, 2),
            )
        }
    }
}

/// `u(t_n)` for every grid point, summing the linear-interpolation integral
/// over all `n` subintervals at every `t_n`. `u(t_0) = 0`.
pub fn oracle_convolve(
    kernel: &SectorialTransform,
    times: &[f64],
    samples: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    if times.len() != samples.len() {
        return Err(Error::config(format!(
            "{} times but {} samples",
            times.len(),
            samples.len()
        )));
    }
    if times.is_empty() {
        return Ok(Vec::new());
    }
    let dim = samples[0].len();
    if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::Ordering {
            t: w[1],
            prev: w[0],
        });
    }
    let mut out = Vec::with_capacity(times.len());
    out.push(vec![0.0; dim]);
    for n in 1..times.len() {
        let tn = times[n];
        let mut u = vec![0.0; dim];
        // f₁, f₂ at each distance t_n − t_j are shared by the two adjacent intervals
        let f12: Vec<(f64, f64)> = times[..=n]
            .iter()
            .map(|&tj| reference_f12(kernel, tn - tj))
            .collect();
        for j in 0..n {
            let (a1, a2) = f12[j];
            let (b1, b2) = f12[j + 1];
            let dt = times[j + 1] - times[j];
            for ((o, &x), &y) in u.iter_mut().zip(&samples[j]).zip(&samples[j + 1]) {
                let slope = (y - x) / dt;
                *o += a1 * x + a2 * slope - b1 * y - b2 * slope;
            }
        }
        out.push(u);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{mittag_leffler_kernel, power_kernel};

    #[test]
    fn unit_kernel_gives_trapezoid_rule() {
        let k = power_kernel(1.0).unwrap();
        let times = [0.0, 0.3, 0.5, 1.2];
        let g: Vec<Vec<f64>> = times.iter().map(|t| vec![t * t]).collect();
        let u = oracle_convolve(&k, &times, &g).unwrap();
        let mut trap = 0.0;
        for j in 1..times.len() {
            trap += 0.5 * (times[j] - times[j - 1]) * (g[j][0] + g[j - 1][0]);
            assert!((u[j][0] - trap).abs() < 1e-14);
        }
    }

    #[test]
    fn contour_fallback_agrees_with_closed_forms() {
        let k = power_kernel(0.5).unwrap();
        let bare = crate::kernels::user_kernel(crate::kernels::UserKernelSpec {
            name: Some("s^-1/2".into()),
            eval: Some(std::sync::Arc::new(|s: num_complex::Complex64| {
                s.powf(-0.5)
            })),
            sigma: Some(0.0),
            phi: Some(0.0),
            nu: Some(0.5),
            m_bound: Some(1.0),
            moment_estimate: Some(std::sync::Arc::new(|t: f64| {
                2.0 * (t / std::f64::consts::PI).sqrt()
            })),
        })
        .unwrap();
        for &d in &[1e-6, 1e-3, 0.1, 1.0, 30.0] {
            let (a1, a2) = reference_f12(&k, d);
            let (b1, b2) = reference_f12(&bare, d);
            assert!((a1 - b1).abs() < 1e-12 * a1, "{d}");
            assert!((a2 - b2).abs() < 1e-11 * a2, "{d}");
        }
    }

    #[test]
    fn mittag_leffler_direct_integral() {
        // f₁ of the relaxation kernel is 1 − E_α(−t^α)
        let k = mittag_leffler_kernel(0.5).unwrap();
        let (f1, _) = reference_f12(&k, 4.0);
        assert!((f1 - (1.0 - 0.255_395_676_310_505_7)).abs() < 1e-10);
    }
}
