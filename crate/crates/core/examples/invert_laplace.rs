//! Numerical Laplace inversion on one hyperbolic contour.
//!
//! The contour fitted to `[t/2, 2t]` recovers `f(t) = t^{ν−1}/Γ(ν)` from
//! `F(s) = s^{−ν}`; the error falls geometrically in the node count `K`.

use fastconv::contour::{build_contour, plan_interval, ContourConstants, Which};
use fastconv::kernels::power_kernel;

fn main() -> fastconv::Result<()> {
    let kernel = power_kernel(0.5)?;
    let (t_lo, t_hi) = (0.1, 0.4);
    let samples: Vec<f64> = (0..20)
        .map(|i| t_lo + (t_hi - t_lo) * i as f64 / 19.0)
        .collect();
    println!("{:>4}  {:>12}", "K", "max rel err");
    for k in [10, 20, 30, 40, 50] {
        let consts = ContourConstants::preset_k50().with_k(k);
        let contour = build_contour(
            plan_interval(t_lo, t_hi, &consts, kernel.sigma),
            &consts,
            &kernel,
        )?;
        let err = samples
            .iter()
            .map(|&t| {
                let exact = kernel.closed_f(t).unwrap();
                ((contour.invert(Which::F, t) - exact) / exact).abs()
            })
            .fold(0.0, f64::max);
        println!("{k:>4}  {err:>12.3e}");
    }
    Ok(())
}
