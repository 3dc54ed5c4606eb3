//! Fast convolution on a nonuniform grid compared with the quadratic oracle.
//!
//! `u(t) = ∫₀ᵗ f(t−τ) sin τ dτ` with `F(s) = s^{−α}` on 2000 random steps.

use std::time::Instant;

use fastconv::harness::oracle_convolve;
use fastconv::harness::run::{fast_convolve, random_grid};
use fastconv::prelude::*;

fn main() -> fastconv::Result<()> {
    let alpha = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(0.5);
    let kernel = power_kernel(alpha)?;
    let times = random_grid(2000, 5.0, 3);
    let g: Vec<Vec<f64>> = times.iter().map(|t| vec![t.sin()]).collect();
    let cfg = EngineConfig::new(1e-4, 5, 5.0, ContourConstants::preset_k40());

    let start = Instant::now();
    let (fast, counters) = fast_convolve(kernel.clone(), cfg, &times, &g)?;
    let fast_time = start.elapsed();
    let start = Instant::now();
    let exact = oracle_convolve(&kernel, &times, &g)?;
    let oracle_time = start.elapsed();

    let scale = exact.iter().map(|u| u[0].abs()).fold(0.0, f64::max);
    let dev = fast
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a[0] - b[0]).abs())
        .fold(0.0, f64::max);
    println!("alpha = {alpha}, {} steps", times.len() - 1);
    println!("fast   {fast_time:>10.2?}   oracle {oracle_time:>10.2?}");
    println!("max deviation / max|u| = {:.3e}", dev / scale);
    println!("{}", serde_json::to_string_pretty(&counters)?);
    Ok(())
}
