//! Second-difference step control on a plain fast convolution.
//!
//! `g(t) = tanh((t − 1)/w)` has a sharp front at `t = 1`; the controller
//! concentrates steps there and lengthens them elsewhere.

use fastconv::control::{
    control_step, propose_step_second_diff, second_difference, ControllerConfig,
};
use fastconv::prelude::*;

fn main() -> fastconv::Result<()> {
    let w = 0.01;
    let g = |t: f64| ((t - 1.0) / w).tanh();
    let t_end = 2.0;
    let kernel = power_kernel(0.5)?;
    let cfg = ControllerConfig::new(1e-6, kernel.controller_constant(t_end), 1e-4, 1e-8);
    let mut engine = ConvolutionEngine::new(
        kernel,
        EngineConfig::new(1e-8, 5, t_end, ContourConstants::preset_k50()),
        &[g(0.0)],
    )?;
    let mut hist: Vec<(f64, f64)> = vec![(0.0, g(0.0))];
    let (mut t, mut h, mut gamma, mut rejects) = (0.0, cfg.h0, 0.0, 0);
    while t < t_end {
        let mut h_prop = if hist.len() < 3 {
            cfg.h0
        } else {
            propose_step_second_diff(&cfg, h, gamma)
        };
        h_prop = h_prop.min(t_end - t);
        let [(t0, g0), (t1, g1)] = if hist.len() < 2 {
            [hist[0], hist[0]]
        } else {
            [hist[hist.len() - 2], hist[hist.len() - 1]]
        };
        let step = control_step(&cfg, t, h_prop, |h| {
            let gn = g(t + h);
            let gam = if hist.len() < 2 {
                0.0
            } else {
                second_difference([t0, t1, t + h], [&[g0], &[g1], &[gn]])
            };
            Ok((gn, gam))
        })?;
        t += step.h;
        engine.evaluate(t, &[step.value])?;
        hist.push((t, step.value));
        (h, gamma) = (step.h, step.gamma);
        rejects += step.rejects;
    }
    let steps: Vec<f64> = hist.windows(2).map(|p| p[1].0 - p[0].0).collect();
    let near = hist
        .windows(2)
        .filter(|p| (p[1].0 - 1.0).abs() < 5.0 * w)
        .count();
    println!(
        "{} steps, {rejects} rejected trials, {near} steps within 5w of the front",
        steps.len()
    );
    println!(
        "smallest step {:.3e}, largest {:.3e}",
        steps.iter().cloned().fold(f64::INFINITY, f64::min),
        steps.iter().cloned().fold(0.0, f64::max)
    );
    Ok(())
}
