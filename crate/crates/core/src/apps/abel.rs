//! Nonlinear complex Abel equation with finite-time blow-up:
//!
//! ```text
//! z(t) + γ (√i/2) ∫₀ᵗ (π(t − τ))^{−1/2} |z(τ)|^{2σ} z(τ) dτ = a(t),
//! a(t) = π^{−1/4} (1 + 2it)^{−1/2}
//! ```
//!
//! The kernel `(πt)^{−1/2}` has transform `s^{−1/2}`; the complex integrand is
//! convolved as two real channels and the prefactor `γ√i/2` is applied
//! outside the engine.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::ContourConstants;
use crate::control::{control_step, propose_step_second_diff, second_difference, ControllerConfig};
use crate::engine::{ConvolutionEngine, EngineConfig};
use crate::harness::{Stop, Trajectory};
use crate::kernels::power_kernel;
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AbelProblem {
    pub gamma: f64,
    /// Nonlinearity exponent σ in `|z|^{2σ} z`.
    pub sigma_exp: f64,
    pub tol: f64,
    pub t_end: f64,
    pub h0: f64,
    /// Engine `h_min`, also the controller's step guard.
    pub h_min: f64,
    #[serde(rename = "B")]
    pub base: u32,
    pub contour: ContourConstants,
    /// The run stops once `|z|` exceeds this value.
    pub blowup_modulus: f64,
    /// Cap on accepted steps; reaching it ends the run as stalled.
    pub max_steps: usize,
}

impl AbelProblem {
    pub fn new(gamma: f64, tol: f64, t_end: f64) -> Self {
        Self {
            gamma,
            sigma_exp: 1.0,
            tol,
            t_end,
            h0: 1e-5,
            h_min: 1e-12,
            base: 5,
            contour: ContourConstants::preset_k50(),
            blowup_modulus: 100.0,
            max_steps: 1_000_000,
        }
    }
}

/// Free Schrödinger solution at the origin for a Gaussian packet.
pub fn forcing(t: f64) -> Complex64 {
    PI.powf(-0.25) / Complex64::new(1.0, 2.0 * t).sqrt()
}

fn nonlinearity(z: Complex64, sigma: f64) -> Complex64 {
    z * z.norm().powf(2.0 * sigma)
}

/// Solves `z + κ(base + w·N(z)) = a` for `z` by damped Newton on
/// `(Re z, Im z)` with a difference Jacobian, falling back to fixed-point
/// iteration.
#[allow(clippy::too_many_arguments)]
fn solve_implicit(
    kappa: Complex64,
    base: Complex64,
    w: f64,
    a: Complex64,
    sigma: f64,
    guess: Complex64,
    tol: f64,
    t: f64,
) -> Result<Complex64> {
    let residual = |z: Complex64| z + kappa * (base + w * nonlinearity(z, sigma)) - a;
    let scale = |z: Complex64| tol * z.norm().max(1.0);
    let mut z = guess;
    let mut r = residual(z);
    for _ in 0..50 {
        if r.norm() == 0.0 {
            return Ok(z);
        }
        let delta = 1e-7 * z.norm().max(1.0);
        let rx = (residual(z + delta) - r) / delta;
        let ry = (residual(z + Complex64::new(0.0, delta)) - r) / delta;
        let det = rx.re * ry.im - ry.re * rx.im;
        if !(det.abs() > 0.0) || !det.is_finite() {
            break;
        }
        let dx = (r.re * ry.im - ry.re * r.im) / det;
        let dy = (rx.re * r.im - r.re * rx.im) / det;
        let step = Complex64::new(dx, dy);
        // the update bounds the error before it, so stopping on it leaves
        // only the much smaller error after the final update
        if step.norm() <= scale(z) {
            return Ok(z - step);
        }
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = z - lambda * step;
            let rt = residual(trial);
            if rt.norm() < r.norm() {
                z = trial;
                r = rt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let converged = |z: Complex64| residual(z).norm() <= scale(z);
    if converged(z) {
        return Ok(z);
    }
    let mut z = guess;
    for _ in 0..500 {
        let next = a - kappa * (base + w * nonlinearity(z, sigma));
        if !next.is_finite() {
            break;
        }
        let done = (next - z).norm() <= tol * next.norm().max(1.0);
        z = next;
        if done && converged(z) {
            return Ok(z);
        }
    }
    Err(Error::Solver {
        t,
        reason: "implicit Abel step did not converge".into(),
    })
}

/// Adaptive solve with the second-difference controller; stops at `t_end`
/// or when `|z|` exceeds the blow-up threshold.
pub fn abel_solve(p: &AbelProblem) -> Result<Trajectory> {
    if !(p.t_end > 0.0) || !(p.sigma_exp >= 0.0) || !(p.blowup_modulus > 0.0) {
        return Err(Error::config(
            "abel: need t_end > 0, sigma >= 0 and a positive blow-up threshold",
        ));
    }
    let kernel = power_kernel(0.5)?;
    let kappa = p.gamma * Complex64::from_polar(1.0, FRAC_PI_4) / 2.0;
    let ctrl = ControllerConfig::new(p.tol, kernel.controller_constant(p.t_end), p.h0, p.h_min);
    ctrl.validate()?;
    let cfg = EngineConfig::new(p.h_min, p.base, p.t_end, p.contour);
    let z0 = forcing(0.0);
    let g0 = nonlinearity(z0, p.sigma_exp);
    let mut engine = ConvolutionEngine::new(kernel, cfg, &[g0.re, g0.im])?;
    let mut traj = Trajectory::new("abel", &["Re(z)", "Im(z)", "|z|"], "gamma2");
    traj.push(0.0, vec![z0.re, z0.im, z0.norm()], 0, 0.0);

    let newton_tol = 0.01 * p.tol;
    let mut zs = vec![z0];
    let mut t = 0.0;
    let mut gamma2 = 0.0;
    while t < p.t_end {
        let n = engine.steps();
        if n >= p.max_steps {
            traj.stop = Stop::Stalled {
                t,
                message: format!("step cap {} reached", p.max_steps),
            };
            break;
        }
        let h_last = traj.step_sizes.last().copied().unwrap_or(0.0);
        let mut h_prop = if n < 2 {
            p.h0
        } else {
            propose_step_second_diff(&ctrl, h_last, gamma2)
        };
        if t + h_prop >= p.t_end - p.h_min {
            h_prop = p.t_end - t;
        }
        let recent: Vec<(f64, Vec<f64>)> = engine.recent().map(|(t, g)| (t, g.to_vec())).collect();
        let guess = match zs.as_slice() {
            [.., z1, z2] if n >= 1 => *z2 + (*z2 - *z1) * (h_prop / h_last),
            _ => *zs.last().unwrap(),
        };
        let mut trial = |h: f64| -> Result<((f64, Complex64, Complex64), f64)> {
            let tn = t + h;
            let hist = engine.history(tn)?;
            let (wp, wn) = engine.step_weights(tn)?;
            let gp = engine.last_sample();
            let base = Complex64::new(hist[0] + wp * gp[0], hist[1] + wp * gp[1]);
            let z = solve_implicit(
                kappa,
                base,
                wn,
                forcing(tn),
                p.sigma_exp,
                guess,
                newton_tol,
                tn,
            )?;
            let g = nonlinearity(z, p.sigma_exp);
            let gam = if recent.len() >= 2 {
                let (t1, g1) = &recent[recent.len() - 2];
                let (t2, g2) = &recent[recent.len() - 1];
                second_difference([*t1, *t2, tn], [g1, g2, &[g.re, g.im]])
            } else {
                0.0
            };
            Ok(((tn, z, g), gam))
        };
        let outcome = if n < 2 {
            trial(h_prop).map(|(value, gam)| (value, gam, 0))
        } else {
            control_step(&ctrl, t, h_prop, trial).map(|out| (out.value, out.gamma, out.rejects))
        };
        let ((tn, z, g), gam, rejects) = match outcome {
            Ok(step) => step,
            Err(e @ (Error::Controller { .. } | Error::Solver { .. })) => {
                traj.stop = Stop::Stalled {
                    t,
                    message: e.to_string(),
                };
                break;
            }
            Err(e) => return Err(e),
        };
        engine.commit(tn, &[g.re, g.im])?;
        t = tn;
        gamma2 = gam;
        zs.push(z);
        if zs.len() > 2 {
            zs.remove(0);
        }
        traj.push(t, vec![z.re, z.im, z.norm()], rejects, gam);
        if z.norm() > p.blowup_modulus {
            traj.stop = Stop::BlowUp {
                t,
                modulus: z.norm(),
            };
            break;
        }
    }
    traj.counters = engine.counters();
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forcing_at_zero() {
        assert!((forcing(0.0).re - 0.751_125_544_5).abs() < 1e-9);
        assert_eq!(forcing(0.0).im, 0.0);
    }

    #[test]
    fn zero_coupling_reproduces_forcing() {
        let mut p = AbelProblem::new(0.0, 1e-6, 1.0);
        p.h_min = 1e-8;
        let traj = abel_solve(&p).unwrap();
        assert_eq!(traj.stop, Stop::Completed);
        assert_eq!(traj.last_time(), 1.0);
        for (t, v) in traj.times.iter().zip(&traj.values) {
            let a = forcing(*t);
            assert!((Complex64::new(v[0], v[1]) - a).norm() <= 0.01 * p.tol);
        }
    }

    #[test]
    fn implicit_solver_handles_large_coupling() {
        let kappa = Complex64::from_polar(-1.25, FRAC_PI_4);
        let z = solve_implicit(
            kappa,
            Complex64::new(3.0, -1.0),
            0.4,
            Complex64::new(0.2, 0.5),
            1.0,
            Complex64::new(0.0, 0.0),
            1e-12,
            0.0,
        )
        .unwrap();
        let r = z + kappa * (Complex64::new(3.0, -1.0) + 0.4 * nonlinearity(z, 1.0))
            - Complex64::new(0.2, 0.5);
        assert!(r.norm() < 1e-11);
    }
}
