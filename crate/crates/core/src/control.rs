//! Step-size control.
//!
//! Two difference-based controllers bound the local interpolation error of the
//! convolution: `C h² γ ≤ Tol`, where `γ` is a second or first derivative
//! estimate of `g` and `C ≈ ⅛∫₀ᵀ|f|`. The new step solves `C h² γ = 0.8·Tol`
//! and is clamped to `[h_n/2, 2h_n]`; a rejected trial is retried with the
//! step recomputed from the trial's own `γ`.
//!
//! The integrating controller drives Störmer-Verlet through a step density
//! `z` with `h = ε/z`, updated additively so that the scheme stays reversible.

use std::collections::VecDeque;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControllerConfig {
    pub tol: f64,
    /// Kernel constant `C`.
    pub c: f64,
    pub h0: f64,
    pub h_min_guard: f64,
    pub grow: f64,
    pub shrink: f64,
    pub max_retries: usize,
}

impl ControllerConfig {
    pub fn new(tol: f64, c: f64, h0: f64, h_min_guard: f64) -> Self {
        Self {
            tol,
            c,
            h0,
            h_min_guard,
            grow: 2.0,
            shrink: 0.5,
            max_retries: 25,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::config(format!(
                "Tol must be positive, got {}",
                self.tol
            )));
        }
        if !(self.c > 0.0) {
            return Err(Error::config(format!(
                "controller constant C must be positive, got {}",
                self.c
            )));
        }
        if !(self.h_min_guard > 0.0 && self.h0 >= self.h_min_guard) {
            return Err(Error::config(format!(
                "need h0 >= h_min_guard > 0, got h0 = {}, guard = {}",
                self.h0, self.h_min_guard
            )));
        }
        if !(self.grow >= 1.0 && self.shrink > 0.0 && self.shrink <= 1.0) {
            return Err(Error::config(
                "clamp factors must satisfy grow >= 1 >= shrink > 0",
            ));
        }
        Ok(())
    }

    /// Step solving `C h² γ = 0.8·Tol`; `+∞` for `γ = 0`.
    pub fn target_step(&self, gamma: f64) -> f64 {
        if gamma > 0.0 {
            (0.8 * self.tol / (self.c * gamma)).sqrt()
        } else {
            f64::INFINITY
        }
    }

    /// Error test `C h² γ ≤ Tol`.
    pub fn passes(&self, h: f64, gamma: f64) -> bool {
        self.c * h * h * gamma <= self.tol
    }
}

/// `h_{n+1} = min(2h_n, max(h_n/2, √(0.8·Tol/(C γ″))))`.
pub fn propose_step_second_diff(cfg: &ControllerConfig, h_n: f64, gamma2: f64) -> f64 {
    clamp_step(cfg, h_n, gamma2)
}

/// Same law with the first-derivative estimate `γ′`.
pub fn propose_step_first_diff(cfg: &ControllerConfig, h_n: f64, gamma1: f64) -> f64 {
    clamp_step(cfg, h_n, gamma1)
}

fn clamp_step(cfg: &ControllerConfig, h_n: f64, gamma: f64) -> f64 {
    (cfg.grow * h_n).min((cfg.shrink * h_n).max(cfg.target_step(gamma)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Verdict {
    Accept,
    Retry(f64),
}

/// Accepts `h_prop` if the trial `γ` passes the test, otherwise proposes the
/// step that would satisfy it.
pub fn accept_step(cfg: &ControllerConfig, h_prop: f64, gamma_next: f64) -> Verdict {
    if cfg.passes(h_prop, gamma_next) {
        Verdict::Accept
    } else {
        Verdict::Retry(cfg.target_step(gamma_next).min(h_prop))
    }
}

/// `2·max_i |g[t₀, t₁, t₂]_i|`.
pub fn second_difference(t: [f64; 3], g: [&[f64]; 3]) -> f64 {
    let (h1, h2) = (t[1] - t[0], t[2] - t[1]);
    g[0].iter()
        .zip(g[1])
        .zip(g[2])
        .map(|((&a, &b), &c)| {
            let d1 = (b - a) / h1;
            let d2 = (c - b) / h2;
            (2.0 * (d2 - d1) / (t[2] - t[0])).abs()
        })
        .fold(0.0, f64::max)
}

/// `max_i |(g₁ − g₀)_i| / (t₁ − t₀)`.
pub fn first_difference(t0: f64, t1: f64, g0: &[f64], g1: &[f64]) -> f64 {
    g0.iter()
        .zip(g1)
        .map(|(a, b)| ((b - a) / (t1 - t0)).abs())
        .fold(0.0, f64::max)
}

/// Outcome of one controlled step.
#[derive(Clone, Debug)]
pub struct Controlled<T> {
    pub h: f64,
    pub gamma: f64,
    pub rejects: usize,
    pub value: T,
}

/// Runs `trial(h) → (value, γ)` until the error test passes.
///
/// Fails when the step falls below the guard or after `max_retries` rejects.
pub fn control_step<T>(
    cfg: &ControllerConfig,
    t_n: f64,
    h_prop: f64,
    mut trial: impl FnMut(f64) -> Result<(T, f64)>,
) -> Result<Controlled<T>> {
    let mut h = h_prop;
    let mut rejects = 0;
    loop {
        if h < cfg.h_min_guard {
            return Err(Error::Controller {
                t: t_n,
                reason: format!("step {h:e} below guard {:e}", cfg.h_min_guard),
            });
        }
        let (value, gamma) = trial(h)?;
        match accept_step(cfg, h, gamma) {
            Verdict::Accept => {
                return Ok(Controlled {
                    h,
                    gamma,
                    rejects,
                    value,
                })
            }
            Verdict::Retry(next) => {
                rejects += 1;
                if rejects > cfg.max_retries {
                    return Err(Error::Controller {
                        t: t_n,
                        reason: format!("{rejects} rejected trials"),
                    });
                }
                h = next;
            }
        }
    }
}

/// Step density of the integrating controller together with the last three
/// convolution right-hand sides `c_n`.
#[derive(Clone, Debug)]
pub struct IntegratorState {
    /// `z_{n+1/2}`.
    pub z: f64,
    pub eps: f64,
    /// `(t_j, c_j)`, oldest first.
    pub c_hist: VecDeque<(f64, DVector<f64>)>,
}

/// `σ̃ = wᵀM⁻¹w + rᵀM⁻¹AM⁻¹r` and `G = −(1/(4σ̃))·2wᵀM⁻¹c̈` with
/// `w = AM⁻¹v − ċ`, `r = Au − c`.
pub fn density_terms(
    minv: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    a: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
    c: &DVector<f64>,
    cdot: &DVector<f64>,
    cddot: &DVector<f64>,
) -> (f64, f64) {
    let w = a(&minv(v)) - cdot;
    let r = a(u) - c;
    let minv_w = minv(&w);
    let minv_r = minv(&r);
    let sigma = w.dot(&minv_w) + minv_r.dot(&a(&minv_r));
    let g = -(2.0 * minv_w.dot(cddot)) / (4.0 * sigma);
    (sigma, g)
}

impl IntegratorState {
    /// `z_{−1/2} = σ̃^{1/4} − εG/2` at `(u₀, v₀, t₀)` with `c_{−2} = c_{−1} = c₀ = b₀`.
    pub fn init(
        eps: f64,
        minv: &dyn Fn(&DVector<f64>) -> DVector<f64>,
        a: &dyn Fn(&DVector<f64>) -> DVector<f64>,
        u0: &DVector<f64>,
        v0: &DVector<f64>,
        t0: f64,
        b0: &DVector<f64>,
    ) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::config(format!("eps must be positive, got {eps}")));
        }
        let zero = DVector::zeros(b0.len());
        let (sigma, g) = density_terms(minv, a, u0, v0, b0, &zero, &zero);
        if !(sigma > 0.0) {
            return Err(Error::Controller {
                t: t0,
                reason: format!("sigma~ = {sigma} is not positive"),
            });
        }
        let z = sigma.powf(0.25) - eps * g / 2.0;
        if !(z > 0.0) {
            return Err(Error::Controller {
                t: t0,
                reason: format!("initial step density {z} is not positive"),
            });
        }
        let h = eps / z;
        let c_hist = VecDeque::from([
            (t0 - 2.0 * h, b0.clone()),
            (t0 - h, b0.clone()),
            (t0, b0.clone()),
        ]);
        Ok(Self { z, eps, c_hist })
    }

    /// `h_{n+1/2} = ε/z_{n+1/2}`.
    pub fn step(&self) -> f64 {
        self.eps / self.z
    }

    /// First and second divided differences of `c` at the newest point.
    pub fn c_derivatives(&self) -> (DVector<f64>, DVector<f64>) {
        let (t0, c0) = &self.c_hist[0];
        let (t1, c1) = &self.c_hist[1];
        let (t2, c2) = &self.c_hist[2];
        let d1 = (c2 - c1) / (t2 - t1);
        let d0 = (c1 - c0) / (t1 - t0);
        let dd = (&d1 - &d0) * (2.0 / (t2 - t0));
        (d1, dd)
    }

    pub fn push_c(&mut self, t: f64, c: DVector<f64>) {
        self.c_hist.push_back((t, c));
        if self.c_hist.len() > 3 {
            self.c_hist.pop_front();
        }
    }

    /// `z ← z + εG(u_n, v_n, t_n)`; returns the new step `ε/z`.
    pub fn integrating_step(
        &mut self,
        minv: &dyn Fn(&DVector<f64>) -> DVector<f64>,
        a: &dyn Fn(&DVector<f64>) -> DVector<f64>,
        u: &DVector<f64>,
        v: &DVector<f64>,
    ) -> Result<f64> {
        let (t, c) = self
            .c_hist
            .back()
            .expect("c history is never empty")
            .clone();
        let (cdot, cddot) = self.c_derivatives();
        let (sigma, g) = density_terms(minv, a, u, v, &c, &cdot, &cddot);
        if !(sigma > 0.0) {
            return Err(Error::Controller {
                t,
                reason: format!("sigma~ = {sigma} is not positive"),
            });
        }
        self.z += self.eps * g;
        if !(self.z > 0.0) {
            return Err(Error::Controller {
                t,
                reason: format!("step density z = {} is not positive", self.z),
            });
        }
        Ok(self.step())
    }
}
