//! Three-species reaction-diffusion with a fractional memory on the reaction
//! and diffusion terms, `A + B → C`, `C → A + B`, `C → A + P`:
//!
//! ```text
//! u(t) − u(0) = ∂ₜ^{−α} g(u),   g(v) = (K I₃⊗S + R) v + k₁ e⊗(v₁v₂),   e = (−1, −1, 1)
//! ```
//!
//! on `[−5, 5]` with periodic boundary conditions, `S` the second order
//! difference Laplacian. Each step solves the linear system
//!
//! ```text
//! (I − w_new L) uⁿ = w_prev L uⁿ⁻¹ + f₁(h) k₁ e⊗(u₁ⁿ⁻¹u₂ⁿ⁻¹) + history + u⁰
//! ```
//!
//! with `L = K I₃⊗S + R`, `(w_prev, w_new) = (f₁(h) − f₂(h)/h, f₂(h)/h)`. The
//! quadratic term is explicit.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::contour::ContourConstants;
use crate::control::{control_step, first_difference, propose_step_first_diff, ControllerConfig};
use crate::engine::{ConvolutionEngine, EngineConfig};
use crate::harness::{Stop, Trajectory};
use crate::kernels::power_kernel;
use crate::{Error, Result};

pub const SPECIES: usize = 3;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FracRdProblem {
    pub alpha: f64,
    /// Diffusion coefficient `K`.
    pub k_diff: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    /// Grid points per species.
    pub m_nodes: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub t_end: f64,
    pub tol: f64,
    pub h0: f64,
    pub h_min: f64,
    #[serde(rename = "B")]
    pub base: u32,
    pub contour: ContourConstants,
    /// Initial fields `[u₁; u₂; u₃]`, `3M` values; smoothed steps when absent.
    #[serde(default)]
    pub u0: Option<Vec<f64>>,
}

impl Default for FracRdProblem {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            k_diff: 0.5,
            k1: 1.0,
            k2: 2.0,
            k3: 3.0,
            m_nodes: 50,
            x_min: -5.0,
            x_max: 5.0,
            t_end: 30.0,
            tol: 1e-4,
            h0: 1e-4,
            h_min: 1e-6,
            base: 5,
            contour: ContourConstants::preset_k40(),
            u0: None,
        }
    }
}

impl FracRdProblem {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config(format!(
                "fracrd: alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if self.m_nodes < 3 {
            return Err(Error::config("fracrd: need at least 3 grid points"));
        }
        if !(self.x_max > self.x_min) || !(self.t_end > 0.0) {
            return Err(Error::config("fracrd: empty space or time interval"));
        }
        if [self.k_diff, self.k1, self.k2, self.k3]
            .iter()
            .any(|k| !(*k >= 0.0))
        {
            return Err(Error::config("fracrd: rate constants must be non-negative"));
        }
        if let Some(u0) = &self.u0 {
            if u0.len() != SPECIES * self.m_nodes {
                return Err(Error::config(format!(
                    "fracrd: u0 has {} values, expected {}",
                    u0.len(),
                    SPECIES * self.m_nodes
                )));
            }
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.m_nodes as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.m_nodes)
            .map(|i| self.x_min + i as f64 * self.dx())
            .collect()
    }

    /// `u₁ = ½(1 + tanh(−5x))`, `u₂ = ½(1 + tanh(5x))`, `u₃ = 0`.
    pub fn smoothed_steps(&self) -> Vec<f64> {
        let x = self.grid();
        let mut u = Vec::with_capacity(SPECIES * self.m_nodes);
        u.extend(x.iter().map(|x| 0.5 * (1.0 + (-5.0 * x).tanh())));
        u.extend(x.iter().map(|x| 0.5 * (1.0 + (5.0 * x).tanh())));
        u.extend(std::iter::repeat_n(0.0, self.m_nodes));
        u
    }

    pub fn initial_state(&self) -> Vec<f64> {
        self.u0.clone().unwrap_or_else(|| self.smoothed_steps())
    }
}

/// Periodic second-difference matrix on `m` points with spacing `dx`.
pub fn periodic_laplacian(m: usize, dx: f64) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(m, m);
    let c = 1.0 / (dx * dx);
    for i in 0..m {
        s[(i, i)] -= 2.0 * c;
        s[(i, (i + 1) % m)] += c;
        s[(i, (i + m - 1) % m)] += c;
    }
    s
}

/// `L = K I₃⊗S + R`.
pub fn linear_operator(p: &FracRdProblem) -> DMatrix<f64> {
    let m = p.m_nodes;
    let s = periodic_laplacian(m, p.dx()) * p.k_diff;
    let mut l = DMatrix::zeros(SPECIES * m, SPECIES * m);
    for block in 0..SPECIES {
        l.view_mut((block * m, block * m), (m, m)).copy_from(&s);
    }
    let k23 = p.k2 + p.k3;
    for i in 0..m {
        l[(i, 2 * m + i)] += k23;
        l[(m + i, 2 * m + i)] += p.k2;
        l[(2 * m + i, 2 * m + i)] -= k23;
    }
    l
}

/// `k₁ e⊗(v₁v₂)`.
fn reaction(p: &FracRdProblem, v: &DVector<f64>) -> DVector<f64> {
    let m = p.m_nodes;
    let mut out = DVector::zeros(SPECIES * m);
    for i in 0..m {
        let r = p.k1 * v[i] * v[m + i];
        out[i] = -r;
        out[m + i] = -r;
        out[2 * m + i] = r;
    }
    out
}

/// `Σₓ (u₁ + u₃)`, invariant under the exact and the discrete flow.
pub fn conserved_sum(m: usize, u: &[f64]) -> f64 {
    u[..m].iter().sum::<f64>() + u[2 * m..3 * m].iter().sum::<f64>()
}

/// Time stepper holding the engine and the current state.
pub struct FracRd {
    problem: FracRdProblem,
    l: DMatrix<f64>,
    u0: DVector<f64>,
    u: DVector<f64>,
    g: DVector<f64>,
    t: f64,
    engine: ConvolutionEngine,
}

impl FracRd {
    pub fn new(problem: FracRdProblem) -> Result<Self> {
        problem.validate()?;
        let kernel = power_kernel(problem.alpha)?;
        let l = linear_operator(&problem);
        let u0 = DVector::from_vec(problem.initial_state());
        let g = &l * &u0 + reaction(&problem, &u0);
        let cfg = EngineConfig::new(problem.h_min, problem.base, problem.t_end, problem.contour);
        let engine = ConvolutionEngine::new(kernel, cfg, g.as_slice())?;
        Ok(Self {
            problem,
            l,
            u: u0.clone(),
            u0,
            g,
            t: 0.0,
            engine,
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> &[f64] {
        self.u.as_slice()
    }

    pub fn engine(&self) -> &ConvolutionEngine {
        &self.engine
    }

    /// Solves for the state at `t + h` without committing it; returns the
    /// state and `g` of it.
    pub fn trial(&mut self, h: f64) -> Result<(DVector<f64>, DVector<f64>)> {
        let tn = self.t + h;
        let hist = self.engine.history(tn)?;
        let (wp, wn) = self.engine.step_weights(tn)?;
        let n = self.l.nrows();
        let lhs = DMatrix::<f64>::identity(n, n) - &self.l * wn;
        let rhs = &self.l * &self.u * wp
            + reaction(&self.problem, &self.u) * (wp + wn)
            + DVector::from_vec(hist)
            + &self.u0;
        let un = lhs.lu().solve(&rhs).ok_or_else(|| Error::Solver {
            t: tn,
            reason: "singular step matrix".into(),
        })?;
        let gn = &self.l * &un + reaction(&self.problem, &un);
        Ok((un, gn))
    }

    pub fn commit(&mut self, h: f64, u: DVector<f64>, g: DVector<f64>) -> Result<()> {
        let tn = self.t + h;
        self.engine.commit(tn, g.as_slice())?;
        self.t = tn;
        self.u = u;
        self.g = g;
        Ok(())
    }

    /// Fixed step of size `h`.
    pub fn step(&mut self, h: f64) -> Result<()> {
        let (u, g) = self.trial(h)?;
        self.commit(h, u, g)
    }
}

fn columns(m: usize) -> Vec<String> {
    let mut cols = vec!["sum13".to_string()];
    for s in 1..=SPECIES {
        cols.extend((0..m).map(|i| format!("u{s}_{i}")));
    }
    cols
}

fn record(m: usize, u: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(1 + u.len());
    v.push(conserved_sum(m, u));
    v.extend_from_slice(u);
    v
}

/// Adaptive run with the first-difference controller.
pub fn fracrd_solve(p: &FracRdProblem) -> Result<Trajectory> {
    let mut solver = FracRd::new(p.clone())?;
    let m = p.m_nodes;
    let c = solver.engine.kernel().controller_constant(p.t_end);
    let ctrl = ControllerConfig::new(p.tol, c, p.h0, p.h_min);
    ctrl.validate()?;
    let cols = columns(m);
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut traj = Trajectory::new("fracrd", &col_refs, "gamma1");
    traj.push(0.0, record(m, solver.state()), 0, 0.0);
    let mut gamma1 = 0.0;
    let mut h_last = p.h0;
    while solver.t < p.t_end {
        let n = solver.engine.steps();
        let mut h_prop = if n < 2 {
            p.h0
        } else {
            propose_step_first_diff(&ctrl, h_last, gamma1)
        };
        if solver.t + h_prop >= p.t_end - p.h_min {
            h_prop = p.t_end - solver.t;
        }
        let (t0, g_prev) = (solver.t, solver.g.clone());
        let outcome = if n < 2 {
            solver.trial(h_prop).map(|(u, g)| {
                let gam = first_difference(t0, t0 + h_prop, g_prev.as_slice(), g.as_slice());
                (h_prop, u, g, gam, 0)
            })
        } else {
            control_step(&ctrl, t0, h_prop, |h| {
                let (u, g) = solver.trial(h)?;
                let gam = first_difference(t0, t0 + h, g_prev.as_slice(), g.as_slice());
                Ok(((u, g), gam))
            })
            .map(|out| (out.h, out.value.0, out.value.1, out.gamma, out.rejects))
        };
        let (h, u, g, gam, rejects) = match outcome {
            Ok(step) => step,
            Err(e @ (Error::Controller { .. } | Error::Solver { .. })) => {
                traj.stop = Stop::Stalled {
                    t: solver.t,
                    message: e.to_string(),
                };
                break;
            }
            Err(e) => return Err(e),
        };
        solver.commit(h, u, g)?;
        gamma1 = gam;
        h_last = h;
        traj.push(solver.t, record(m, solver.state()), rejects, gam);
    }
    traj.counters = solver.engine.counters();
    Ok(traj)
}
