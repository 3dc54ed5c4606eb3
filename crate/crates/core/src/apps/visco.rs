//! Fractional viscoelasticity, `M ü + A u = γ ∫₀ᵗ f(t − τ)(Au(τ) − b(τ)) dτ + b(t) =: c(t)`
//! with the relaxation kernel `F(s) = 1/(1 + s^α)`.
//!
//! Time stepping is Störmer-Verlet in momentum form, `v = M u̇`, driven by
//! the integrating controller. `c_{n+1}` combines the engine history with the
//! newest subinterval, which only involves the already known `u_{n+1}`, so
//! the scheme stays explicit.

use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::contour::ContourConstants;
use crate::control::IntegratorState;
use crate::engine::{ConvolutionEngine, EngineConfig};
use crate::harness::{Stop, Trajectory};
use crate::kernels::mittag_leffler_kernel;
use crate::{Error, Result};

/// Amplitude of the load on the loaded edge: `20 e^{1/((2t−5)⁸−1)}` on `(2, 3)`.
pub fn boundary_force(t: f64) -> f64 {
    if t > 2.0 && t < 3.0 {
        20.0 * (1.0 / ((2.0 * t - 5.0).powi(8) - 1.0)).exp()
    } else {
        0.0
    }
}

#[derive(Clone, Debug)]
pub struct ViscoProblem {
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    /// Spatial shape of the load; `b(t) = boundary_force(t)·load`.
    pub load: DVector<f64>,
    pub alpha: f64,
    pub gamma: f64,
    /// Accuracy parameter `ε` of the integrating controller.
    pub eps: f64,
    pub t_end: f64,
    /// Lowest mode with zero momentum when absent.
    pub u0: Option<DVector<f64>>,
    pub v0: Option<DVector<f64>>,
    /// Unknown recorded in the trajectory.
    pub probe: usize,
    pub h_min: f64,
    pub base: u32,
    pub contour: ContourConstants,
    pub max_steps: usize,
}

impl ViscoProblem {
    /// Paper parameters `α = ½`, `γ = 0.3`, `T = 6` on given matrices.
    pub fn new(
        mass: DMatrix<f64>,
        stiffness: DMatrix<f64>,
        load: DVector<f64>,
        probe: usize,
        eps: f64,
    ) -> Self {
        Self {
            mass,
            stiffness,
            load,
            alpha: 0.5,
            gamma: 0.3,
            eps,
            t_end: 6.0,
            u0: None,
            v0: None,
            probe,
            h_min: 1e-8,
            base: 5,
            contour: ContourConstants::preset_k35(),
            max_steps: 10_000_000,
        }
    }

    pub fn from_cantilever(c: &super::elasticity::Cantilever, eps: f64) -> Self {
        Self::new(
            c.mass.clone(),
            c.stiffness.clone(),
            c.load.clone(),
            c.probe,
            eps,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.mass.nrows();
        if self.mass.ncols() != n || self.stiffness.shape() != (n, n) || self.load.len() != n {
            return Err(Error::config(
                "visco: M, A and the load must have matching sizes",
            ));
        }
        if self.mass != self.mass.transpose() || self.stiffness != self.stiffness.transpose() {
            return Err(Error::config("visco: M and A must be exactly symmetric"));
        }
        if self.probe >= n {
            return Err(Error::config(format!(
                "visco: probe {} outside {} unknowns",
                self.probe, n
            )));
        }
        if !(self.eps > 0.0 && self.t_end > 0.0 && self.h_min > 0.0) {
            return Err(Error::config("visco: need eps, t_end and h_min positive"));
        }
        for (name, v) in [("u0", &self.u0), ("v0", &self.v0)] {
            if v.as_ref().is_some_and(|v| v.len() != n) {
                return Err(Error::config(format!(
                    "visco: {name} must have {n} entries"
                )));
            }
        }
        Ok(())
    }
}

/// Eigenvector of `A φ = ω² M φ` for the smallest `ω²`, normalised to
/// `φᵀMφ = 1` with a non-negative entry at `probe`.
pub fn lowest_mode(
    mass: &DMatrix<f64>,
    stiffness: &DMatrix<f64>,
    probe: usize,
) -> Result<(f64, DVector<f64>)> {
    let chol = mass
        .clone()
        .cholesky()
        .ok_or_else(|| Error::config("mass matrix is not positive definite"))?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(stiffness)
        .expect("Cholesky factor is invertible");
    let c = l
        .solve_lower_triangular(&x.transpose())
        .expect("Cholesky factor is invertible");
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let k = eig.eigenvalues.imin();
    let y = eig.eigenvectors.column(k).into_owned();
    let mut phi = l
        .tr_solve_lower_triangular(&y)
        .expect("Cholesky factor is invertible");
    if phi[probe] < 0.0 {
        phi = -phi;
    }
    Ok((eig.eigenvalues[k], phi))
}

/// State at the end of a run.
#[derive(Clone, Debug)]
pub struct ViscoState {
    pub t: f64,
    pub u: DVector<f64>,
    /// Momentum `M u̇`.
    pub v: DVector<f64>,
}

#[derive(Clone, Debug)]
pub struct ViscoRun {
    pub trajectory: Trajectory,
    pub last: ViscoState,
    pub wall_seconds: f64,
}

/// `½ vᵀM⁻¹v + ½ uᵀAu`.
pub fn discrete_energy(
    m_chol: &Cholesky<f64, Dyn>,
    a: &DMatrix<f64>,
    u: &DVector<f64>,
    v: &DVector<f64>,
) -> f64 {
    0.5 * v.dot(&m_chol.solve(v)) + 0.5 * u.dot(&(a * u))
}

/// `‖u‖_A + ‖u̇‖_M` of the difference to `reference`, relative to the
/// reference's own norm.
pub fn relative_energy_error(
    p: &ViscoProblem,
    state: &ViscoState,
    reference: &ViscoState,
) -> Result<f64> {
    let chol = p
        .mass
        .clone()
        .cholesky()
        .ok_or_else(|| Error::config("mass matrix is not positive definite"))?;
    let norm = |u: &DVector<f64>, v: &DVector<f64>| {
        u.dot(&(&p.stiffness * u)).max(0.0).sqrt() + v.dot(&chol.solve(v)).max(0.0).sqrt()
    };
    let du = &state.u - &reference.u;
    let dv = &state.v - &reference.v;
    Ok(norm(&du, &dv) / norm(&reference.u, &reference.v))
}

pub fn visco_solve(p: &ViscoProblem) -> Result<ViscoRun> {
    p.validate()?;
    let start = Instant::now();
    let a = &p.stiffness;
    let chol = p
        .mass
        .clone()
        .cholesky()
        .ok_or_else(|| Error::config("mass matrix is not positive definite"))?;
    let minv = |x: &DVector<f64>| chol.solve(x);
    let aop = |x: &DVector<f64>| a * x;
    let mut u = match &p.u0 {
        Some(u0) => u0.clone(),
        None => lowest_mode(&p.mass, a, p.probe)?.1,
    };
    let mut v = p.v0.clone().unwrap_or_else(|| DVector::zeros(u.len()));
    let b_at = |t: f64| &p.load * boundary_force(t);

    let kernel = mittag_leffler_kernel(p.alpha)?;
    let cfg = EngineConfig::new(p.h_min, p.base, p.t_end, p.contour);
    let b0 = b_at(0.0);
    let g0 = a * &u - &b0;
    let mut engine = ConvolutionEngine::new(kernel, cfg, g0.as_slice())?;
    let mut ctrl = IntegratorState::init(p.eps, &minv, &aop, &u, &v, 0.0, &b0)?;
    let mut c = b0;

    let mut traj = Trajectory::new("visco", &["u", "du", "ddu", "energy"], "z");
    let record = |u: &DVector<f64>, v: &DVector<f64>, c: &DVector<f64>| {
        let vel = minv(v)[p.probe];
        let acc = minv(&(c - a * u))[p.probe];
        vec![u[p.probe], vel, acc, discrete_energy(&chol, a, u, v)]
    };
    traj.push(0.0, record(&u, &v, &c), 0, ctrl.z);

    let mut t = 0.0;
    while t < p.t_end {
        if engine.steps() >= p.max_steps {
            traj.stop = Stop::Stalled {
                t,
                message: format!("step cap {} reached", p.max_steps),
            };
            break;
        }
        let mut h = match ctrl.integrating_step(&minv, &aop, &u, &v) {
            Ok(h) => h,
            Err(e @ Error::Controller { .. }) => {
                traj.stop = Stop::Stalled {
                    t,
                    message: e.to_string(),
                };
                break;
            }
            Err(e) => return Err(e),
        };
        if t + h >= p.t_end - p.h_min {
            h = p.t_end - t;
        }
        let tn = t + h;
        let half = &v + (&c - a * &u) * (0.5 * h);
        let un = &u + minv(&half) * h;
        let bn = b_at(tn);
        let gn = a * &un - &bn;
        let hist = engine.history(tn)?;
        let (wp, wn) = engine.step_weights(tn)?;
        let gp = DVector::from_column_slice(engine.last_sample());
        let cn = (&gn * wn + gp * wp + DVector::from_vec(hist)) * p.gamma + &bn;
        engine.commit(tn, gn.as_slice())?;
        v = &half + (&cn - a * &un) * (0.5 * h);
        u = un;
        c = cn;
        t = tn;
        ctrl.push_c(t, c.clone());
        traj.push(t, record(&u, &v, &c), 0, ctrl.z);
    }
    traj.counters = engine.counters();
    Ok(ViscoRun {
        trajectory: traj,
        last: ViscoState { t, u, v },
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}
