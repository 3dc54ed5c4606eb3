//! Fast, oblivious, variable-step convolution quadrature.
//!
//! For a grid `0 = t_0 < t_1 < …` with steps at least `h_min`, the engine
//! approximates `u(t_n) = ∫₀^{t_n} f(t_n − τ) g(τ) dτ` with `g` replaced by its
//! piecewise linear interpolant. The triangle `{0 ≤ τ ≤ t ≤ T}` is covered by a
//! mosaic of patches. Level `ℓ` owns patches whose distances `t − τ` stay inside
//! `[lb_ℓ, ub_ℓ]`, so the kernel on each patch is the contour sum
//!
//! ```text
//! f(t − τ) ≈ Σ_k w_k F(λ_k) e^{(t − τ) λ_k}
//! ```
//!
//! on the level-`ℓ` hyperbola, and the patch integral reduces to the solutions
//! `y_k` of the scalar ODEs `y' = λ_k y + g`. These are advanced by exponential
//! Euler. Thin gaps between patches and the newest subinterval are integrated
//! directly with `f₁ = ∫f` and `f₂ = ∫f₁`.
//!
//! # Bookkeeping
//!
//! Positions on the time axis are integer multiples of `h_min` ("units"). With
//! `⌈t_n/h_min⌉ = 2 + Σ_ℓ b_ℓ B^{ℓ−1}` ([`decompose`]), the level-`ℓ` patch at
//! `t_n` is `[a_ℓ, a_ℓ + b_ℓ B^{ℓ−1}]` with `a_ℓ = Σ_{k>ℓ} b_k B^{k−1}`, a
//! multiple of `B^ℓ`. Each level keeps one running bank integrating the
//! current block `[m B^ℓ, (m+1) B^ℓ]` and a short queue of snapshots of that
//! bank taken whenever a sub-boundary `m B^ℓ + b B^{ℓ−1}` is crossed. A patch
//! query is answered from a snapshot, from the running bank, or is empty when
//! no grid point falls inside it.
//!
//! [`ConvolutionEngine::history`] is read-only with respect to the mosaic, so a
//! step-size controller may probe several trial times before
//! [`ConvolutionEngine::commit`] fixes the next grid point.

use std::collections::VecDeque;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::{build_contour, level_bounds, plan_level, Contour, ContourConstants};
use crate::kernels::SectorialTransform;
use crate::special::exp_phi12;
use crate::{Error, Result};

/// Snapshots retained per level besides the running bank.
const SNAPSHOTS: usize = 3;
/// Relative slack for floating comparisons against level bounds.
const SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    /// `⌈t/h⌉ − 2`; zero or negative in the all-direct regime.
    pub n: i64,
    /// `b_1..b_L`, each in `1..=B`.
    pub digits: Vec<u32>,
}

impl Decomposition {
    pub fn levels(&self) -> usize {
        self.digits.len()
    }
}

/// Smallest integer `m` with `m·h ≥ t`, evaluated in the same floating
/// arithmetic used for patch boundaries.
pub fn ceil_units(t: f64, h: f64) -> i64 {
    let mut m = (t / h).ceil() as i64;
    while (m as f64) * h < t {
        m += 1;
    }
    while m > 0 && ((m - 1) as f64) * h >= t {
        m -= 1;
    }
    m
}

/// Writes `⌈t/h⌉ − 2` in bijective base `B`, least significant digit first.
pub fn decompose(t: f64, h: f64, base: u32) -> Decomposition {
    let n = ceil_units(t, h) - 2;
    let b = base as i64;
    let mut rest = n;
    let mut digits = Vec::new();
    while rest > 0 {
        let mut r = rest % b;
        if r == 0 {
            r = b;
        }
        digits.push(r as u32);
        rest = (rest - r) / b;
    }
    Decomposition { n, digits }
}

/// Operation counts of one engine, reported as JSON by the harness.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    #[serde(rename = "F_evaluations")]
    pub f_evaluations: u64,
    pub ode_advances: u64,
    pub direct_steps: u64,
    pub stored_vectors_peak: u64,
    /// Distinct historical `g` timestamps read, summed over steps.
    pub g_reads: u64,
    /// Largest per-step value of the above.
    pub g_reads_step_peak: u64,
    /// Contour inversions at distances outside the contour's own interval.
    pub out_of_interval: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub h_min: f64,
    #[serde(rename = "B")]
    pub base: u32,
    /// Final time `T` the level array is sized for.
    pub horizon: f64,
    pub contour: ContourConstants,
    /// Store only nodes `k ≥ 0` and fold the conjugate half.
    pub symmetric: bool,
}

impl EngineConfig {
    pub fn new(h_min: f64, base: u32, horizon: f64, contour: ContourConstants) -> Self {
        Self {
            h_min,
            base,
            horizon,
            contour,
            symmetric: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h_min > 0.0 && self.h_min.is_finite()) {
            return Err(Error::config(format!(
                "h_min must be positive, got {}",
                self.h_min
            )));
        }
        if self.base < 2 {
            return Err(Error::config(format!(
                "base B must be >= 2, got {}",
                self.base
            )));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::config(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        Ok(())
    }

    /// Number of levels allocated for the horizon.
    pub fn max_levels(&self) -> usize {
        decompose(self.horizon, self.h_min, self.base).levels() + 1
    }
}

/// ODE bank of one level: `y_k(tcur)` for the stored nodes, integrated over
/// the grid points of `[tini, tcur]` inside block `[base, base + B^ℓ]`.
#[derive(Clone, Debug)]
pub struct PatchState {
    /// Block start in units of `h_min`.
    pub base: u64,
    /// Sub-patch of the block that contains `tcur`, in `1..=B`.
    pub b: u32,
    pub tini: f64,
    pub tcur: f64,
    pub gini: Vec<f64>,
    pub gcur: Vec<f64>,
    /// Row-major `nodes × dim`.
    pub data: Vec<Complex64>,
}

impl PatchState {
    fn start(t: f64, g: &[f64], nodes: usize) -> Self {
        Self {
            base: 0,
            b: 1,
            tini: t,
            tcur: t,
            gini: g.to_vec(),
            gcur: g.to_vec(),
            data: vec![Complex64::new(0.0, 0.0); nodes * g.len()],
        }
    }
}

/// Exponential Euler step of `y' = λ_k y + g` with `g` linear between
/// `(patch.tcur, patch.gcur)` and `(t_n, g_n)`:
///
/// ```text
/// y ← e^{z} y + dt (φ₁(z) g_prev + φ₂(z) (g_n − g_prev)),   z = dt λ_k
/// ```
pub fn ode_advance(
    patch: &mut PatchState,
    nodes: &[Complex64],
    t_n: f64,
    g_n: &[f64],
) -> Result<()> {
    let dt = t_n - patch.tcur;
    if !(dt > 0.0) {
        return Err(Error::Ordering {
            t: t_n,
            prev: patch.tcur,
        });
    }
    let dim = g_n.len();
    for (k, &lambda) in nodes.iter().enumerate() {
        let z = lambda * dt;
        let (e, p1, p2) = exp_phi12(z);
        let (p1, p2) = (p1 * dt, p2 * dt);
        let row = &mut patch.data[k * dim..(k + 1) * dim];
        for ((y, &gp), &gn) in row.iter_mut().zip(&patch.gcur).zip(g_n) {
            *y = e * *y + p1 * gp + p2 * (gn - gp);
        }
    }
    patch.gcur.copy_from_slice(g_n);
    patch.tcur = t_n;
    Ok(())
}

/// Restarts `patch` at `t_n` in the block of size `B·unit` that contains it.
pub fn ode_restart(patch: &mut PatchState, t_n: f64, g_n: &[f64], unit: u64, base: u32, h: f64) {
    let block = unit * base as u64;
    let at = |u: u64| u as f64 * h;
    let mut m = (t_n / (block as f64 * h)).floor().max(0.0) as u64;
    while at((m + 1) * block) <= t_n {
        m += 1;
    }
    while m > 0 && at(m * block) > t_n {
        m -= 1;
    }
    patch.base = m * block;
    patch.b = sub_patch(patch.base, unit, base, 1, t_n, h);
    patch.tini = t_n;
    patch.tcur = t_n;
    patch.gini.copy_from_slice(g_n);
    patch.gcur.copy_from_slice(g_n);
    patch
        .data
        .iter_mut()
        .for_each(|y| *y = Complex64::new(0.0, 0.0));
}

/// Smallest `b ≥ from` with `t ≤ base + b·unit`, capped at `B`.
fn sub_patch(block_base: u64, unit: u64, base: u32, from: u32, t: f64, h: f64) -> u32 {
    let mut b = from.max(1);
    while b < base && ((block_base + b as u64 * unit) as f64) * h < t {
        b += 1;
    }
    b
}

/// One piece of the history integral assembled at the last evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Segment {
    Ode { level: usize, t0: f64, t1: f64 },
    Direct { t0: f64, t1: f64 },
}

impl Segment {
    pub fn span(&self) -> (f64, f64) {
        match *self {
            Segment::Ode { t0, t1, .. } | Segment::Direct { t0, t1 } => (t0, t1),
        }
    }
}

#[derive(Clone, Debug)]
struct Snapshot {
    state: PatchState,
    b_lo: u32,
    b_hi: u32,
}

#[derive(Debug)]
struct Level {
    contour: Contour,
    /// Stored nodes `λ_k` (all `2K+1`, or `k ≥ 0` in symmetric mode).
    nodes: Vec<Complex64>,
    /// `w_k F(λ_k)` for the stored nodes, doubled for `k ≥ 1` in symmetric mode.
    coef: Vec<Complex64>,
    unit: u64,
    lb: f64,
    ub: f64,
    bank: PatchState,
    snaps: VecDeque<Snapshot>,
    /// Largest sub-boundary position whose snapshot has been dropped.
    evicted_hi: Option<u64>,
}

enum Lookup<'a> {
    Found(&'a PatchState),
    Empty,
}

/// Evaluates discrete convolutions on a growing grid with `O(log N)` memory.
pub struct ConvolutionEngine {
    kernel: SectorialTransform,
    cfg: EngineConfig,
    dim: usize,
    levels: Vec<Level>,
    g0: Vec<f64>,
    /// Last three grid points and samples, newest last.
    grid: VecDeque<(f64, Vec<f64>)>,
    steps: usize,
    counters: Counters,
    plan: Vec<Segment>,
}

impl std::fmt::Debug for ConvolutionEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConvolutionEngine")
            .field("kernel", &self.kernel.name())
            .field("cfg", &self.cfg)
            .field("dim", &self.dim)
            .field("levels", &self.levels.len())
            .field("steps", &self.steps)
            .field("counters", &self.counters)
            .finish()
    }
}

impl ConvolutionEngine {
    /// Starts a convolution at `t_0 = 0` with sample `g_0`.
    pub fn new(kernel: SectorialTransform, cfg: EngineConfig, g0: &[f64]) -> Result<Self> {
        cfg.validate()?;
        cfg.contour.validate(kernel.phi)?;
        if g0.is_empty() {
            return Err(Error::config("g must have at least one component"));
        }
        let kk = cfg.contour.k;
        let lmax = cfg.max_levels();
        let mut levels = Vec::with_capacity(lmax);
        let mut counters = Counters::default();
        let mut unit: u64 = 1;
        for level in 1..=lmax {
            let plan = plan_level(level, cfg.h_min, cfg.base, &cfg.contour, kernel.sigma)?;
            let contour = build_contour(plan, &cfg.contour, &kernel)?;
            counters.f_evaluations += contour.f_evaluations() as u64;
            let (first, fold) = if cfg.symmetric { (kk, 2.0) } else { (0, 1.0) };
            let nodes = contour.all_nodes()[first..].to_vec();
            let coef = contour.all_weights()[first..]
                .iter()
                .zip(&contour.transform_values()[first..])
                .enumerate()
                .map(|(j, (w, f))| {
                    let scale = if cfg.symmetric && j > 0 { fold } else { 1.0 };
                    w * f * scale
                })
                .collect();
            let (lb, ub) = level_bounds(level, cfg.h_min, cfg.base);
            let bank = PatchState::start(0.0, g0, nodes.len());
            levels.push(Level {
                contour,
                nodes,
                coef,
                unit,
                lb,
                ub,
                bank,
                snaps: VecDeque::new(),
                evicted_hi: None,
            });
            unit = unit
                .checked_mul(cfg.base as u64)
                .ok_or_else(|| Error::config("horizon / h_min too large for the level array"))?;
        }
        let mut engine = Self {
            kernel,
            cfg,
            dim: g0.len(),
            levels,
            g0: g0.to_vec(),
            grid: VecDeque::from([(0.0, g0.to_vec())]),
            steps: 0,
            counters,
            plan: Vec::new(),
        };
        engine.update_memory();
        Ok(engine)
    }

    pub fn kernel(&self) -> &SectorialTransform {
        &self.kernel
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of committed grid points after `t_0`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn levels_allocated(&self) -> usize {
        self.levels.len()
    }

    pub fn contour(&self, level: usize) -> Option<&Contour> {
        self.levels.get(level.wrapping_sub(1)).map(|l| &l.contour)
    }

    pub fn last_time(&self) -> f64 {
        self.grid.back().map(|(t, _)| *t).unwrap_or(0.0)
    }

    pub fn last_sample(&self) -> &[f64] {
        &self.grid.back().expect("grid holds t_0").1
    }

    /// Up to three most recent `(t_j, g_j)`, oldest first.
    pub fn recent(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.grid.iter().map(|(t, g)| (*t, g.as_slice()))
    }

    pub fn counters(&self) -> Counters {
        let mut c = self.counters.clone();
        c.out_of_interval = self
            .levels
            .iter()
            .map(|l| l.contour.out_of_interval_calls())
            .sum();
        c
    }

    /// Segments used by the last [`history`](Self::history) call, plus the
    /// newest subinterval after [`evaluate`](Self::evaluate).
    pub fn last_plan(&self) -> &[Segment] {
        &self.plan
    }

    /// `(f₁(d), f₂(d))` on the contour of the first level covering `d`.
    pub fn f12(&self, d: f64) -> Result<(f64, f64)> {
        if d == 0.0 {
            return Ok((0.0, 0.0));
        }
        let level = self.level_for(d)?;
        Ok(self.levels[level - 1].contour.eval_f12(d))
    }

    fn level_for(&self, d: f64) -> Result<usize> {
        self.levels
            .iter()
            .position(|l| d >= l.lb * (1.0 - SLACK) && d <= l.ub * (1.0 + SLACK))
            .map(|i| i + 1)
            .ok_or(Error::StepScale {
                distance: d,
                h_min: self.cfg.h_min,
            })
    }

    /// Levels for the two endpoint distances of a direct step, preferring one
    /// contour for both so that their inversion errors largely cancel.
    fn levels_for_pair(&self, d1: f64, d2: f64) -> Result<(usize, usize)> {
        if d2 == 0.0 {
            let l = self.level_for(d1)?;
            return Ok((l, l));
        }
        let common = self.levels.iter().position(|l| {
            let inside = |d: f64| d >= l.lb * (1.0 - SLACK) && d <= l.ub * (1.0 + SLACK);
            inside(d1) && inside(d2)
        });
        match common {
            Some(i) => Ok((i + 1, i + 1)),
            None => Ok((self.level_for(d1)?, self.level_for(d2)?)),
        }
    }

    /// Weights `(w_prev, w_new)` of the newest subinterval `[t_{n−1}, t_n]`:
    /// its contribution is `w_prev g_{n−1} + w_new g_n`.
    pub fn step_weights(&self, t_n: f64) -> Result<(f64, f64)> {
        let prev = self.last_time();
        self.check_step(t_n, prev)?;
        let h = t_n - prev;
        let (f1, f2) = self.f12(h)?;
        Ok((f1 - f2 / h, f2 / h))
    }

    fn check_step(&self, t_n: f64, prev: f64) -> Result<()> {
        if !(t_n > prev) || !t_n.is_finite() {
            return Err(Error::Ordering { t: t_n, prev });
        }
        let h = t_n - prev;
        if h < self.cfg.h_min * (1.0 - SLACK) {
            return Err(Error::StepScale {
                distance: h,
                h_min: self.cfg.h_min,
            });
        }
        Ok(())
    }

    /// Linear interpolation integral over one subinterval evaluated at `t_n`.
    fn direct_into(
        &self,
        out: &mut [f64],
        t_n: f64,
        tj: f64,
        gj: &[f64],
        tj1: f64,
        gj1: &[f64],
    ) -> Result<()> {
        let d1 = t_n - tj;
        let d2 = t_n - tj1;
        let (l1, l2) = self.levels_for_pair(d1, d2)?;
        let (a1, a2) = self.levels[l1 - 1].contour.eval_f12(d1);
        let (b1, b2) = self.levels[l2 - 1].contour.eval_f12(d2);
        let dt = tj1 - tj;
        for ((o, &x), &y) in out.iter_mut().zip(gj).zip(gj1) {
            let slope = (y - x) / dt;
            *o += a1 * x + a2 * slope - b1 * y - b2 * slope;
        }
        Ok(())
    }

    /// `Σ_k w_k F(λ_k) e^{(t_n − tcur) λ_k} y_k`, real part.
    fn ode_into(&self, out: &mut [f64], level: &Level, state: &PatchState, t_n: f64) {
        let d = t_n - state.tcur;
        let dim = self.dim;
        for (k, (&lambda, &c)) in level.nodes.iter().zip(&level.coef).enumerate() {
            let factor = c * (lambda * d).exp();
            for (o, y) in out.iter_mut().zip(&state.data[k * dim..(k + 1) * dim]) {
                *o += (factor * y).re;
            }
        }
    }

    fn lookup(&self, li: usize, a: u64, b: u32) -> Result<Lookup<'_>> {
        let level = &self.levels[li];
        for s in level.snaps.iter().rev() {
            if s.state.base == a && s.b_lo <= b && b <= s.b_hi {
                return Ok(Lookup::Found(&s.state));
            }
        }
        let bank = &level.bank;
        if bank.base == a && bank.b <= b {
            return Ok(Lookup::Found(bank));
        }
        let position = a + b as u64 * level.unit;
        if level.evicted_hi.is_some_and(|hi| position <= hi) {
            return Err(Error::Bookkeeping(format!(
                "level {} patch ending at {} units was dropped before use",
                li + 1,
                position
            )));
        }
        Ok(Lookup::Empty)
    }

    /// History part of `u(t_n)`: everything except the newest subinterval
    /// `[t_{n−1}, t_n]`. Does not modify the mosaic.
    pub fn history(&mut self, t_n: f64) -> Result<Vec<f64>> {
        let (t_prev, g_prev) = {
            let (t, g) = self.grid.back().expect("grid holds t_0");
            (*t, g.clone())
        };
        self.check_step(t_n, t_prev)?;
        let h = self.cfg.h_min;
        let dec = decompose(t_n, h, self.cfg.base);
        let big_l = dec.levels();
        if big_l > self.levels.len() {
            return Err(Error::Horizon {
                t: t_n,
                level: big_l,
                available: self.levels.len(),
            });
        }
        let mut out = vec![0.0; self.dim];
        let mut plan = Vec::with_capacity(2 * big_l + 2);
        let mut reads: Vec<f64> = Vec::with_capacity(2 * big_l + 3);
        let mut cursor_t = 0.0;
        let mut cursor_g = self.g0.clone();

        let mut above: u64 = 0;
        for li in (0..big_l).rev() {
            let unit = self.levels[li].unit;
            let b = dec.digits[li];
            let a = above;
            above += b as u64 * unit;
            let state = match self.lookup(li, a, b)? {
                Lookup::Found(s) => s,
                Lookup::Empty => continue,
            };
            let level = &self.levels[li];
            let lo = a as f64 * h;
            let hi = above as f64 * h;
            if state.tini < lo || state.tcur > hi {
                return Err(Error::Bookkeeping(format!(
                    "level {} state [{}, {}] outside patch [{lo}, {hi}]",
                    li + 1,
                    state.tini,
                    state.tcur
                )));
            }
            if t_n - state.tcur < level.lb * (1.0 - SLACK)
                || t_n - state.tini > level.ub * (1.0 + SLACK)
            {
                return Err(Error::Bookkeeping(format!(
                    "level {} distances [{}, {}] outside [{}, {}]",
                    li + 1,
                    t_n - state.tcur,
                    t_n - state.tini,
                    level.lb,
                    level.ub
                )));
            }
            if state.tini > cursor_t {
                self.direct_into(&mut out, t_n, cursor_t, &cursor_g, state.tini, &state.gini)?;
                plan.push(Segment::Direct {
                    t0: cursor_t,
                    t1: state.tini,
                });
                reads.extend([cursor_t, state.tini]);
            }
            if state.tcur > state.tini {
                self.ode_into(&mut out, level, state, t_n);
                plan.push(Segment::Ode {
                    level: li + 1,
                    t0: state.tini,
                    t1: state.tcur,
                });
            }
            cursor_t = state.tcur;
            cursor_g.copy_from_slice(&state.gcur);
        }
        if t_prev > cursor_t {
            self.direct_into(&mut out, t_n, cursor_t, &cursor_g, t_prev, &g_prev)?;
            plan.push(Segment::Direct {
                t0: cursor_t,
                t1: t_prev,
            });
            reads.extend([cursor_t, t_prev]);
        }
        reads.push(t_prev);
        reads.sort_by(f64::total_cmp);
        reads.dedup();

        let direct = plan
            .iter()
            .filter(|s| matches!(s, Segment::Direct { .. }))
            .count();
        self.counters.direct_steps += direct as u64;
        self.counters.g_reads += reads.len() as u64;
        self.counters.g_reads_step_peak = self.counters.g_reads_step_peak.max(reads.len() as u64);
        self.plan = plan;
        Ok(out)
    }

    /// Appends `(t_n, g_n)` to the grid and advances every level's bank.
    pub fn commit(&mut self, t_n: f64, g_n: &[f64]) -> Result<()> {
        let t_prev = self.last_time();
        self.check_step(t_n, t_prev)?;
        if g_n.len() != self.dim {
            return Err(Error::config(format!(
                "g has {} components, expected {}",
                g_n.len(),
                self.dim
            )));
        }
        let h = self.cfg.h_min;
        let base = self.cfg.base;
        let mut advances = 0u64;
        for level in &mut self.levels {
            let unit = level.unit;
            let block = unit * base as u64;
            let tmax = (level.bank.base + block) as f64 * h;
            if t_n <= tmax {
                let b_new = sub_patch(level.bank.base, unit, base, level.bank.b, t_n, h);
                if b_new > level.bank.b {
                    let (lo, hi) = (level.bank.b, b_new - 1);
                    level.snapshot(lo, hi, SNAPSHOTS);
                }
                ode_advance(&mut level.bank, &level.nodes, t_n, g_n)?;
                advances += 1;
                level.bank.b = b_new;
                if t_n == tmax {
                    level.snapshot(base, base, SNAPSHOTS);
                    ode_restart(&mut level.bank, t_n, g_n, unit, base, h);
                }
            } else {
                let lo = level.bank.b;
                level.snapshot(lo, base, SNAPSHOTS);
                ode_restart(&mut level.bank, t_n, g_n, unit, base, h);
            }
        }
        self.counters.ode_advances += advances;
        self.grid.push_back((t_n, g_n.to_vec()));
        if self.grid.len() > 3 {
            self.grid.pop_front();
        }
        self.steps += 1;
        self.update_memory();
        Ok(())
    }

    /// `u(t_n)` for the sample `g_n`, then commits `(t_n, g_n)`.
    pub fn evaluate(&mut self, t_n: f64, g_n: &[f64]) -> Result<Vec<f64>> {
        let mut u = self.history(t_n)?;
        let (wp, wn) = self.step_weights(t_n)?;
        let t_prev = self.last_time();
        for ((o, &gp), &gn) in u.iter_mut().zip(self.last_sample()).zip(g_n) {
            *o += wp * gp + wn * gn;
        }
        self.plan.push(Segment::Direct {
            t0: t_prev,
            t1: t_n,
        });
        self.counters.direct_steps += 1;
        self.commit(t_n, g_n)?;
        Ok(u)
    }

    fn update_memory(&mut self) {
        let stored: usize = self
            .levels
            .iter()
            .map(|l| (1 + l.snaps.len()) * l.nodes.len())
            .sum();
        self.counters.stored_vectors_peak = self.counters.stored_vectors_peak.max(stored as u64);
    }
}

impl Level {
    fn snapshot(&mut self, b_lo: u32, b_hi: u32, keep: usize) {
        if self.snaps.len() == keep {
            if let Some(old) = self.snaps.pop_front() {
                let hi = old.state.base + old.b_hi as u64 * self.unit;
                self.evicted_hi = Some(self.evicted_hi.map_or(hi, |e| e.max(hi)));
            }
        }
        self.snaps.push_back(Snapshot {
            state: self.bank.clone(),
            b_lo,
            b_hi,
        });
    }
}
