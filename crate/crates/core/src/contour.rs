//! Hyperbolic contours and the truncated trapezoidal Laplace inversion.
//!
//! Level `ℓ` of the mosaic approximates `t ∈ [lb_ℓ, ub_ℓ]` with
//!
//! ```text
//! lb_ℓ = h_min (1 + Σ_{k=0}^{ℓ−2} Bᵏ),   ub_ℓ = h_min (1 + Σ_{k=0}^{ℓ} Bᵏ)
//! ```
//!
//! on the left hyperbola branch `γ(x) = μ (1 − sin(a + ix)) + σ`, sampled at
//! `x = kτ` for `k = −K..K` with `τ = C₁/K` and `μ = C₂ K/(Λ t_lo)`.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::kernels::SectorialTransform;
use crate::{Error, Result};

/// Contour shape `a`, strip width `d` (metadata), node count `K` and the
/// scaling constants `C₁`, `C₂`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourConstants {
    pub a: f64,
    pub d: f64,
    #[serde(rename = "K", alias = "k")]
    pub k: usize,
    #[serde(rename = "C1", alias = "c1")]
    pub c1: f64,
    #[serde(rename = "C2", alias = "c2")]
    pub c2: f64,
}

impl ContourConstants {
    /// `a = 0.8, d = 0.7, K = 50`.
    pub fn preset_k50() -> Self {
        Self {
            a: 0.8,
            d: 0.7,
            k: 50,
            c1: 6.567,
            c2: 0.066,
        }
    }

    /// `a = 1, d = 0.5, K = 40`.
    pub fn preset_k40() -> Self {
        Self {
            a: 1.0,
            d: 0.5,
            k: 40,
            c1: 6.036,
            c2: 0.0739,
        }
    }

    /// `a = 0.8, d = 0.7, K = 35`.
    pub fn preset_k35() -> Self {
        Self {
            a: 0.8,
            d: 0.7,
            k: 35,
            c1: 6.225,
            c2: 0.097,
        }
    }

    /// Looks up a preset by node count.
    pub fn preset(k: usize) -> Option<Self> {
        match k {
            50 => Some(Self::preset_k50()),
            40 => Some(Self::preset_k40()),
            35 => Some(Self::preset_k35()),
            _ => None,
        }
    }

    /// Same `a, C₁, C₂` with a different node count.
    pub fn with_k(self, k: usize) -> Self {
        Self { k, ..self }
    }

    pub fn validate(&self, phi: f64) -> Result<()> {
        if self.k < 1 {
            return Err(Error::config("contour needs K >= 1"));
        }
        if !(self.c1 > 0.0 && self.c2 > 0.0) {
            return Err(Error::config(format!(
                "contour needs C1, C2 > 0, got {}, {}",
                self.c1, self.c2
            )));
        }
        if !(self.a > 0.0 && self.a < PI / 2.0 - phi) {
            return Err(Error::config(format!(
                "contour angle a = {} must lie in (0, pi/2 - phi) with phi = {phi}",
                self.a
            )));
        }
        Ok(())
    }
}

/// Bounds `(lb_ℓ, ub_ℓ)` of the approximation interval of level `ℓ ≥ 1`.
pub fn level_bounds(level: usize, h_min: f64, base: u32) -> (f64, f64) {
    let b = base as f64;
    let geometric = |upto: isize| -> f64 {
        let mut sum = 0.0;
        let mut p = 1.0;
        for _ in 0..=upto.max(-1) {
            sum += p;
            p *= b;
        }
        if upto < 0 {
            0.0
        } else {
            sum
        }
    };
    let lb = h_min * (1.0 + geometric(level as isize - 2));
    let ub = h_min * (1.0 + geometric(level as isize));
    (lb, ub)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LevelPlan {
    pub level: usize,
    pub t_lo: f64,
    pub t_hi: f64,
    /// `t_hi / t_lo`.
    pub lambda: f64,
    pub tau: f64,
    pub mu: f64,
    pub sigma: f64,
}

pub fn plan_level(
    level: usize,
    h_min: f64,
    base: u32,
    consts: &ContourConstants,
    sigma: f64,
) -> Result<LevelPlan> {
    if level < 1 {
        return Err(Error::config("levels are numbered from 1"));
    }
    if base < 2 {
        return Err(Error::config(format!("base B must be >= 2, got {base}")));
    }
    if !(h_min > 0.0 && h_min.is_finite()) {
        return Err(Error::config(format!(
            "h_min must be positive, got {h_min}"
        )));
    }
    if consts.k < 1 {
        return Err(Error::config("contour needs K >= 1"));
    }
    let (lb, ub) = level_bounds(level, h_min, base);
    let mut plan = plan_interval(lb, ub, consts, sigma);
    plan.level = level;
    Ok(plan)
}

/// Plan for an arbitrary interval `[t_lo, t_hi]`, outside any mosaic.
pub fn plan_interval(t_lo: f64, t_hi: f64, consts: &ContourConstants, sigma: f64) -> LevelPlan {
    let lambda = t_hi / t_lo;
    let k = consts.k as f64;
    LevelPlan {
        level: 0,
        t_lo,
        t_hi,
        lambda,
        tau: consts.c1 / k,
        mu: consts.c2 * k / (lambda * t_lo),
        sigma,
    }
}

/// Which transform to invert: `F`, `F₁ = F/s` or `F₂ = F/s²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    F,
    F1,
    F2,
}

/// Nodes, weights and cached transform values of one hyperbola.
///
/// Arrays are indexed by `k + K` for `k = −K..K`. Immutable after
/// construction apart from the out-of-interval diagnostic counter.
#[derive(Debug)]
pub struct Contour {
    pub plan: LevelPlan,
    k: usize,
    nodes: Vec<Complex64>,
    weights: Vec<Complex64>,
    fvals: Vec<Complex64>,
    f1vals: Vec<Complex64>,
    f2vals: Vec<Complex64>,
    f_evaluations: usize,
    out_of_interval: AtomicU64,
}

/// Builds the contour for `plan` and caches `F`, `F/s`, `F/s²` at its nodes.
///
/// Transforms are assumed to come from real kernels, `F(s̄) = conj F(s)`, so
/// `F` is evaluated at the `K + 1` nodes with `k ≥ 0` and mirrored.
pub fn build_contour(
    plan: LevelPlan,
    consts: &ContourConstants,
    kernel: &SectorialTransform,
) -> Result<Contour> {
    consts.validate(kernel.phi)?;
    let kk = consts.k;
    let n = 2 * kk + 1;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let i = Complex64::i();
    for j in 0..n {
        let x = (j as f64 - kk as f64) * plan.tau;
        let arg = Complex64::new(consts.a, 0.0) + i * x;
        let node = plan.mu * (1.0 - arg.sin()) + plan.sigma;
        // traversed with increasing imaginary part
        let weight = plan.tau * plan.mu * arg.cos() / (2.0 * PI);
        let sector = (node - plan.sigma).arg().abs();
        if !(sector < PI - kernel.phi) {
            return Err(Error::config(format!(
                "contour node {node} leaves the sector |arg(s - sigma)| < pi - phi"
            )));
        }
        nodes.push(node);
        weights.push(weight);
    }
    let mut fvals = vec![Complex64::new(0.0, 0.0); n];
    for j in kk..n {
        fvals[j] = kernel.eval(nodes[j]);
        fvals[2 * kk - j] = fvals[j].conj();
    }
    let f1vals: Vec<_> = fvals.iter().zip(&nodes).map(|(f, s)| f / s).collect();
    let f2vals: Vec<_> = fvals.iter().zip(&nodes).map(|(f, s)| f / (s * s)).collect();
    Ok(Contour {
        plan,
        k: kk,
        nodes,
        weights,
        fvals,
        f1vals,
        f2vals,
        f_evaluations: kk + 1,
        out_of_interval: AtomicU64::new(0),
    })
}

impl Contour {
    pub fn half_nodes(&self) -> usize {
        self.k
    }

    /// `λ_k` for `k ∈ −K..=K`.
    pub fn node(&self, k: isize) -> Complex64 {
        self.nodes[(k + self.k as isize) as usize]
    }

    pub fn weight(&self, k: isize) -> Complex64 {
        self.weights[(k + self.k as isize) as usize]
    }

    /// Nodes `λ_0..λ_K`.
    pub fn upper_nodes(&self) -> &[Complex64] {
        &self.nodes[self.k..]
    }

    pub fn all_nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn all_weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// Cached `F(λ_k)` for `k ∈ −K..=K`.
    pub fn transform_values(&self) -> &[Complex64] {
        &self.fvals
    }

    /// Number of kernel evaluations made at construction.
    pub fn f_evaluations(&self) -> usize {
        self.f_evaluations
    }

    pub fn out_of_interval_calls(&self) -> u64 {
        self.out_of_interval.load(Ordering::Relaxed)
    }

    fn cached(&self, which: Which) -> &[Complex64] {
        match which {
            Which::F => &self.fvals,
            Which::F1 => &self.f1vals,
            Which::F2 => &self.f2vals,
        }
    }

    fn note_interval(&self, t: f64) {
        let slack = 1e-9;
        if t < self.plan.t_lo * (1.0 - slack) || t > self.plan.t_hi * (1.0 + slack) {
            self.out_of_interval.fetch_add(1, Ordering::Relaxed);
        }
    }

    /// Full sum `Σ_{k=−K}^{K} w_k e^{tλ_k} G(λ_k)` without using symmetry.
    pub fn invert_complex(&self, which: Which, t: f64) -> Complex64 {
        self.note_interval(t);
        let vals = self.cached(which);
        self.nodes
            .iter()
            .zip(&self.weights)
            .zip(vals)
            .map(|((l, w), v)| w * (t * l).exp() * v)
            .sum()
    }

    /// Real inverse transform at `t`, folding the conjugate pairs.
    pub fn invert(&self, which: Which, t: f64) -> f64 {
        self.note_interval(t);
        let vals = self.cached(which);
        let kk = self.k;
        let term = |j: usize| (self.weights[j] * (t * self.nodes[j]).exp() * vals[j]).re;
        let mut sum = 0.0;
        for j in (kk + 1..=2 * kk).rev() {
            sum += term(j);
        }
        2.0 * sum + term(kk)
    }

    /// `(f₁(t), f₂(t))` with the exact values `(0, 0)` at `t = 0`.
    pub fn eval_f12(&self, t: f64) -> (f64, f64) {
        if t == 0.0 {
            return (0.0, 0.0);
        }
        (self.invert(Which::F1, t), self.invert(Which::F2, t))
    }
}

/// One-off inversion at a single time on a contour fitted to `[t/2, 2t]`.
///
/// `which`: 0 for `f`, 1 for `f₁`, 2 for `f₂`.
pub fn invert_at(kernel: &SectorialTransform, t: f64, consts: &ContourConstants, which: u8) -> f64 {
    let plan = plan_interval(0.5 * t, 2.0 * t, consts, kernel.sigma);
    let contour = match build_contour(plan, consts, kernel) {
        Ok(c) => c,
        Err(_) => return f64::NAN,
    };
    let which = match which {
        0 => Which::F,
        1 => Which::F1,
        _ => Which::F2,
    };
    contour.invert(which, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::power_kernel;

    #[test]
    fn level_bounds_follow_geometric_sums() {
        assert_eq!(level_bounds(1, 1.0, 3), (1.0, 5.0));
        assert_eq!(level_bounds(2, 1.0, 3), (2.0, 14.0));
        assert_eq!(level_bounds(3, 1.0, 3), (5.0, 41.0));
        assert_eq!(level_bounds(1, 0.5, 5), (0.5, 3.5));
    }

    #[test]
    fn plan_level_examples() {
        let c = ContourConstants::preset_k50();
        let p = plan_level(1, 1.0, 3, &c, 0.0).unwrap();
        assert_eq!((p.t_lo, p.t_hi, p.lambda), (1.0, 5.0, 5.0));
        let p = plan_level(2, 1.0, 3, &c, 0.0).unwrap();
        assert_eq!((p.t_lo, p.t_hi, p.lambda), (2.0, 14.0, 7.0));

        let plan = plan_interval(0.01, 0.07, &c, 0.0);
        assert!((plan.tau - 0.131_34).abs() < 1e-12);
        assert!((plan.mu - 0.066 * 50.0 / 0.07).abs() < 1e-9);
        assert!((plan.mu - 47.142_857).abs() < 1e-5);

        assert!(plan_level(1, 1.0, 1, &c, 0.0).is_err());
        assert!(plan_level(1, 0.0, 3, &c, 0.0).is_err());
        assert!(plan_level(1, 1.0, 3, &c.with_k(0), 0.0).is_err());
    }

    #[test]
    fn node_at_origin_of_parameter() {
        let consts = ContourConstants {
            a: 0.8,
            d: 0.7,
            k: 4,
            c1: 4.0,
            c2: 1.0,
        };
        let plan = LevelPlan {
            level: 1,
            t_lo: 1.0,
            t_hi: 1.0,
            lambda: 1.0,
            tau: 1.0,
            mu: 1.0,
            sigma: 0.0,
        };
        let k = power_kernel(0.5).unwrap();
        let c = build_contour(plan, &consts, &k).unwrap();
        assert!((c.node(0).re - (1.0 - 0.8f64.sin())).abs() < 1e-15);
        assert!((c.node(0).re - 0.282_64).abs() < 1e-5);
        assert_eq!(c.node(0).im, 0.0);
    }

    #[test]
    fn nodes_and_weights_are_conjugate_symmetric() {
        let consts = ContourConstants::preset_k40();
        let k = power_kernel(0.5).unwrap().with_sigma(0.3);
        let plan = plan_level(2, 0.01, 5, &consts, k.sigma).unwrap();
        let c = build_contour(plan, &consts, &k).unwrap();
        for j in 1..=consts.k as isize {
            assert!((c.node(-j) - c.node(j).conj()).norm() <= 1e-14 * c.node(j).norm());
            assert!((c.weight(-j) - c.weight(j).conj()).norm() <= 1e-14 * c.weight(j).norm());
        }
    }

    #[test]
    fn inverts_simple_transforms() {
        let consts = ContourConstants::preset_k50();
        let half = power_kernel(0.5).unwrap();
        let plan = plan_interval(0.5, 2.0, &consts, 0.0);
        let c = build_contour(plan, &consts, &half).unwrap();
        let exact = 1.0 / PI.sqrt();
        assert!((c.invert(Which::F, 1.0) - exact).abs() < 1e-8 * exact);
        let (f1, f2) = c.eval_f12(1.0);
        assert!((f1 - 2.0 / PI.sqrt()).abs() < 1e-9);
        assert!((f2 - 4.0 / (3.0 * PI.sqrt())).abs() < 1e-8);
        assert_eq!(c.eval_f12(0.0), (0.0, 0.0));

        let one = power_kernel(1.0).unwrap();
        let plan = plan_interval(0.5, 3.0, &consts, 0.0);
        let c = build_contour(plan, &consts, &one).unwrap();
        for &t in &[0.5, 1.0, 2.0, 3.0] {
            assert!((c.invert(Which::F, t) - 1.0).abs() < 1e-9);
        }
        let (f1, f2) = c.eval_f12(2.0);
        assert!((f1 - 2.0).abs() < 1e-8);
        assert!((f2 - 2.0).abs() < 1e-8);
        let h = 0.7;
        let (f1, f2) = c.eval_f12(h);
        assert!((f1 - h).abs() < 1e-8 && (f2 - h * h / 2.0).abs() < 1e-8);
    }

    #[test]
    fn imaginary_part_vanishes_for_real_kernels() {
        let consts = ContourConstants::preset_k50();
        let k = power_kernel(0.3).unwrap();
        let plan = plan_level(3, 1e-3, 5, &consts, 0.0).unwrap();
        let c = build_contour(plan, &consts, &k).unwrap();
        for j in 0..20 {
            let t = plan.t_lo + (plan.t_hi - plan.t_lo) * j as f64 / 19.0;
            for which in [Which::F, Which::F1, Which::F2] {
                let full = c.invert_complex(which, t);
                let folded = c.invert(which, t);
                assert!(full.im.abs() <= 1e-12 * (full.re.abs() + 1.0));
                assert!((full.re - folded).abs() <= 1e-12 * (folded.abs() + 1.0));
            }
        }
    }

    #[test]
    fn out_of_interval_calls_are_counted() {
        let consts = ContourConstants::preset_k50();
        let k = power_kernel(0.5).unwrap();
        let plan = plan_interval(1.0, 5.0, &consts, 0.0);
        let c = build_contour(plan, &consts, &k).unwrap();
        c.invert(Which::F, 2.0);
        assert_eq!(c.out_of_interval_calls(), 0);
        c.invert(Which::F, 10.0);
        c.invert(Which::F, 0.1);
        assert_eq!(c.out_of_interval_calls(), 2);
    }

    #[test]
    fn angle_outside_sector_is_rejected() {
        let k = power_kernel(0.5).unwrap();
        let bad = ContourConstants {
            a: 1.7,
            ..ContourConstants::preset_k50()
        };
        let plan = plan_interval(1.0, 5.0, &bad, 0.0);
        assert!(build_contour(plan, &bad, &k).is_err());
    }

    #[test]
    fn scale_coherence_between_adjacent_levels() {
        let consts = ContourConstants::preset_k50();
        let k = power_kernel(0.5).unwrap();
        let p1 = plan_level(1, 0.1, 5, &consts, 0.0).unwrap();
        let p2 = plan_level(2, 0.1, 5, &consts, 0.0).unwrap();
        let c1 = build_contour(p1, &consts, &k).unwrap();
        let c2 = build_contour(p2, &consts, &k).unwrap();
        // overlap [lb_2, ub_1] = [0.2, 0.7]
        for &t in &[0.2, 0.35, 0.5, 0.7] {
            let a = c1.invert(Which::F, t);
            let b = c2.invert(Which::F, t);
            assert!((a - b).abs() < 1e-10 * a.abs());
        }
    }
}
