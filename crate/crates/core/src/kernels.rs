//! Sectorial Laplace transforms.
//!
//! A [`SectorialTransform`] is a scalar transfer function `F(s)` together with
//! the sector metadata `(σ, φ, ν, M)`: `F` is analytic for
//! `|arg(s − σ)| < π − φ` and bounded there by `M |s|^{-ν}`. Built-in kernels
//! also carry closed-form time-domain references used by tests and the
//! reference oracle.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::contour::{self, ContourConstants};
use crate::special::{gamma, mittag_leffler_series};
use crate::{Error, Result};

pub type TransformFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;
pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct SectorialTransform {
    name: String,
    eval: TransformFn,
    /// Sector shift σ.
    pub sigma: f64,
    /// Sector half-angle complement φ < π/2.
    pub phi: f64,
    /// Decay exponent ν > 0.
    pub nu: f64,
    /// Sector bound M > 0.
    pub m_bound: f64,
    closed_f: Option<TimeFn>,
    closed_f1: Option<TimeFn>,
    closed_f2: Option<TimeFn>,
    moment: Option<TimeFn>,
}

impl fmt::Debug for SectorialTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SectorialTransform")
            .field("name", &self.name)
            .field("sigma", &self.sigma)
            .field("phi", &self.phi)
            .field("nu", &self.nu)
            .field("m_bound", &self.m_bound)
            .field("closed_forms", &self.closed_f.is_some())
            .finish()
    }
}

impl SectorialTransform {
    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn eval(&self, s: Complex64) -> Complex64 {
        (self.eval)(s)
    }

    /// Closed form of `f`, `None` where none is available.
    pub fn closed_f(&self, t: f64) -> Option<f64> {
        self.closed_f
            .as_ref()
            .map(|f| f(t))
            .filter(|v| v.is_finite())
    }

    /// Closed form of `f₁ = L⁻¹[F/s]`, the running integral of `f`.
    pub fn closed_f1(&self, t: f64) -> Option<f64> {
        self.closed_f1.as_ref().map(|f| f(t))
    }

    /// Closed form of `f₂ = L⁻¹[F/s²]`.
    pub fn closed_f2(&self, t: f64) -> Option<f64> {
        self.closed_f2.as_ref().map(|f| f(t))
    }

    pub fn has_closed_f12(&self) -> bool {
        self.closed_f1.is_some() && self.closed_f2.is_some()
    }

    /// `∫₀ᵀ |f(t)| dt` when the kernel knows it.
    pub fn moment_estimate(&self, horizon: f64) -> Option<f64> {
        self.moment.as_ref().map(|m| m(horizon))
    }

    /// Constant `C ≈ ⅛ ∫₀ᵀ |f|` of the interpolation-error controllers.
    ///
    /// Kernels without a moment estimate fall back to `⅛ T |f(T/2)|`, with
    /// `f(T/2)` obtained by contour inversion.
    pub fn controller_constant(&self, horizon: f64) -> f64 {
        match self.moment_estimate(horizon) {
            Some(m) => m / 8.0,
            None => {
                let mid = 0.5 * horizon;
                let f_mid = contour::invert_at(self, mid, &ContourConstants::preset_k50(), 0);
                horizon * f_mid.abs() / 8.0
            }
        }
    }

    /// Returns a copy with a different sector shift (the transform itself is
    /// unchanged; only the contours move).
    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    /// Spot-checks `|F(s)| ≤ M |s|^{-ν}` on 16 rays of the sector at radii
    /// spanning five decades around `|s| = 1`.
    pub fn check_sector_bound(&self) -> Result<()> {
        const RAYS: usize = 16;
        let half = PI - self.phi;
        for j in 0..RAYS {
            // strictly inside the open sector
            let theta = half * (-1.0 + (2 * j + 1) as f64 / RAYS as f64) * 0.999;
            for &r in &[1e-2, 1e-1, 1.0, 10.0, 100.0] {
                let s = Complex64::new(self.sigma, 0.0) + Complex64::from_polar(r, theta);
                let value = self.eval(s).norm();
                let bound = self.m_bound * s.norm().powf(-self.nu);
                if !value.is_finite() || value > bound * (1.0 + 1e-9) + 1e-300 {
                    return Err(Error::config(format!(
                        "kernel '{}' violates the sector bound at s = {s}: |F| = {value:e} > M|s|^-nu = {bound:e}",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Fractional power kernel `F(s) = s^{-ν}`, `f(t) = t^{ν−1}/Γ(ν)`.
pub fn power_kernel(nu: f64) -> Result<SectorialTransform> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::config(format!(
            "power kernel needs nu > 0, got {nu}"
        )));
    }
    let g_nu = gamma(nu);
    let g_nu1 = gamma(nu + 1.0);
    let g_nu2 = gamma(nu + 2.0);
    Ok(SectorialTransform {
        name: format!("power(nu={nu})"),
        eval: Arc::new(move |s: Complex64| s.powf(-nu)),
        sigma: 0.0,
        phi: 0.0,
        nu,
        m_bound: 1.0,
        closed_f: Some(Arc::new(move |t: f64| t.powf(nu - 1.0) / g_nu)),
        closed_f1: Some(Arc::new(
            move |t: f64| if t <= 0.0 { 0.0 } else { t.powf(nu) / g_nu1 },
        )),
        closed_f2: Some(Arc::new(move |t: f64| {
            if t <= 0.0 {
                0.0
            } else {
                t.powf(nu + 1.0) / g_nu2
            }
        })),
        moment: Some(Arc::new(move |t: f64| t.powf(nu) / g_nu1)),
    })
}

/// Relaxation kernel `f(t) = −d/dt E_α(−t^α)` with `F(s) = 1/(1 + s^α)`.
pub fn mittag_leffler_kernel(alpha: f64) -> Result<SectorialTransform> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::config(format!(
            "Mittag-Leffler kernel needs 0 < alpha < 1, got {alpha}"
        )));
    }
    // sup |w/(1+w)| over arg w < απ
    let m_bound = if alpha > 0.5 {
        1.0 / (alpha * PI).sin()
    } else {
        1.0
    };
    let mut kernel = SectorialTransform {
        name: format!("mittag-leffler(alpha={alpha})"),
        eval: Arc::new(move |s: Complex64| 1.0 / (1.0 + s.powf(alpha))),
        sigma: 0.0,
        phi: 0.0,
        nu: alpha,
        m_bound,
        // f(t) = t^{α−1} E_{α,α}(−t^α); the series loses accuracy beyond t^α ≈ 3
        closed_f: Some(Arc::new(move |t: f64| {
            let x = t.powf(alpha);
            if x <= 3.0 {
                t.powf(alpha - 1.0) * mittag_leffler_series(alpha, alpha, -x, 200)
            } else {
                f64::NAN
            }
        })),
        closed_f1: None,
        closed_f2: None,
        moment: None,
    };
    let relax = kernel.clone();
    // f ≥ 0, so ∫₀ᵀ |f| = 1 − E_α(−T^α) = f₁(T)
    kernel.moment = Some(Arc::new(move |t: f64| {
        let x = t.powf(alpha);
        if x <= 3.0 {
            1.0 - mittag_leffler_series(alpha, 1.0, -x, 200)
        } else {
            contour::invert_at(&relax, t, &ContourConstants::preset_k50(), 1)
        }
    }));
    Ok(kernel)
}

/// Ingredients of a user supplied transform. Every sector field is required;
/// the moment estimate is optional.
#[derive(Clone, Default)]
pub struct UserKernelSpec {
    pub name: Option<String>,
    pub eval: Option<TransformFn>,
    pub sigma: Option<f64>,
    pub phi: Option<f64>,
    pub nu: Option<f64>,
    pub m_bound: Option<f64>,
    pub moment_estimate: Option<TimeFn>,
}

pub fn user_kernel(spec: UserKernelSpec) -> Result<SectorialTransform> {
    let missing = |field: &str| Error::config(format!("user kernel is missing '{field}'"));
    let eval = spec.eval.ok_or_else(|| missing("eval"))?;
    let sigma = spec.sigma.ok_or_else(|| missing("sigma"))?;
    let phi = spec.phi.ok_or_else(|| missing("phi"))?;
    let nu = spec.nu.ok_or_else(|| missing("nu"))?;
    let m_bound = spec.m_bound.ok_or_else(|| missing("M"))?;
    if !(nu > 0.0) || !(m_bound > 0.0) || !(0.0..PI / 2.0).contains(&phi) {
        return Err(Error::config(format!(
            "user kernel metadata out of range: nu = {nu}, M = {m_bound}, phi = {phi}"
        )));
    }
    let kernel = SectorialTransform {
        name: spec.name.unwrap_or_else(|| "user".to_string()),
        eval,
        sigma,
        phi,
        nu,
        m_bound,
        closed_f: None,
        closed_f1: None,
        closed_f2: None,
        moment: spec.moment_estimate,
    };
    kernel.check_sector_bound()?;
    Ok(kernel)
}
