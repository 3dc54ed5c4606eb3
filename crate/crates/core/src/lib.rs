//! Fast and oblivious convolution quadrature with variable step sizes.
//!
//! The crate evaluates convolutions
//!
//! ```text
//! u(t) = ∫₀ᵗ f(t − τ) g(τ) dτ
//! ```
//!
//! on arbitrary increasing time grids when only the Laplace transform `F = L f`
//! of the kernel is known and `F` is sectorial. The kernel is represented by
//! trapezoidal discretisations of the Laplace inversion integral along a family
//! of hyperbolic contours, one per distance class of a geometric mosaic of the
//! `(t, τ)` triangle. Each contour node turns the history of `g` into a scalar
//! linear ODE `y' = λ y + ḡ`, which is advanced by exponential Euler, so that
//! advancing `N` steps costs `O(N log N)` work and `O(log N)` memory while the
//! pointwise history of `g` is forgotten.
//!
//! Modules:
//!
//! - [`kernels`]: sectorial Laplace transforms (fractional power, Mittag-Leffler
//!   relaxation, user supplied).
//! - [`contour`]: hyperbolic contours, level plans and numerical inversion.
//! - [`engine`]: the mosaic bookkeeping and the convolution evaluator.
//! - [`control`]: adaptive step-size controllers.
//! - [`apps`]: nonlinear Abel blow-up, fractional reaction-diffusion and
//!   fractional viscoelasticity solvers.
//! - [`harness`]: the quadratic-cost reference oracle, configuration, file
//!   formats and experiment drivers behind the `fastconv` binary.
//!
//! ```
//! use fastconv::prelude::*;
//!
//! let kernel = power_kernel(0.5).unwrap();
//! let cfg = EngineConfig::new(1e-3, 5, 2.0, ContourConstants::preset_k50());
//! let mut engine = ConvolutionEngine::new(kernel, cfg, &[1.0]).unwrap();
//! let mut t = 0.0;
//! let mut u = vec![0.0];
//! for _ in 0..100 {
//!     t += 0.01;
//!     u = engine.evaluate(t, &[1.0]).unwrap();
//! }
//! let exact = 2.0 * (t / std::f64::consts::PI).sqrt();
//! assert!((u[0] - exact).abs() < 1e-8);
//! ```

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apps;
pub mod contour;
pub mod control;
pub mod engine;
mod error;
pub mod harness;
pub mod kernels;
pub mod special;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::contour::{
        build_contour, plan_level, Contour, ContourConstants, LevelPlan, Which,
    };
    pub use crate::control::{ControllerConfig, IntegratorState};
    pub use crate::engine::{decompose, ConvolutionEngine, Counters, EngineConfig, Segment};
    pub use crate::harness::{oracle_convolve, Trajectory};
    pub use crate::kernels::{
        mittag_leffler_kernel, power_kernel, user_kernel, SectorialTransform, UserKernelSpec,
    };
    pub use crate::{Error, Result};
}
