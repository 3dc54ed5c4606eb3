//! Application solvers built on the convolution engine and the controllers.

pub mod abel;
pub mod elasticity;
pub mod fracrd;
pub mod visco;
