//! Finite-element solver for the regularized gradient-dependent diffusion
//! equation
//!
//! ```text
//! u_t - div(sigma(|grad u|^2) grad u) = g,   sigma(s2) = 1 / sqrt(lambda^2 + s2),
//! ```
//!
//! on the unit square with zero-flux boundary conditions, discretized by
//! Lagrange P1-P3 elements in space and a linearized backward Euler scheme in
//! time. The [`study`] module drives mesh- and time-refinement studies against
//! a manufactured solution.

pub mod assembly;
pub mod coeff;
pub mod error;
pub mod felib;
pub mod mesh;
pub mod mms;
pub mod sparsela;
pub mod stepper;
pub mod study;

pub use error::{Error, Result};
