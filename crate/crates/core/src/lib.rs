//! Numerical laboratory for periodic stationary solutions of
//! `u_t + (f(u, x))_x = u_xx` and the L1 stability of perturbations around them.
//!
//! * [`numerics`]: grids, quadrature, flux models.
//! * [`stationary`]: the cell problem, its p-derivative and the weight theta.
//! * [`evolution`]: the monotone IMEX scheme and a Duhamel/Picard reference solver.
//! * [`entropy`]: the entropy built from the stationary family and the dispersion fit.
//! * [`diagnostics`]: primitive, lap number, weighted energy, L1 bound.
//! * [`harness`]: scenario configs and the command implementations behind the CLI.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod entropy;
pub mod error;
pub mod evolution;
pub mod harness;
pub mod numerics;
pub mod stationary;

pub use error::{LabError, Result};
