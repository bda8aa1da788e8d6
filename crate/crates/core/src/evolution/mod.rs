//! Time integration of `u_t + (f(u, x))_x = u_xx` on the line grid.

mod driver;
mod duhamel;
mod scheme;

pub use driver::{evolve, Observer};
pub use duhamel::{duhamel_picard, duhamel_picard_with, heat_convolution, DEFAULT_SUBINTERVALS};
pub use scheme::{discrete_background, step, wave_speed, Scheme, State, StepPolicy};
