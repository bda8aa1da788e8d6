//! Shared substrate: grids, quadrature, linear solves, interpolation and flux models.

mod flux;
mod grid;
pub mod linalg;
mod profile;
mod quadrature;
mod spline;

pub use flux::{builtin_flux, FluxModel, FluxSpec};
pub use grid::{BoundaryMode, CellGrid, LineGrid};
pub use profile::Profile;
pub use quadrature::{adaptive_simpson, linear_fit, mass_offset, mean, norm, primitive, NormKind};
pub use spline::PeriodicSpline;
