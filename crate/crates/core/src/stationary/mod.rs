//! The periodic cell problem `-w'' + (f(w, x))' = 0`, `<w> = p`, its p-derivative,
//! the family `p -> w_p`, and the weight `theta`.

mod cell;
mod family;
mod theta;

pub use cell::{
    cell_jacobian, cell_residual, grid_convergence, normalize_about_wp, solve_dp_w, solve_dp_w_with, solve_stationary,
    solve_stationary_with, CellSolution, NewtonConfig, Stencil,
};
pub use family::{build_family, build_family_with, StationaryFamily, MIN_FAMILY_INTERVALS};
pub use theta::{solve_theta, solve_theta_by_quadrature};

#[cfg(test)]
mod tests;
