use nalgebra::DMatrix;

use crate::error::{LabError, Result};
use crate::numerics::linalg::solve_dense;
use crate::numerics::{CellGrid, FluxModel, Profile};

fn check_normalized(flux: &FluxModel, grid: &CellGrid) -> Result<Vec<f64>> {
    let n = grid.n_cells();
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        let x = grid.center(i);
        let f0 = flux.eval(0.0, x);
        if f0.abs() > 1e-12 {
            return Err(LabError::InvalidInput(format!(
                "theta needs f(0, .) = 0 (normalize about w_p first); f(0, {x}) = {f0:.3e}"
            )));
        }
        b.push(flux.d_u(0.0, x));
    }
    Ok(b)
}

fn positive(theta: Vec<f64>, grid: CellGrid) -> Result<Profile> {
    let prof = Profile::new(grid, theta)?;
    let (cell, min) = prof.min();
    if !(min > 0.0) {
        return Err(LabError::NotPositive {
            what: "theta",
            cell,
            min,
        });
    }
    Ok(prof)
}

/// Periodic `theta > 0`, `<theta> = 1`, with `D1(theta b) + D2 theta = 0` where
/// `b = d_u f(0, .)`; bordered linear solve.
pub fn solve_theta(flux: &FluxModel, grid: &CellGrid) -> Result<Profile> {
    let b = check_normalized(flux, grid)?;
    let n = grid.n_cells();
    let h = grid.spacing();
    let mut m = DMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        let (l, r) = ((i + n - 1) % n, (i + 1) % n);
        m[(i, l)] += 1.0 / (h * h) - b[l] / (2.0 * h);
        m[(i, i)] -= 2.0 / (h * h);
        m[(i, r)] += 1.0 / (h * h) + b[r] / (2.0 * h);
        m[(i, n)] = 1.0;
        m[(n, i)] = 1.0 / n as f64;
    }
    let mut rhs = vec![0.0; n + 1];
    rhs[n] = 1.0;
    let sol = solve_dense(m, &rhs)?;
    positive(sol[..n].to_vec(), *grid)
}

/// Same equation through its once-summed form: the discrete flux
/// `(theta_{i+1} b_{i+1} + theta_i b_i)/2 + (theta_{i+1} - theta_i)/h` is a constant
/// `c`, fixed by periodicity. Marching from `theta_0 = 1` is linear in `c`.
pub fn solve_theta_by_quadrature(flux: &FluxModel, grid: &CellGrid) -> Result<Profile> {
    let b = check_normalized(flux, grid)?;
    let n = grid.n_cells();
    let h = grid.spacing();
    // theta_i = a_i + c * s_i
    let mut a = vec![0.0; n + 1];
    let mut s = vec![0.0; n + 1];
    a[0] = 1.0;
    for i in 0..n {
        let next = (i + 1) % n;
        let denom = 1.0 / h + 0.5 * b[next];
        if denom <= 0.0 {
            return Err(LabError::InvalidInput(
                "cell Peclet number too large for the theta recurrence; refine the grid".into(),
            ));
        }
        let keep = 1.0 / h - 0.5 * b[i];
        a[i + 1] = a[i] * keep / denom;
        s[i + 1] = (1.0 + s[i] * keep) / denom;
    }
    if s[n] == 0.0 {
        return Err(LabError::Singular("theta recurrence is degenerate".into()));
    }
    let c = (1.0 - a[n]) / s[n];
    let theta: Vec<f64> = (0..n).map(|i| a[i] + c * s[i]).collect();
    let mean = theta.iter().sum::<f64>() / n as f64;
    positive(theta.iter().map(|t| t / mean).collect(), *grid)
}
