use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::numerics::linalg::solve_dense;
use crate::numerics::{mean, CellGrid, FluxModel, Profile};

/// Spatial discretisation of `-w'' + (f(w, x))'` on the periodic cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Stencil {
    /// Centred difference of the point fluxes.
    #[default]
    Centered,
    /// Difference of Engquist-Osher interface fluxes, the convective part of the
    /// evolution scheme. Its solutions are exact fixed points of a time step.
    EngquistOsher,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub damping: f64,
    pub continuation_step: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-11,
            max_iterations: 50,
            damping: 0.5,
            continuation_step: 0.1,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || self.max_iterations < 1 {
            return Err(LabError::InvalidInput(
                "Newton tolerance must be > 0 and max_iterations >= 1".into(),
            ));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(LabError::InvalidInput("Newton damping must lie in (0, 1)".into()));
        }
        if !(self.continuation_step > 0.0) {
            return Err(LabError::InvalidInput("continuation step must be > 0".into()));
        }
        Ok(())
    }
}

/// `-D2 w + D1 f(w)` at every cell.
pub fn cell_residual(flux: &FluxModel, grid: &CellGrid, w: &[f64], stencil: Stencil) -> Vec<f64> {
    let n = w.len();
    let h = grid.spacing();
    let h2 = h * h;
    match stencil {
        Stencil::Centered => {
            let fv: Vec<f64> = (0..n).map(|i| flux.eval(w[i], grid.center(i))).collect();
            (0..n)
                .map(|i| {
                    let (l, r) = ((i + n - 1) % n, (i + 1) % n);
                    let lap = ((w[r] - w[i]) - (w[i] - w[l])) / h2;
                    -lap + (fv[r] - fv[l]) / (2.0 * h)
                })
                .collect()
        }
        Stencil::EngquistOsher => {
            // face[i] is the flux through the right interface of cell i
            let face: Vec<f64> = (0..n)
                .map(|i| flux.engquist_osher(w[i], w[(i + 1) % n], grid.interface(i)))
                .collect();
            (0..n)
                .map(|i| {
                    let (l, r) = ((i + n - 1) % n, (i + 1) % n);
                    let lap = ((w[r] - w[i]) - (w[i] - w[l])) / h2;
                    -lap + (face[i] - face[l]) / h
                })
                .collect()
        }
    }
}

/// Jacobian of [`cell_residual`] with respect to `w`, dense `n x n`.
pub fn cell_jacobian(flux: &FluxModel, grid: &CellGrid, w: &[f64], stencil: Stencil) -> DMatrix<f64> {
    let n = w.len();
    let h = grid.spacing();
    let h2 = h * h;
    let mut jac = DMatrix::zeros(n, n);
    for i in 0..n {
        let (l, r) = ((i + n - 1) % n, (i + 1) % n);
        jac[(i, l)] -= 1.0 / h2;
        jac[(i, i)] += 2.0 / h2;
        jac[(i, r)] -= 1.0 / h2;
        match stencil {
            Stencil::Centered => {
                jac[(i, r)] += flux.d_u(w[r], grid.center(r)) / (2.0 * h);
                jac[(i, l)] -= flux.d_u(w[l], grid.center(l)) / (2.0 * h);
            }
            Stencil::EngquistOsher => {
                let (ra, rb) = flux.engquist_osher_partials(w[i], w[r], grid.interface(i));
                let (la, lb) = flux.engquist_osher_partials(w[l], w[i], grid.interface(l));
                jac[(i, i)] += (ra - lb) / h;
                jac[(i, r)] += rb / h;
                jac[(i, l)] -= la / h;
            }
        }
    }
    jac
}

/// `[J 1; 1^T/n 0]`.
fn bordered(jac: DMatrix<f64>) -> DMatrix<f64> {
    let n = jac.nrows();
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(&jac);
    for i in 0..n {
        m[(i, n)] = 1.0;
        m[(n, i)] = 1.0 / n as f64;
    }
    m
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Residual level reachable in double precision: rounding `w` to the nearest
/// representable values perturbs the three-point Laplacian by about this much.
pub(crate) fn roundoff_floor(grid: &CellGrid, w: &[f64]) -> f64 {
    let h = grid.spacing();
    4.0 * f64::EPSILON * sup_norm(w).max(1.0) / (h * h)
}

/// Outcome of a cell solve: profile plus the residual actually reached.
#[derive(Debug, Clone)]
pub struct CellSolution {
    pub profile: Profile,
    pub residual: f64,
    pub iterations: usize,
}

/// Solve `-w'' + (f(w,x))' = 0` on the cell with mean `p` (centred stencil).
pub fn solve_stationary(
    flux: &FluxModel,
    p: f64,
    grid: &CellGrid,
    cfg: &NewtonConfig,
    initial_guess: Option<&Profile>,
) -> Result<Profile> {
    solve_stationary_with(flux, p, grid, cfg, initial_guess, Stencil::Centered).map(|s| s.profile)
}

/// Bordered Newton solve for `(w, lambda)`: `R(w) + lambda = 0`, `<w> = p`.
pub fn solve_stationary_with(
    flux: &FluxModel,
    p: f64,
    grid: &CellGrid,
    cfg: &NewtonConfig,
    initial_guess: Option<&Profile>,
    stencil: Stencil,
) -> Result<CellSolution> {
    cfg.validate()?;
    let n = grid.n_cells();
    let mut w: Vec<f64> = match initial_guess {
        Some(g) if g.values().len() == n => g.values().to_vec(),
        Some(_) => return Err(LabError::InvalidInput("initial guess does not match the grid".into())),
        None => vec![p; n],
    };
    let mut lambda = 0.0;

    let merit = |w: &[f64], lambda: f64| -> (Vec<f64>, f64) {
        let mut r = cell_residual(flux, grid, w, stencil);
        r.iter_mut().for_each(|v| *v += lambda);
        let m = sup_norm(&r).max((mean(w) - p).abs());
        (r, m)
    };

    let (mut res, mut res_norm) = merit(&w, lambda);
    for iter in 0..=cfg.max_iterations {
        let true_res = sup_norm(&cell_residual(flux, grid, &w, stencil));
        let floor = roundoff_floor(grid, &w);
        if res_norm <= cfg.tolerance || (res_norm <= floor && iter > 0) {
            // enforce the mean exactly after convergence
            let shift = p - mean(&w);
            if shift.abs() > 0.0 && shift.abs() < 1e-12 {
                w.iter_mut().for_each(|v| *v += shift);
            }
            return Ok(CellSolution {
                profile: Profile::new(*grid, w)?,
                residual: true_res,
                iterations: iter,
            });
        }
        if iter == cfg.max_iterations {
            break;
        }
        let mut rhs: Vec<f64> = res.iter().map(|v| -v).collect();
        rhs.push(p - mean(&w));
        let delta = solve_dense(bordered(cell_jacobian(flux, grid, &w, stencil)), &rhs)?;

        let mut step = 1.0;
        loop {
            let trial: Vec<f64> = w.iter().zip(&delta).map(|(a, d)| a + step * d).collect();
            let trial_lambda = lambda + step * delta[n];
            let (r, m) = merit(&trial, trial_lambda);
            if m < res_norm || step < 1e-4 || m <= floor {
                w = trial;
                lambda = trial_lambda;
                res = r;
                res_norm = m;
                break;
            }
            step *= cfg.damping;
        }
    }
    Err(LabError::NonConvergence {
        p,
        iterations: cfg.max_iterations,
        residual: res_norm,
    })
}

/// Kernel of the linearised cell operator normalised to mean one (centred stencil).
pub fn solve_dp_w(flux: &FluxModel, w_p: &Profile) -> Result<Profile> {
    solve_dp_w_with(flux, w_p, Stencil::Centered)
}

/// `J phi = 0`, `<phi> = 1` via the bordered matrix; `phi` must come out positive.
pub fn solve_dp_w_with(flux: &FluxModel, w_p: &Profile, stencil: Stencil) -> Result<Profile> {
    let grid = *w_p.grid();
    let n = grid.n_cells();
    let mut rhs = vec![0.0; n + 1];
    rhs[n] = 1.0;
    let sol = solve_dense(bordered(cell_jacobian(flux, &grid, w_p.values(), stencil)), &rhs)?;
    let phi = Profile::new(grid, sol[..n].to_vec())?;
    let (cell, min) = phi.min();
    if !(min > 0.0) {
        return Err(LabError::NotPositive {
            what: "dp_w; grid may be under-resolved",
            cell,
            min,
        });
    }
    Ok(phi)
}

/// The flux `g(v, x) = f(v + w_p(x), x) - f(w_p(x), x)`, for which `v = 0` is stationary.
pub fn normalize_about_wp(flux: &FluxModel, w_p: &Profile) -> Result<FluxModel> {
    if (w_p.grid().period() - flux.period()).abs() > 1e-12 * flux.period() {
        return Err(LabError::InvalidInput("profile period differs from flux period".into()));
    }
    flux.shifted(w_p.values())
}

/// L-infinity distance between the profiles at `n` and `2n` cells and at `2n`
/// and `4n` cells (finer grids interpolated onto the coarser centres by a
/// periodic spline), and the observed order `log2(d1 / d2)`.
pub fn grid_convergence(
    flux: &FluxModel,
    p: f64,
    n: usize,
    cfg: &NewtonConfig,
    stencil: Stencil,
) -> Result<(f64, f64, f64)> {
    let solve = |cells: usize| -> Result<Profile> {
        let g = CellGrid::new(cells, flux.period())?;
        Ok(solve_stationary_with(flux, p, &g, cfg, None, stencil)?.profile)
    };
    let coarse = solve(n)?;
    let mid = solve(2 * n)?;
    let fine = solve(4 * n)?;
    let dist = |a: &Profile, b: &Profile| -> Result<f64> {
        let spline = crate::numerics::PeriodicSpline::new(b.values(), flux.period())?;
        Ok((0..a.values().len())
            .map(|i| (a.values()[i] - spline.eval(a.grid().center(i))).abs())
            .fold(0.0, f64::max))
    };
    let d1 = dist(&coarse, &mid)?;
    let d2 = dist(&mid, &fine)?;
    Ok((d1, d2, (d1 / d2).log2()))
}
