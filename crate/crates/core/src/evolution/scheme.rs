use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::numerics::linalg::{solve_cyclic_tridiagonal, solve_tridiagonal};
use crate::numerics::{mass_offset, BoundaryMode, FluxModel, LineGrid, Profile};
use crate::stationary::{solve_stationary_with, NewtonConfig, Stencil};

/// Solution on the line grid at one instant, with the periodic background it
/// is compared against (and pinned to, at the edges).
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    grid: LineGrid,
    u: Vec<f64>,
    time: f64,
    background: Arc<Profile>,
    background_line: Arc<[f64]>,
    leakage: f64,
}

impl State {
    pub fn new(grid: LineGrid, background: Profile, u: Vec<f64>, time: f64) -> Result<Self> {
        if background.grid() != grid.cell_grid() {
            return Err(LabError::InvalidInput(
                "background lives on a different cell grid".into(),
            ));
        }
        if u.len() != grid.n_cells() {
            return Err(LabError::InvalidInput(format!(
                "state has {} values for {} cells",
                u.len(),
                grid.n_cells()
            )));
        }
        if !(time >= 0.0) || u.iter().any(|v| !v.is_finite()) {
            return Err(LabError::InvalidInput(
                "state time must be >= 0 and values finite".into(),
            ));
        }
        let background_line = background.tile(grid.n_periods()).into();
        Ok(Self {
            grid,
            u,
            time,
            background: Arc::new(background),
            background_line,
            leakage: 0.0,
        })
    }

    /// `u0 = background + perturbation` at time zero.
    pub fn from_perturbation(grid: LineGrid, background: Profile, perturbation: &[f64]) -> Result<Self> {
        let tiled = background.tile(grid.n_periods());
        if perturbation.len() != tiled.len() {
            return Err(LabError::InvalidInput(
                "perturbation length does not match the grid".into(),
            ));
        }
        let u = tiled.iter().zip(perturbation).map(|(a, b)| a + b).collect();
        Self::new(grid, background, u, 0.0)
    }

    pub fn grid(&self) -> &LineGrid {
        &self.grid
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn background(&self) -> &Profile {
        &self.background
    }

    /// Background tiled over the whole line grid.
    pub fn background_line(&self) -> &[f64] {
        &self.background_line
    }

    /// `u - background`.
    pub fn perturbation(&self) -> Vec<f64> {
        self.u
            .iter()
            .zip(self.background_line.iter())
            .map(|(a, b)| a - b)
            .collect()
    }

    /// `h * sum(u - background)`.
    pub fn mass_offset(&self) -> f64 {
        mass_offset(&self.u, &self.background_line, self.grid.spacing())
    }

    /// Accumulated `int |flux of (u - background)|` through the two pinned ends;
    /// always 0 in periodic mode.
    pub fn boundary_leakage(&self) -> f64 {
        self.leakage
    }

    fn ghosts(&self) -> (f64, f64) {
        let bg = self.background.values();
        (bg[bg.len() - 1], bg[0])
    }

    pub(crate) fn with_values(&self, u: Vec<f64>, time: f64) -> Self {
        Self {
            grid: self.grid,
            u,
            time,
            background: Arc::clone(&self.background),
            background_line: Arc::clone(&self.background_line),
            leakage: self.leakage,
        }
    }

    pub(crate) fn set_time(&mut self, time: f64) {
        self.time = time;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Explicit Engquist-Osher convection, backward-Euler diffusion.
    #[default]
    EngquistOsherImex,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPolicy {
    pub cfl_fraction: f64,
    pub dt_max: f64,
    pub scheme: Scheme,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self {
            cfl_fraction: 0.9,
            dt_max: 0.05,
            scheme: Scheme::EngquistOsherImex,
        }
    }
}

impl StepPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl_fraction > 0.0 && self.cfl_fraction <= 1.0) {
            return Err(LabError::InvalidInput(format!(
                "cfl_fraction must lie in (0, 1], got {}",
                self.cfl_fraction
            )));
        }
        if !(self.dt_max > 0.0) {
            return Err(LabError::InvalidInput("dt_max must be > 0".into()));
        }
        Ok(())
    }

    /// `cfl_fraction * h / speed`, capped by `dt_max`.
    pub fn dt_for(&self, state: &State, flux: &FluxModel) -> f64 {
        let speed = wave_speed(state, flux);
        let dt = if speed > 0.0 {
            self.cfl_fraction * state.grid.spacing() / speed
        } else {
            f64::INFINITY
        };
        dt.min(self.dt_max)
    }
}

/// Largest coefficient that multiplies `dt/h` in the explicit update's
/// dependence on the centre value.
///
/// With an x-dependent flux the two interfaces of a cell see different
/// `f(., x)`, so the right-going part at `x_{i+1/2}` and the left-going part at
/// `x_{i-1/2}` can both be active; for an x-independent flux this reduces to
/// `max |f_u(u_i)|`.
pub fn wave_speed(state: &State, flux: &FluxModel) -> f64 {
    let g = &state.grid;
    let n = state.u.len();
    let mut speed = 0.0f64;
    for i in 0..n {
        let u = state.u[i];
        let right = g.local_interface(i);
        let left = g.local_interface((i + n - 1) % n);
        let s = flux.d_u(u, right).max(0.0) - flux.d_u(u, left).min(0.0);
        speed = speed.max(s).max(flux.d_u(u, g.local_center(i)).abs());
    }
    speed
}

/// One IMEX step of size `dt`.
pub fn step(state: &State, flux: &FluxModel, dt: f64) -> Result<State> {
    if !(dt > 0.0) {
        return Err(LabError::InvalidInput(format!("time step must be > 0, got {dt}")));
    }
    let speed = wave_speed(state, flux);
    let h = state.grid.spacing();
    if speed > 0.0 {
        let bound = h / speed;
        if dt > bound * (1.0 + 1e-12) {
            return Err(LabError::Cfl { dt, bound });
        }
    }
    let u = &state.u;
    let n = u.len();
    let g = &state.grid;
    let ratio = dt / h;

    // face[i]: flux through the right interface of cell i; left_face: left edge of cell 0
    let mut face = vec![0.0; n];
    let (left_face, periodic) = match g.boundary() {
        BoundaryMode::Periodic => {
            for i in 0..n {
                face[i] = flux.engquist_osher(u[i], u[(i + 1) % n], g.local_interface(i));
            }
            (face[n - 1], true)
        }
        BoundaryMode::PinnedToWp => {
            let (gl, gr) = state.ghosts();
            for i in 0..n - 1 {
                face[i] = flux.engquist_osher(u[i], u[i + 1], g.local_interface(i));
            }
            face[n - 1] = flux.engquist_osher(u[n - 1], gr, g.local_interface(n - 1));
            (flux.engquist_osher(gl, u[0], g.local_interface(n - 1)), false)
        }
    };
    let mut rhs: Vec<f64> = (0..n)
        .map(|i| {
            let lf = if i == 0 { left_face } else { face[i - 1] };
            u[i] - ratio * (face[i] - lf)
        })
        .collect();

    let r = dt / (h * h);
    let sub = vec![-r; n];
    let sup = vec![-r; n];
    let diag = vec![1.0 + 2.0 * r; n];
    if periodic {
        let next = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs)?;
        return Ok(state.with_values(next, state.time + dt));
    }
    let (gl, gr) = state.ghosts();
    rhs[0] += r * gl;
    rhs[n - 1] += r * gr;
    let next = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
    // Boundary fluxes of u minus those of the background, which balance.
    let bg = &state.background_line;
    let x_edge = g.local_interface(n - 1);
    let inflow = (left_face - flux.engquist_osher(gl, bg[0], x_edge)) - (next[0] - bg[0]) / h;
    let outflow = (face[n - 1] - flux.engquist_osher(bg[n - 1], gr, x_edge)) + (next[n - 1] - bg[n - 1]) / h;
    let mut out = state.with_values(next, state.time + dt);
    out.leakage += dt * (inflow.abs() + outflow.abs());
    Ok(out)
}

/// The scheme's own stationary profile with mean `p`: the cell problem with the
/// Engquist-Osher stencil, so that tiling it gives an exact fixed point of [`step`].
pub fn discrete_background(
    flux: &FluxModel,
    p: f64,
    grid: &crate::numerics::CellGrid,
    cfg: &NewtonConfig,
) -> Result<Profile> {
    Ok(solve_stationary_with(flux, p, grid, cfg, None, Stencil::EngquistOsher)?.profile)
}
