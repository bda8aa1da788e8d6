use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cell::{solve_dp_w_with, solve_stationary_with, CellSolution, NewtonConfig, Stencil};
use crate::error::{LabError, Result};
use crate::numerics::{CellGrid, FluxModel, FluxSpec, Profile};

/// Stationary profiles `w_{p_j}` and their p-derivatives on a common cell grid.
#[derive(Debug, Clone)]
pub struct StationaryFamily {
    flux: FluxModel,
    grid: CellGrid,
    stencil: Stencil,
    p_grid: Vec<f64>,
    profiles: Vec<Profile>,
    dp_profiles: Vec<Profile>,
    residuals: Vec<f64>,
    alpha: f64,
    dp_max: f64,
}

impl StationaryFamily {
    pub fn flux(&self) -> &FluxModel {
        &self.flux
    }

    pub fn grid(&self) -> &CellGrid {
        &self.grid
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    pub fn p_grid(&self) -> &[f64] {
        &self.p_grid
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }

    pub fn dp_profiles(&self) -> &[Profile] {
        &self.dp_profiles
    }

    /// Discrete residual reached by each member.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    /// Smallest value of `dp_w` over all members and cells.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Largest value of `dp_w` over all members and cells.
    pub fn dp_max(&self) -> f64 {
        self.dp_max
    }

    pub fn len(&self) -> usize {
        self.p_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_grid.is_empty()
    }

    /// Assemble a family from precomputed members, checking every invariant.
    pub fn from_parts(
        flux: FluxModel,
        stencil: Stencil,
        p_grid: Vec<f64>,
        profiles: Vec<Profile>,
        dp_profiles: Vec<Profile>,
        residuals: Vec<f64>,
    ) -> Result<Self> {
        let m = p_grid.len();
        if m < 2 || profiles.len() != m || dp_profiles.len() != m || residuals.len() != m {
            return Err(LabError::InvalidInput("family arrays have inconsistent lengths".into()));
        }
        if p_grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(LabError::InvalidInput(
                "family p grid must be strictly increasing".into(),
            ));
        }
        let grid = *profiles[0].grid();
        if profiles.iter().chain(&dp_profiles).any(|p| p.grid() != &grid) {
            return Err(LabError::InvalidInput("family members live on different grids".into()));
        }
        for j in 0..m - 1 {
            let (lo, hi) = (profiles[j].values(), profiles[j + 1].values());
            if let Some(cell) = (0..lo.len()).find(|&i| !(lo[i] < hi[i])) {
                return Err(LabError::NotMonotone {
                    lower: j,
                    upper: j + 1,
                    cell,
                });
            }
        }
        let mut alpha = f64::INFINITY;
        let mut dp_max = f64::NEG_INFINITY;
        for dp in &dp_profiles {
            let (cell, min) = dp.min();
            if !(min > 0.0) {
                return Err(LabError::NotPositive {
                    what: "dp_w",
                    cell,
                    min,
                });
            }
            alpha = alpha.min(min);
            dp_max = dp_max.max(dp.max_value());
        }
        Ok(Self {
            flux,
            grid,
            stencil,
            p_grid,
            profiles,
            dp_profiles,
            residuals,
            alpha,
            dp_max,
        })
    }

    /// Write the family as JSON (see `docs/formats.md`).
    pub fn save(&self, path: &Path) -> Result<()> {
        let spec =
            self.flux.spec().cloned().ok_or_else(|| {
                LabError::InvalidInput(format!("flux `{}` has no config description", self.flux.label()))
            })?;
        let file = FamilyFile {
            format: FAMILY_FORMAT.to_string(),
            version: FAMILY_VERSION,
            flux: spec,
            stencil: self.stencil,
            period: self.grid.period(),
            n_cells: self.grid.n_cells(),
            p_grid: self.p_grid.clone(),
            alpha: self.alpha,
            residuals: self.residuals.clone(),
            profiles: self.profiles.iter().map(|p| p.values().to_vec()).collect(),
            dp_profiles: self.dp_profiles.iter().map(|p| p.values().to_vec()).collect(),
        };
        let text = serde_json::to_string_pretty(&file)?;
        std::fs::write(path, text).map_err(|e| LabError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        let file: FamilyFile = serde_json::from_str(&text)?;
        if file.format != FAMILY_FORMAT || file.version != FAMILY_VERSION {
            return Err(LabError::InvalidInput(format!(
                "{}: not a version {FAMILY_VERSION} family file",
                path.display()
            )));
        }
        let flux = file.flux.build()?;
        let grid = CellGrid::new(file.n_cells, file.period)?;
        let to_profiles =
            |rows: Vec<Vec<f64>>| -> Result<Vec<Profile>> { rows.into_iter().map(|v| Profile::new(grid, v)).collect() };
        let fam = Self::from_parts(
            flux,
            file.stencil,
            file.p_grid,
            to_profiles(file.profiles)?,
            to_profiles(file.dp_profiles)?,
            file.residuals,
        )?;
        if (fam.alpha - file.alpha).abs() > 1e-12 * file.alpha.abs().max(1.0) {
            return Err(LabError::InvalidInput(
                "stored alpha disagrees with the stored profiles".into(),
            ));
        }
        Ok(fam)
    }
}

const FAMILY_FORMAT: &str = "wplab-stationary-family";
const FAMILY_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct FamilyFile {
    format: String,
    version: u32,
    flux: FluxSpec,
    stencil: Stencil,
    period: f64,
    n_cells: usize,
    p_grid: Vec<f64>,
    alpha: f64,
    residuals: Vec<f64>,
    profiles: Vec<Vec<f64>>,
    dp_profiles: Vec<Vec<f64>>,
}

/// Continuation from `from` to `to`, warm-started by the tangent predictor
/// `w + dp * phi`, with step halving on failure.
fn continue_to(
    flux: &FluxModel,
    grid: &CellGrid,
    cfg: &NewtonConfig,
    stencil: Stencil,
    from: (&Profile, &Profile, f64),
    to: f64,
) -> Result<CellSolution> {
    let (mut w, mut phi, mut p) = (from.0.clone(), from.1.clone(), from.2);
    let mut step = cfg.continuation_step.min((to - p).abs());
    let mut halvings = 0;
    loop {
        let remaining = to - p;
        let dp = remaining.signum() * step.min(remaining.abs());
        let target = if (remaining - dp).abs() < 1e-14 { to } else { p + dp };
        let guess_vals: Vec<f64> = w
            .values()
            .iter()
            .zip(phi.values())
            .map(|(a, b)| a + (target - p) * b)
            .collect();
        let guess = Profile::new(*grid, guess_vals)?;
        match solve_stationary_with(flux, target, grid, cfg, Some(&guess), stencil) {
            Ok(sol) => {
                if target == to {
                    return Ok(sol);
                }
                phi = solve_dp_w_with(flux, &sol.profile, stencil)?;
                w = sol.profile;
                p = target;
                halvings = 0;
            }
            Err(e) => {
                halvings += 1;
                if halvings > 12 {
                    return Err(e);
                }
                step *= 0.5;
            }
        }
    }
}

/// Continuation over `p_j = p_min + j (p_max - p_min) / m`, `j = 0..=m` (centred stencil).
pub fn build_family(
    flux: &FluxModel,
    p_min: f64,
    p_max: f64,
    m: usize,
    grid: &CellGrid,
    cfg: &NewtonConfig,
) -> Result<StationaryFamily> {
    build_family_with(flux, p_min, p_max, m, grid, cfg, Stencil::Centered)
}

pub const MIN_FAMILY_INTERVALS: usize = 16;

pub fn build_family_with(
    flux: &FluxModel,
    p_min: f64,
    p_max: f64,
    m: usize,
    grid: &CellGrid,
    cfg: &NewtonConfig,
    stencil: Stencil,
) -> Result<StationaryFamily> {
    if !(p_min < p_max) {
        return Err(LabError::InvalidInput(format!(
            "need p_min < p_max, got [{p_min}, {p_max}]"
        )));
    }
    if m < MIN_FAMILY_INTERVALS {
        return Err(LabError::InvalidInput(format!(
            "family needs M >= {MIN_FAMILY_INTERVALS}, got {m}"
        )));
    }
    cfg.validate()?;
    let p_grid: Vec<f64> = (0..=m)
        .map(|j| {
            if j == m {
                p_max
            } else {
                p_min + (p_max - p_min) * j as f64 / m as f64
            }
        })
        .collect();

    // Start from the member closest to zero, where the constant guess is best.
    let start = (0..=m)
        .min_by(|&a, &b| p_grid[a].abs().total_cmp(&p_grid[b].abs()))
        .unwrap_or(0);
    let mut profiles: Vec<Option<Profile>> = vec![None; m + 1];
    let mut dps: Vec<Option<Profile>> = vec![None; m + 1];
    let mut residuals = vec![0.0; m + 1];

    let first = solve_stationary_with(flux, p_grid[start], grid, cfg, None, stencil)?;
    dps[start] = Some(solve_dp_w_with(flux, &first.profile, stencil)?);
    residuals[start] = first.residual;
    profiles[start] = Some(first.profile);

    let sweep = |order: Vec<usize>,
                 prev0: usize,
                 profiles: &mut Vec<Option<Profile>>,
                 dps: &mut Vec<Option<Profile>>,
                 residuals: &mut Vec<f64>|
     -> Result<()> {
        let mut prev = prev0;
        for j in order {
            let from = (
                profiles[prev].as_ref().expect("solved"),
                dps[prev].as_ref().expect("solved"),
                p_grid[prev],
            );
            let sol = continue_to(flux, grid, cfg, stencil, from, p_grid[j])?;
            dps[j] = Some(solve_dp_w_with(flux, &sol.profile, stencil)?);
            residuals[j] = sol.residual;
            profiles[j] = Some(sol.profile);
            prev = j;
        }
        Ok(())
    };
    sweep(
        (start + 1..=m).collect(),
        start,
        &mut profiles,
        &mut dps,
        &mut residuals,
    )?;
    sweep(
        (0..start).rev().collect(),
        start,
        &mut profiles,
        &mut dps,
        &mut residuals,
    )?;

    StationaryFamily::from_parts(
        flux.clone(),
        stencil,
        p_grid,
        profiles.into_iter().map(|p| p.expect("solved")).collect(),
        dps.into_iter().map(|p| p.expect("solved")).collect(),
        residuals,
    )
}
