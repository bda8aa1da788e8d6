use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::numerics::{BoundaryMode, CellGrid, FluxSpec, LineGrid};
use crate::stationary::{NewtonConfig, Stencil, MIN_FAMILY_INTERVALS};

/// One scenario, read from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub flux: FluxSpec,
    pub grid: GridConfig,
    pub family: FamilyConfig,
    #[serde(default)]
    pub initial: PerturbationSpec,
    pub run: RunConfig,
    #[serde(default)]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub lap_hysteresis: Option<f64>,
    #[serde(default)]
    pub newton: Option<NewtonConfig>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_cells_per_period: usize,
    /// Read as a number so that non-integer multiples can be rejected.
    pub n_periods: f64,
    #[serde(default = "default_boundary")]
    pub boundary_mode: BoundaryMode,
}

fn default_boundary() -> BoundaryMode {
    BoundaryMode::PinnedToWp
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub p_min: f64,
    pub p_max: f64,
    #[serde(rename = "M")]
    pub m: usize,
    /// Mean of the background `w_p`; must be one of the family's p values.
    #[serde(default)]
    pub p: f64,
    #[serde(default = "default_stencil")]
    pub stencil: Stencil,
    /// Reuse a stored family instead of building one.
    #[serde(default)]
    pub file: Option<PathBuf>,
}

fn default_stencil() -> Stencil {
    Stencil::EngquistOsher
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    None,
    GaussianBump,
    Dipole,
    RandomZeroMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub shape: Shape,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default)]
    pub center: f64,
    /// Seed of `random_zero_mean`.
    #[serde(default)]
    pub seed: u64,
    /// Number of lobes of `random_zero_mean`.
    #[serde(default = "default_lobes")]
    pub lobes: usize,
}

fn default_width() -> f64 {
    0.5
}

fn default_lobes() -> usize {
    7
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        Self {
            shape: Shape::None,
            amplitude: 0.0,
            width: default_width(),
            center: 0.0,
            seed: 0,
            lobes: default_lobes(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    Linear { t_lo: f64, t_hi: f64, count: usize },
    Log { t_lo: f64, t_hi: f64, count: usize },
}

impl Schedule {
    /// Snapshot times, first and last exactly `t_lo` and `t_hi`.
    pub fn times(&self) -> Vec<f64> {
        let (lo, hi, count, log) = match *self {
            Schedule::Linear { t_lo, t_hi, count } => (t_lo, t_hi, count, false),
            Schedule::Log { t_lo, t_hi, count } => (t_lo, t_hi, count, true),
        };
        if count == 1 {
            return vec![hi];
        }
        (0..count)
            .map(|k| {
                if k == 0 {
                    lo
                } else if k == count - 1 {
                    hi
                } else {
                    let s = k as f64 / (count - 1) as f64;
                    if log {
                        (lo.ln() + s * (hi / lo).ln()).exp()
                    } else {
                        lo + s * (hi - lo)
                    }
                }
            })
            .collect()
    }

    fn validate(&self, t_end: f64) -> Result<()> {
        let (lo, hi, count, log) = match *self {
            Schedule::Linear { t_lo, t_hi, count } => (t_lo, t_hi, count, false),
            Schedule::Log { t_lo, t_hi, count } => (t_lo, t_hi, count, true),
        };
        if count == 0 || !(lo >= 0.0) || !(hi >= lo) || (count > 1 && !(hi > lo)) || !(hi <= t_end) {
            return Err(LabError::Config(format!(
                "snapshot schedule needs 0 <= t_lo < t_hi <= t_end and count >= 1 (got {lo}, {hi}, {count}, t_end {t_end})"
            )));
        }
        if log && !(lo > 0.0) {
            return Err(LabError::Config("a log schedule needs t_lo > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub t_end: f64,
    pub snapshot_schedule: Schedule,
    #[serde(default = "default_cfl")]
    pub cfl_fraction: f64,
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
    /// Dispersion fit window; defaults to the schedule's range.
    #[serde(default)]
    pub fit_window: Option<(f64, f64)>,
    #[serde(default = "yes")]
    pub write_snapshots: bool,
}

fn default_cfl() -> f64 {
    0.9
}

fn default_dt_max() -> f64 {
    0.05
}

fn yes() -> bool {
    true
}

/// Settings of the randomized pair runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_verify_t_end")]
    pub t_end: f64,
    #[serde(default = "default_verify_periods")]
    pub n_periods: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

fn default_verify_t_end() -> f64 {
    2.0
}

fn default_verify_periods() -> usize {
    4
}

fn default_trials() -> usize {
    20
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            t_end: default_verify_t_end(),
            n_periods: default_verify_periods(),
            seed: 0,
            trials: default_trials(),
        }
    }
}

/// Property checks a run can enable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// `||u - w_p||_1` nonincreasing.
    L1Contraction,
    /// Final `||u - w_p||_1` at most a tenth of the initial one.
    L1Decay,
    /// Final `||V||_inf` at most a tenth of the initial one.
    LinfVDecay,
    LapNonincrease,
    L1Bound,
    /// `sign_changes(u - w_p) <= lap_number(V) + 1`.
    SignVsLap,
    WeightedEnergy,
    EtaNonnegative,
    EtaSandwich,
    PiL1Bound,
    EtaNonincrease,
    /// Perturbation mass drift and boundary leakage each at most `1e-8 ||b||_1`.
    MassConservation,
    /// Fitted L2 decay exponent at most -0.20.
    Dispersion,
}

impl Check {
    /// Checks that only make sense for a zero-mean perturbation.
    pub fn needs_zero_mean(self) -> bool {
        matches!(self, Check::L1Decay | Check::LinfVDecay)
    }

    pub fn needs_entropy(self) -> bool {
        matches!(
            self,
            Check::EtaNonnegative | Check::EtaSandwich | Check::PiL1Bound | Check::EtaNonincrease
        )
    }
}

impl ScenarioConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn newton(&self) -> NewtonConfig {
        self.newton.unwrap_or_default()
    }

    pub fn n_periods(&self) -> usize {
        self.grid.n_periods as usize
    }

    pub fn cell_grid(&self) -> Result<CellGrid> {
        let spec = self.flux.build()?;
        CellGrid::new(self.grid.n_cells_per_period, spec.period())
    }

    pub fn line_grid(&self) -> Result<LineGrid> {
        LineGrid::new(self.cell_grid()?, self.n_periods(), self.grid.boundary_mode)
    }

    /// Family index of the background mean `p`.
    pub fn background_index(&self) -> Result<usize> {
        let f = &self.family;
        let s = (f.p - f.p_min) / (f.p_max - f.p_min) * f.m as f64;
        let j = s.round();
        if !(j >= 0.0 && j <= f.m as f64) || (s - j).abs() > 1e-9 {
            return Err(LabError::Config(format!(
                "background p = {} is not one of the family's p values",
                f.p
            )));
        }
        Ok(j as usize)
    }

    pub fn snapshot_times(&self) -> Vec<f64> {
        self.run.snapshot_schedule.times()
    }

    pub fn fit_window(&self) -> (f64, f64) {
        self.run.fit_window.unwrap_or_else(|| {
            let t = self.snapshot_times();
            (t[0], t[t.len() - 1])
        })
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Err(LabError::Config(m));
        self.flux.build().map_err(|e| LabError::Config(e.to_string()))?;
        let g = &self.grid;
        if g.n_cells_per_period < 8 {
            return cfg_err(format!("n_cells_per_period must be >= 8, got {}", g.n_cells_per_period));
        }
        if !(g.n_periods >= 1.0) || g.n_periods.fract() != 0.0 {
            return cfg_err(format!(
                "the domain must be a whole number of flux periods, got n_periods = {}",
                g.n_periods
            ));
        }
        let f = &self.family;
        if !(f.p_min < f.p_max) {
            return cfg_err(format!("family needs p_min < p_max, got [{}, {}]", f.p_min, f.p_max));
        }
        if f.m < MIN_FAMILY_INTERVALS {
            return cfg_err(format!("family needs M >= {MIN_FAMILY_INTERVALS}, got {}", f.m));
        }
        self.background_index()?;
        self.newton().validate().map_err(|e| LabError::Config(e.to_string()))?;
        let r = &self.run;
        if !(r.t_end > 0.0) {
            return cfg_err(format!("t_end must be > 0, got {}", r.t_end));
        }
        if !(r.cfl_fraction > 0.0 && r.cfl_fraction <= 1.0) || !(r.dt_max > 0.0) {
            return cfg_err("need 0 < cfl_fraction <= 1 and dt_max > 0".into());
        }
        r.snapshot_schedule.validate(r.t_end)?;
        let p = &self.initial;
        if p.shape != Shape::None && !(p.width > 0.0 && p.amplitude.is_finite() && p.center.is_finite()) {
            return cfg_err("perturbation needs width > 0 and finite amplitude and center".into());
        }
        if p.shape == Shape::RandomZeroMean && p.lobes < 2 {
            return cfg_err("random_zero_mean needs at least 2 lobes".into());
        }
        if p.shape == Shape::GaussianBump {
            if let Some(c) = self.checks.iter().find(|c| c.needs_zero_mean()) {
                return cfg_err(format!(
                    "check {c:?} needs a zero-mean perturbation; a gaussian_bump carries mass that is conserved"
                ));
            }
        }
        if let Some(h) = self.lap_hysteresis {
            if !(h >= 0.0) {
                return cfg_err(format!("lap_hysteresis must be >= 0, got {h}"));
            }
        }
        if self.checks.contains(&Check::Dispersion) {
            self.validate_fit_window()?;
        }
        let v = &self.verify;
        if !(v.t_end > 0.0) || v.n_periods == 0 {
            return cfg_err("verify needs t_end > 0 and n_periods >= 1".into());
        }
        Ok(())
    }

    pub fn validate_fit_window(&self) -> Result<()> {
        let (lo, hi) = self.fit_window();
        let times = self.snapshot_times();
        let slack = 1e-9 * hi.abs().max(1.0);
        if !(lo > 0.0 && hi > lo) || lo < times[0] - slack || hi > times[times.len() - 1] + slack {
            return Err(LabError::Config(format!(
                "fit window ({lo}, {hi}) must satisfy 0 < t_lo < t_hi inside the snapshot range [{}, {}]",
                times[0],
                times[times.len() - 1]
            )));
        }
        let inside = times.iter().filter(|&&t| t >= lo - slack && t <= hi + slack).count();
        if inside < crate::entropy::MIN_FIT_POINTS {
            return Err(LabError::Config(format!(
                "fit window ({lo}, {hi}) holds {inside} snapshots, need {}",
                crate::entropy::MIN_FIT_POINTS
            )));
        }
        Ok(())
    }
}
