use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::checks::series_verdicts;
use super::config::{Check, ScenarioConfig, Shape};
use super::perturbation::{build_perturbation, check_edge_buffer, edge_mass_fraction};
use super::{RunArtifact, Verdict};
use crate::diagnostics::{DiagnosticsSeries, LapConfig, PerturbationObserver, SnapshotRecord};
use crate::entropy::{dispersion_fit, EntropyField, EntropyObserver, DISPERSION_EXPONENT_BOUND};
use crate::error::{LabError, Result};
use crate::evolution::{discrete_background, evolve, step, State, StepPolicy};
use crate::numerics::{mean, norm, BoundaryMode, FluxModel, LineGrid, NormKind, Profile};
use crate::stationary::{build_family_with, cell_residual, normalize_about_wp, solve_theta, StationaryFamily};

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))
}

/// Load the configured family file, or build the family and store it in `out`.
fn obtain_family(cfg: &ScenarioConfig, out: &Path) -> Result<(StationaryFamily, PathBuf)> {
    let grid = cfg.cell_grid()?;
    let f = &cfg.family;
    if let Some(path) = &f.file {
        let fam = StationaryFamily::load(path)?;
        let p = fam.p_grid();
        let matches = fam.grid() == &grid
            && fam.flux().spec() == Some(&cfg.flux)
            && fam.stencil() == f.stencil
            && p.len() == f.m + 1
            && p[0] == f.p_min
            && p[f.m] == f.p_max;
        if !matches {
            return Err(LabError::Config(format!(
                "family file {} does not match the scenario's flux, grid or p range",
                path.display()
            )));
        }
        return Ok((fam, path.clone()));
    }
    let flux = cfg.flux.build()?;
    let fam = build_family_with(&flux, f.p_min, f.p_max, f.m, &grid, &cfg.newton(), f.stencil)?;
    ensure_dir(out)?;
    let path = out.join("family.json");
    fam.save(&path)?;
    Ok((fam, path))
}

/// Build the family, write the family file and report its invariants.
pub fn cmd_stationary(cfg: &ScenarioConfig) -> Result<RunArtifact> {
    let mut art = RunArtifact::new("stationary", cfg);
    let (fam, path) = obtain_family(cfg, &cfg.output)?;
    art.family_file = Some(path);
    let flux = fam.flux();
    let tol = cfg.newton().tolerance;
    let mut max_residual = 0.0f64;
    let mut max_floor = 0.0f64;
    let mut mean_err = 0.0f64;
    let mut dp_mean_err = 0.0f64;
    for ((p, w), phi) in fam.p_grid().iter().zip(fam.profiles()).zip(fam.dp_profiles()) {
        let r = cell_residual(flux, w.grid(), w.values(), fam.stencil());
        max_residual = max_residual.max(r.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        let scale = w.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let h = w.grid().spacing();
        max_floor = max_floor.max(4.0 * f64::EPSILON * scale / (h * h));
        mean_err = mean_err.max((mean(w.values()) - p).abs());
        dp_mean_err = dp_mean_err.max((mean(phi.values()) - 1.0).abs());
    }
    let min_gap = fam
        .profiles()
        .windows(2)
        .flat_map(|pair| pair[0].values().iter().zip(pair[1].values()).map(|(a, b)| b - a))
        .fold(f64::INFINITY, f64::min);
    let limit = tol.max(max_floor);
    art.verdicts
        .push(Verdict::new("residual", max_residual <= limit, max_residual, limit));
    art.verdicts
        .push(Verdict::new("mean_constraint", mean_err <= 1e-10, mean_err, 1e-10));
    art.verdicts
        .push(Verdict::new("monotone_in_p", min_gap > 0.0, min_gap, 0.0));
    art.verdicts
        .push(Verdict::new("dp_mean_one", dp_mean_err <= 1e-8, dp_mean_err, 1e-8));
    art.verdicts
        .push(Verdict::new("alpha_positive", fam.alpha() > 0.0, fam.alpha(), 0.0));
    art.summary.insert("alpha".into(), fam.alpha());
    art.summary.insert("dp_max".into(), fam.dp_max());
    art.summary.insert("max_residual".into(), max_residual);
    art.summary.insert("members".into(), fam.len() as f64);
    art.finish()
}

/// Everything a scenario run produced.
#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub config: ScenarioConfig,
    pub family: StationaryFamily,
    pub family_file: PathBuf,
    pub theta: Profile,
    pub initial: State,
    pub final_state: State,
    pub series: DiagnosticsSeries,
    pub fields: Vec<(f64, EntropyField)>,
    /// `||b||_1` of the initial perturbation.
    pub b_l1: f64,
    pub diagnostics_csv: PathBuf,
    pub snapshots_dir: Option<PathBuf>,
}

fn snapshot_csv(state: &State) -> String {
    let mut out = String::from("x,u,background\n");
    for ((x, u), b) in state
        .grid()
        .centers()
        .iter()
        .zip(state.u())
        .zip(state.background_line())
    {
        let _ = writeln!(out, "{x},{u},{b}");
    }
    out
}

fn snapshot_name(t: f64) -> String {
    format!("snapshot_t{t:012.6}.csv")
}

/// The initial state of a scenario on its line grid.
pub(crate) fn initial_state(cfg: &ScenarioConfig, family: &StationaryFamily) -> Result<State> {
    let grid = cfg.line_grid()?;
    let background = family.profiles()[cfg.background_index()?].clone();
    let b = build_perturbation(&cfg.initial, &grid)?;
    if grid.boundary() == BoundaryMode::PinnedToWp {
        check_edge_buffer(&b, &grid)?;
    }
    State::from_perturbation(grid, background, &b)
}

/// Build or load the family, evolve the scenario with every observer attached,
/// and write `diagnostics.csv` (and snapshots, if enabled).
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioRun> {
    let out = cfg.output.clone();
    ensure_dir(&out)?;
    let (family, family_file) = obtain_family(cfg, &out)?;
    let initial = initial_state(cfg, &family)?;
    let b_l1 = norm(&initial.perturbation(), initial.grid().spacing(), NormKind::L1)?;
    let flux = family.flux().clone();
    let normalized = normalize_about_wp(&flux, initial.background())?;
    let theta = solve_theta(&normalized, initial.background().grid())?;

    let mut times = cfg.snapshot_times();
    if times[0] > 0.0 {
        times.insert(0, 0.0);
    }
    let snapshots_dir = cfg.run.write_snapshots.then(|| out.join("snapshots"));
    if let Some(dir) = &snapshots_dir {
        ensure_dir(dir)?;
    }
    let lap = LapConfig {
        hysteresis: cfg.lap_hysteresis,
    };
    let mut perturbation = PerturbationObserver::new(lap, Some(theta.clone()));
    let mut entropy = EntropyObserver::new(&family, true);
    let mut writer = |state: &State, _: &mut SnapshotRecord| -> Result<()> {
        if let Some(dir) = &snapshots_dir {
            let path = dir.join(snapshot_name(state.time()));
            std::fs::write(&path, snapshot_csv(state)).map_err(|e| LabError::io(&path, e))?;
        }
        Ok(())
    };
    let policy = StepPolicy {
        cfl_fraction: cfg.run.cfl_fraction,
        dt_max: cfg.run.dt_max,
        ..StepPolicy::default()
    };
    let (final_state, series) = evolve(
        initial.clone(),
        &flux,
        cfg.run.t_end,
        &policy,
        &times,
        &mut [&mut perturbation, &mut entropy, &mut writer],
    )?;
    let diagnostics_csv = out.join("diagnostics.csv");
    series.write_csv(&diagnostics_csv)?;
    Ok(ScenarioRun {
        config: cfg.clone(),
        fields: entropy.into_fields(),
        family,
        family_file,
        theta,
        initial,
        final_state,
        series,
        b_l1,
        diagnostics_csv,
        snapshots_dir,
    })
}

fn scenario_artifact(
    command: &str,
    cfg: &ScenarioConfig,
    checks: &BTreeSet<Check>,
) -> Result<(RunArtifact, ScenarioRun)> {
    let run = run_scenario(cfg)?;
    let mut art = RunArtifact::new(command, cfg);
    art.family_file = Some(run.family_file.clone());
    art.diagnostics_csv = Some(run.diagnostics_csv.clone());
    art.snapshots_dir = run.snapshots_dir.clone();
    art.summary.insert("alpha".into(), run.family.alpha());
    art.summary.insert("b_l1".into(), run.b_l1);
    art.summary.insert(
        "edge_mass_fraction_final".into(),
        edge_mass_fraction(&run.final_state.perturbation(), run.final_state.grid()),
    );
    art.verdicts.extend(series_verdicts(checks, &run)?);
    Ok((art, run))
}

/// Run a scenario with its configured checks.
pub fn cmd_evolve(cfg: &ScenarioConfig) -> Result<RunArtifact> {
    let checks: BTreeSet<Check> = cfg.checks.iter().copied().collect();
    let (art, _) = scenario_artifact("evolve", cfg, &checks)?;
    art.finish()
}

/// Lap-number suite: the configured checks plus lap non-increase, the L1
/// bound, and the decay targets for `V` and `u - w_p`.
pub fn cmd_lap(cfg: &ScenarioConfig) -> Result<RunArtifact> {
    if cfg.initial.shape == Shape::GaussianBump {
        return Err(LabError::Config("the lap suite needs a zero-mean perturbation".into()));
    }
    let mut checks: BTreeSet<Check> = cfg.checks.iter().copied().collect();
    checks.extend([
        Check::LapNonincrease,
        Check::L1Bound,
        Check::L1Contraction,
        Check::LinfVDecay,
        Check::L1Decay,
    ]);
    let (art, _) = scenario_artifact("lap", cfg, &checks)?;
    art.finish()
}

/// Run a scenario and fit the L2 decay rate over the fit window.
pub fn cmd_dispersion(cfg: &ScenarioConfig) -> Result<RunArtifact> {
    cfg.validate_fit_window()?;
    let checks: BTreeSet<Check> = cfg.checks.iter().copied().filter(|c| *c != Check::Dispersion).collect();
    let (mut art, run) = scenario_artifact("dispersion", cfg, &checks)?;
    match dispersion_fit(&run.series, cfg.fit_window()) {
        Ok(fit) => {
            art.summary.insert("exponent".into(), fit.exponent);
            art.summary.insert("constant".into(), fit.constant);
            art.summary.insert("r_squared".into(), fit.r_squared);
            art.summary.insert("fit_points".into(), fit.points as f64);
            if run.b_l1 > 0.0 {
                art.summary.insert("c_d".into(), fit.constant / run.b_l1);
            }
            art.verdicts.push(
                Verdict::new("dispersion", fit.passes(), fit.exponent, DISPERSION_EXPONENT_BOUND)
                    .with_note(format!("r^2 = {:.6}", fit.r_squared)),
            );
        }
        Err(LabError::Converged(msg)) => {
            art.verdicts
                .push(Verdict::new("dispersion", true, f64::NAN, DISPERSION_EXPONENT_BOUND).with_note(msg));
        }
        Err(e) => return Err(e),
    }
    art.finish()
}

/// Worst values seen in one randomized trial.
#[derive(Debug, Clone, Copy, Default)]
struct TrialOutcome {
    order_violation: f64,
    l1_growth: f64,
    mass_drift: f64,
}

fn random_field(rng: &mut ChaCha8Rng, grid: &LineGrid) -> Vec<f64> {
    let l = grid.length();
    let modes: Vec<(f64, f64)> = (1..=4)
        .map(|k| {
            (
                rng.gen_range(-0.5..0.5) / k as f64,
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    grid.centers()
        .iter()
        .map(|&x| {
            modes
                .iter()
                .enumerate()
                .map(|(k, (a, ph))| a * (std::f64::consts::TAU * (k + 1) as f64 * x / l + ph).sin())
                .sum()
        })
        .collect()
}

fn nonnegative_bump(rng: &mut ChaCha8Rng, grid: &LineGrid) -> Vec<f64> {
    let l = grid.length();
    let height = rng.gen_range(0.0..0.5);
    let width = rng.gen_range(0.2..1.0);
    let centre = grid.left_edge() + rng.gen_range(0.0..l);
    grid.centers()
        .iter()
        .map(|&x| {
            let d = (x - centre).rem_euclid(l);
            let d = d.min(l - d);
            height * (-d * d / (2.0 * width * width)).exp()
        })
        .collect()
}

fn run_trial(
    flux: &FluxModel,
    grid: &LineGrid,
    bg: &Profile,
    seed: u64,
    t_end: f64,
    policy: &StepPolicy,
) -> Result<TrialOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tiled = bg.tile(grid.n_periods());
    let plus = |d: &[f64]| -> Vec<f64> { tiled.iter().zip(d).map(|(a, b)| a + b).collect() };
    let u0 = plus(&random_field(&mut rng, grid));
    let bump = nonnegative_bump(&mut rng, grid);
    let v0: Vec<f64> = u0.iter().zip(&bump).map(|(a, b)| a + b).collect();
    let w0 = plus(&random_field(&mut rng, grid));
    let mut states = Vec::with_capacity(3);
    for v in [u0, v0, w0] {
        states.push(State::new(*grid, bg.clone(), v, 0.0)?);
    }
    let h = grid.spacing();
    let pair = |a: &State, b: &State| -> Result<(f64, f64)> {
        let d: Vec<f64> = a.u().iter().zip(b.u()).map(|(x, y)| x - y).collect();
        Ok((norm(&d, h, NormKind::L1)?, h * d.iter().sum::<f64>()))
    };
    let (mut l1_uv, mass_uv) = pair(&states[0], &states[1])?;
    let (mut l1_uw, mass_uw) = pair(&states[0], &states[2])?;
    let mut out = TrialOutcome {
        order_violation: f64::NEG_INFINITY,
        l1_growth: f64::NEG_INFINITY,
        mass_drift: 0.0,
    };
    while states[0].time() < t_end {
        let dt = states
            .iter()
            .map(|s| policy.dt_for(s, flux))
            .fold(t_end - states[0].time(), f64::min);
        for s in states.iter_mut() {
            *s = step(s, flux, dt)?;
        }
        let t = states[0].time();
        let violation = states[0]
            .u()
            .iter()
            .zip(states[1].u())
            .fold(f64::NEG_INFINITY, |m, (a, b)| m.max(a - b));
        out.order_violation = out.order_violation.max(violation);
        let (n_uv, m_uv) = pair(&states[0], &states[1])?;
        let (n_uw, m_uw) = pair(&states[0], &states[2])?;
        out.l1_growth = out.l1_growth.max(n_uv - l1_uv).max(n_uw - l1_uw);
        l1_uv = n_uv;
        l1_uw = n_uw;
        out.mass_drift = out
            .mass_drift
            .max((m_uv - mass_uv).abs() / t)
            .max((m_uw - mass_uw).abs() / t);
    }
    Ok(out)
}

/// Comparison, contraction and conservation on `trials` seeded random pairs,
/// all runs periodic. Trial `k` uses seed `seed + k`.
pub fn cmd_verify(cfg: &ScenarioConfig, trials: usize, seed: u64) -> Result<RunArtifact> {
    if trials == 0 {
        return Err(LabError::Config("verify needs trials >= 1".into()));
    }
    let mut art = RunArtifact::new("verify", cfg);
    let flux = cfg.flux.build()?;
    let cell = cfg.cell_grid()?;
    let bg = discrete_background(&flux, cfg.family.p, &cell, &cfg.newton())?;
    let grid = LineGrid::new(cell, cfg.verify.n_periods, BoundaryMode::Periodic)?;
    let policy = StepPolicy {
        cfl_fraction: cfg.run.cfl_fraction,
        dt_max: cfg.run.dt_max,
        ..StepPolicy::default()
    };
    const ORDER_SLACK: f64 = 1e-12;
    const L1_SLACK: f64 = 1e-10;
    const MASS_RATE: f64 = 1e-10;
    let mut worst = TrialOutcome {
        order_violation: f64::NEG_INFINITY,
        l1_growth: f64::NEG_INFINITY,
        mass_drift: 0.0,
    };
    let mut failures: [Vec<String>; 3] = Default::default();
    for k in 0..trials {
        let s = seed.wrapping_add(k as u64);
        let o = run_trial(&flux, &grid, &bg, s, cfg.verify.t_end, &policy)?;
        let tag = format!("trial {k} (seed {s})");
        if o.order_violation > ORDER_SLACK {
            failures[0].push(tag.clone());
        }
        if o.l1_growth > L1_SLACK {
            failures[1].push(tag.clone());
        }
        if o.mass_drift > MASS_RATE {
            failures[2].push(tag);
        }
        worst.order_violation = worst.order_violation.max(o.order_violation);
        worst.l1_growth = worst.l1_growth.max(o.l1_growth);
        worst.mass_drift = worst.mass_drift.max(o.mass_drift);
    }
    let names = ["comparison", "contraction", "conservation"];
    let values = [worst.order_violation, worst.l1_growth, worst.mass_drift];
    let limits = [ORDER_SLACK, L1_SLACK, MASS_RATE];
    for i in 0..3 {
        let passed = failures[i].is_empty();
        let rate = (trials - failures[i].len()) as f64 / trials as f64;
        let mut v = Verdict::new(names[i], passed, values[i], limits[i]);
        v = if passed {
            v.with_note(format!("{trials}/{trials} trials"))
        } else {
            v.with_note(format!(
                "pass rate {:.1}%; failed: {}",
                100.0 * rate,
                failures[i].join(", ")
            ))
        };
        art.verdicts.push(v);
    }
    art.summary.insert("trials".into(), trials as f64);
    art.summary.insert("seed".into(), seed as f64);
    art.finish()
}
