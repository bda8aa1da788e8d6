use super::scheme::{step, State, StepPolicy};
use crate::diagnostics::{DiagnosticsSeries, SnapshotRecord};
use crate::error::{LabError, Result};
use crate::numerics::FluxModel;

/// Hook run at every snapshot; fills in whatever columns it owns.
pub trait Observer {
    fn observe(&mut self, state: &State, record: &mut SnapshotRecord) -> Result<()>;
}

impl<F> Observer for F
where
    F: FnMut(&State, &mut SnapshotRecord) -> Result<()>,
{
    fn observe(&mut self, state: &State, record: &mut SnapshotRecord) -> Result<()> {
        self(state, record)
    }
}

fn record(state: &State, observers: &mut [&mut dyn Observer], series: &mut DiagnosticsSeries) -> Result<()> {
    let mut rec = SnapshotRecord::at(state.time());
    rec.mass_offset = state.mass_offset();
    rec.boundary_leakage = state.boundary_leakage();
    for obs in observers.iter_mut() {
        obs.observe(state, &mut rec)?;
    }
    series.push(rec)
}

/// Advance to `t_end`, landing exactly on every snapshot time in
/// `[state.time, t_end]` and running the observers there.
pub fn evolve(
    state: State,
    flux: &FluxModel,
    t_end: f64,
    policy: &StepPolicy,
    snapshot_times: &[f64],
    observers: &mut [&mut dyn Observer],
) -> Result<(State, DiagnosticsSeries)> {
    policy.validate()?;
    if t_end < state.time() {
        return Err(LabError::InvalidInput(format!(
            "t_end {t_end} precedes the state time {}",
            state.time()
        )));
    }
    if snapshot_times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(LabError::InvalidInput(
            "snapshot times must be strictly increasing".into(),
        ));
    }
    let mut targets: Vec<f64> = snapshot_times
        .iter()
        .copied()
        .filter(|&t| t >= state.time() && t <= t_end)
        .collect();
    if targets.last().is_none_or(|&t| t < t_end) {
        targets.push(t_end);
    }
    let wanted = |t: f64| snapshot_times.contains(&t);

    let mut series = DiagnosticsSeries::default();
    let mut state = state;
    for target in targets {
        while state.time() < target {
            let dt = policy.dt_for(&state, flux);
            let remaining = target - state.time();
            // Land exactly on the target instead of leaving a sliver.
            let (dt, land) = if dt >= remaining * (1.0 - 1e-12) {
                (remaining, true)
            } else {
                (dt, false)
            };
            state = step(&state, flux, dt)?;
            if land {
                state.set_time(target);
            }
        }
        if wanted(target) {
            record(&state, observers, &mut series)?;
        }
    }
    Ok((state, series))
}
