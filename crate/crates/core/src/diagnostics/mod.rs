//! Observables of the perturbation `u - w_p`: its primitive `V`, the weighted
//! energy, lap and sign counts, and the `L1` bound through the lap number.

mod lap;
mod series;

pub use lap::{lap_number, sign_changes, LapConfig};
pub use series::{DiagnosticsSeries, SnapshotRecord, CSV_HEADER};

use crate::error::{LabError, Result};
use crate::evolution::{Observer, State};
use crate::numerics::{norm, primitive, NormKind, Profile};

/// `h * sum theta_i V_i^2`, with `theta` tiled over the length of `v`.
pub fn weighted_energy(theta: &Profile, v: &[f64], h: f64) -> Result<f64> {
    let th = theta.values();
    if !v.len().is_multiple_of(th.len()) {
        return Err(LabError::InvalidInput(format!(
            "{} samples do not tile a weight of {} cells",
            v.len(),
            th.len()
        )));
    }
    if let Some((cell, &min)) = th.iter().enumerate().find(|(_, &t)| !(t > 0.0)) {
        return Err(LabError::NotPositive {
            what: "theta",
            cell,
            min,
        });
    }
    if !(h > 0.0) {
        return Err(LabError::InvalidInput("spacing must be > 0".into()));
    }
    Ok(h * v.iter().enumerate().map(|(i, x)| th[i % th.len()] * x * x).sum::<f64>())
}

/// Both sides of `||u - w_p||_1 <= 2 (m + 1) ||V||_inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1BoundReport {
    pub laps: usize,
    pub l1_dist: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Slack added to the right-hand side of the bound.
pub const L1_BOUND_SLACK: f64 = 1e-9;

pub fn l1_bound_check(state: &State, v: &[f64], m: usize) -> Result<L1BoundReport> {
    if v.len() != state.u().len() {
        return Err(LabError::InvalidInput(
            "primitive length does not match the state".into(),
        ));
    }
    let h = state.grid().spacing();
    let l1_dist = norm(&state.perturbation(), h, NormKind::L1)?;
    let bound = 2.0 * (m as f64 + 1.0) * norm(v, h, NormKind::Linf)?;
    Ok(L1BoundReport {
        laps: m,
        l1_dist,
        bound,
        holds: l1_dist <= bound + L1_BOUND_SLACK,
    })
}

/// Fills the distance, primitive, lap, sign and (when a weight is given)
/// weighted-energy columns.
#[derive(Debug, Clone, Default)]
pub struct PerturbationObserver {
    pub lap: LapConfig,
    pub theta: Option<Profile>,
}

impl PerturbationObserver {
    pub fn new(lap: LapConfig, theta: Option<Profile>) -> Self {
        Self { lap, theta }
    }
}

impl Observer for PerturbationObserver {
    fn observe(&mut self, state: &State, rec: &mut SnapshotRecord) -> Result<()> {
        let h = state.grid().spacing();
        let b = state.perturbation();
        let v = primitive(&b, h);
        rec.l1_dist = norm(&b, h, NormKind::L1)?;
        rec.l2_dist = norm(&b, h, NormKind::L2)?;
        rec.linf_v = norm(&v, h, NormKind::Linf)?;
        rec.l2_v = norm(&v, h, NormKind::L2)?;
        let m = lap_number(&v, &self.lap);
        rec.lap_number = Some(m);
        rec.sign_changes = Some(sign_changes(&b, &self.lap));
        rec.l1_bound = l1_bound_check(state, &v, m)?.bound;
        if let Some(theta) = &self.theta {
            rec.weighted_energy = weighted_energy(theta, &v, h)?;
        }
        Ok(())
    }
}
