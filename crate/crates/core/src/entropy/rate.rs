use crate::diagnostics::DiagnosticsSeries;
use crate::error::{LabError, Result};
use crate::numerics::{linear_fit, norm, NormKind};

/// The fitted exponent must not exceed this.
pub const DISPERSION_EXPONENT_BOUND: f64 = -0.20;

/// Nash interpolation exponent in one dimension, `1/theta = 1 + 2/d`.
pub const NASH_THETA: f64 = 1.0 / 3.0;

/// Least-squares fit `||u - w_p||_2 ~ constant * t^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionFit {
    pub window: (f64, f64),
    pub exponent: f64,
    /// `exp(intercept)` of the log-log fit.
    pub constant: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl DispersionFit {
    pub fn passes(&self) -> bool {
        self.exponent <= DISPERSION_EXPONENT_BOUND
    }
}

pub const MIN_FIT_POINTS: usize = 8;

/// Fit of the `l2_dist` column over snapshots with `t` in the window.
pub fn dispersion_fit(series: &DiagnosticsSeries, window: (f64, f64)) -> Result<DispersionFit> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return Err(LabError::InvalidInput(format!(
            "fit window ({lo}, {hi}) needs 0 < t_lo < t_hi"
        )));
    }
    let slack = 1e-9 * hi;
    let rows: Vec<_> = series
        .rows()
        .iter()
        .filter(|r| r.time >= lo - slack && r.time <= hi + slack)
        .collect();
    if rows.len() < MIN_FIT_POINTS {
        return Err(LabError::InvalidInput(format!(
            "fit window ({lo}, {hi}) holds {} snapshots, need {MIN_FIT_POINTS}",
            rows.len()
        )));
    }
    if let Some(r) = rows.iter().find(|r| r.l2_dist.is_nan()) {
        return Err(LabError::InvalidInput(format!(
            "no L2 distance recorded at t = {}",
            r.time
        )));
    }
    if let Some(r) = rows.iter().find(|r| r.l2_dist <= 0.0) {
        return Err(LabError::Converged(format!("L2 distance is zero at t = {}", r.time)));
    }
    let x: Vec<f64> = rows.iter().map(|r| r.time.ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.l2_dist.ln()).collect();
    let (exponent, intercept, r_squared) = linear_fit(&x, &y);
    Ok(DispersionFit {
        window,
        exponent,
        constant: intercept.exp(),
        r_squared,
        points: rows.len(),
    })
}

/// `||pi||_2 / (||pi||_1^{1 - theta} ||D pi||_2^theta)`, forward differences
/// with wrap-around.
pub fn nash_ratio(pi: &[f64], h: f64) -> Result<f64> {
    let n = pi.len();
    if n < 2 {
        return Err(LabError::InvalidInput("need at least two samples".into()));
    }
    let d: Vec<f64> = (0..n).map(|i| (pi[(i + 1) % n] - pi[i]) / h).collect();
    let l1 = norm(pi, h, NormKind::L1)?;
    let grad = norm(&d, h, NormKind::L2)?;
    if l1 == 0.0 || grad == 0.0 {
        return Err(LabError::Converged(
            "pi is constant; the Nash quotient is undefined".into(),
        ));
    }
    Ok(norm(pi, h, NormKind::L2)? / (l1.powf(1.0 - NASH_THETA) * grad.powf(NASH_THETA)))
}

/// Residuals of `d/dt int eta + dissipation = 0` at interior snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceReport {
    /// `(t_k, r_k)` for every interior snapshot.
    pub residuals: Vec<(f64, f64)>,
    pub max_abs: f64,
}

/// Centred-difference check of the entropy balance on uniformly spaced snapshots.
pub fn entropy_balance_check(series: &DiagnosticsSeries) -> Result<BalanceReport> {
    let rows = series.rows();
    if rows.len() < 3 {
        return Err(LabError::InvalidInput(
            "the balance check needs at least 3 snapshots".into(),
        ));
    }
    let dt = rows[1].time - rows[0].time;
    if rows
        .windows(2)
        .any(|w| ((w[1].time - w[0].time) - dt).abs() > 1e-9 * dt.max(w[1].time))
    {
        return Err(LabError::InvalidInput(
            "the balance check needs uniformly spaced snapshots".into(),
        ));
    }
    if rows.iter().any(|r| r.total_eta.is_nan() || r.dissipation.is_nan()) {
        return Err(LabError::InvalidInput("entropy columns were not recorded".into()));
    }
    let residuals: Vec<(f64, f64)> = rows
        .windows(3)
        .map(|w| {
            let rate = (w[2].total_eta - w[0].total_eta) / (w[2].time - w[0].time);
            (w[1].time, rate + w[1].dissipation)
        })
        .collect();
    let max_abs = residuals.iter().fold(0.0f64, |m, r| m.max(r.1.abs()));
    Ok(BalanceReport { residuals, max_abs })
}
