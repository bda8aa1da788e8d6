//! The entropy built on the stationary family: `pi = p(u, x)` with
//! `w_pi(x) = u`, and `eta(u, x) = int_{p0}^{pi} (u - w_p(x)) dp` where `p0` is the
//! mean of the background the run is compared against.

mod inverse;
mod rate;

pub use inverse::{interpolate_w, invert_p};
pub use rate::{
    dispersion_fit, entropy_balance_check, nash_ratio, BalanceReport, DispersionFit, DISPERSION_EXPONENT_BOUND,
    MIN_FIT_POINTS, NASH_THETA,
};

use inverse::{segment_of, Piece};

use crate::diagnostics::SnapshotRecord;
use crate::error::{LabError, Result};
use crate::evolution::{Observer, State};
use crate::numerics::{adaptive_simpson, norm, BoundaryMode, NormKind};
use crate::stationary::StationaryFamily;

/// Relative tolerance of the per-cell quadrature in p.
pub const ETA_QUADRATURE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyField {
    pub pi: Vec<f64>,
    pub eta: Vec<f64>,
    /// `h * sum eta`.
    pub total_eta: f64,
    /// `h * sum dp_w(pi) (D pi)^2`, centred differences.
    pub dissipation: f64,
    /// `h * sum |pi|`, taken about the base value.
    pub l1_pi: f64,
}

impl EntropyField {
    /// Smallest margins in `lower pi^2/2 <= eta <= upper pi^2/2` over the cells,
    /// with `pi` measured from `base`; negative means violated.
    pub fn sandwich_margins(&self, base: f64, lower: f64, upper: f64) -> (f64, f64) {
        self.pi
            .iter()
            .zip(&self.eta)
            .fold((f64::INFINITY, f64::INFINITY), |(lo, hi), (p, e)| {
                let q = 0.5 * (p - base) * (p - base);
                (lo.min(e - lower * q), hi.min(upper * q - e))
            })
    }
}

fn eta_cell(family: &StationaryFamily, u: f64, cell: usize, base: f64, pi: f64) -> Result<f64> {
    if pi == base {
        return Ok(0.0);
    }
    let (a, b, sign) = if pi > base { (base, pi, 1.0) } else { (pi, base, -1.0) };
    let mut total = 0.0;
    let mut lo = a;
    while lo < b {
        let piece = Piece::new(family, cell, segment_of(family, lo)?);
        let hi = piece.end().min(b);
        total += adaptive_simpson(&|p: f64| piece.gap(u, p), lo, hi, ETA_QUADRATURE_TOL);
        lo = hi;
    }
    Ok(sign * total)
}

/// `pi`, `eta` and the dissipation of `state`, measured from the mean of its background.
pub fn eta_field(family: &StationaryFamily, state: &State) -> Result<EntropyField> {
    let grid = state.grid();
    if family.grid() != grid.cell_grid() {
        return Err(LabError::InvalidInput(
            "family and state use different cell grids".into(),
        ));
    }
    let n_cell = grid.cell_grid().n_cells();
    let base = state.background().mean();
    segment_of(family, base)?;
    let u = state.u();
    let n = u.len();
    let mut pi = Vec::with_capacity(n);
    let mut eta = Vec::with_capacity(n);
    for (i, &ui) in u.iter().enumerate() {
        let cell = i % n_cell;
        let p = invert_p(family, ui, cell)?;
        eta.push(eta_cell(family, ui, cell, base, p)?);
        pi.push(p);
    }
    let h = grid.spacing();
    let periodic = grid.boundary() == BoundaryMode::Periodic;
    let mut dissipation = 0.0;
    for i in 0..n {
        let d = if periodic {
            (pi[(i + 1) % n] - pi[(i + n - 1) % n]) / (2.0 * h)
        } else if i == 0 {
            (pi[1] - pi[0]) / h
        } else if i == n - 1 {
            (pi[n - 1] - pi[n - 2]) / h
        } else {
            (pi[i + 1] - pi[i - 1]) / (2.0 * h)
        };
        let piece = Piece::new(family, i % n_cell, segment_of(family, pi[i])?);
        dissipation += piece.slope(pi[i]) * d * d;
    }
    let shifted: Vec<f64> = pi.iter().map(|p| p - base).collect();
    Ok(EntropyField {
        total_eta: h * eta.iter().sum::<f64>(),
        dissipation: h * dissipation,
        l1_pi: norm(&shifted, h, NormKind::L1)?,
        pi,
        eta,
    })
}

/// Fills `total_eta`, `dissipation`, `l1_pi` and `nash_ratio`; optionally keeps
/// every field it computed.
#[derive(Debug, Clone)]
pub struct EntropyObserver<'a> {
    family: &'a StationaryFamily,
    keep_fields: bool,
    fields: Vec<(f64, EntropyField)>,
}

impl<'a> EntropyObserver<'a> {
    pub fn new(family: &'a StationaryFamily, keep_fields: bool) -> Self {
        Self {
            family,
            keep_fields,
            fields: Vec::new(),
        }
    }

    pub fn fields(&self) -> &[(f64, EntropyField)] {
        &self.fields
    }

    pub fn into_fields(self) -> Vec<(f64, EntropyField)> {
        self.fields
    }
}

impl Observer for EntropyObserver<'_> {
    fn observe(&mut self, state: &State, rec: &mut SnapshotRecord) -> Result<()> {
        let field = eta_field(self.family, state)?;
        rec.total_eta = field.total_eta;
        rec.dissipation = field.dissipation;
        rec.l1_pi = field.l1_pi;
        let base = state.background().mean();
        let shifted: Vec<f64> = field.pi.iter().map(|p| p - base).collect();
        rec.nash_ratio = match nash_ratio(&shifted, state.grid().spacing()) {
            Ok(r) => r,
            Err(LabError::Converged(_)) => f64::NAN,
            Err(e) => return Err(e),
        };
        if self.keep_fields {
            self.fields.push((state.time(), field));
        }
        Ok(())
    }
}
