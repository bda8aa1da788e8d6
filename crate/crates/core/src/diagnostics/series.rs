use std::fmt::Write as _;
use std::path::Path;

use crate::error::{LabError, Result};

/// Everything measured at one snapshot. Columns an observer did not fill stay
/// `NaN` (or `None` for the counts).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotRecord {
    pub time: f64,
    pub l1_dist: f64,
    pub l2_dist: f64,
    pub linf_v: f64,
    pub l2_v: f64,
    pub weighted_energy: f64,
    pub total_eta: f64,
    pub dissipation: f64,
    pub lap_number: Option<usize>,
    pub sign_changes: Option<usize>,
    pub mass_offset: f64,
    pub boundary_leakage: f64,
    pub l1_bound: f64,
    pub l1_pi: f64,
    pub nash_ratio: f64,
}

impl SnapshotRecord {
    pub fn at(time: f64) -> Self {
        Self {
            time,
            l1_dist: f64::NAN,
            l2_dist: f64::NAN,
            linf_v: f64::NAN,
            l2_v: f64::NAN,
            weighted_energy: f64::NAN,
            total_eta: f64::NAN,
            dissipation: f64::NAN,
            lap_number: None,
            sign_changes: None,
            mass_offset: f64::NAN,
            boundary_leakage: f64::NAN,
            l1_bound: f64::NAN,
            l1_pi: f64::NAN,
            nash_ratio: f64::NAN,
        }
    }
}

/// Header of the diagnostics CSV. Stable: new columns are only ever appended.
pub const CSV_HEADER: &str = "t,l1_dist,l2_dist,linf_V,l2_V,weighted_energy,total_eta,dissipation,lap_number,sign_changes,mass_offset,boundary_leakage,l1_bound,L1_pi,nash_ratio";

/// Time-ordered snapshot records of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticsSeries {
    rows: Vec<SnapshotRecord>,
}

impl DiagnosticsSeries {
    pub fn push(&mut self, rec: SnapshotRecord) -> Result<()> {
        if let Some(last) = self.rows.last() {
            if !(rec.time > last.time) {
                return Err(LabError::InvalidInput(format!(
                    "snapshot time {} does not follow {}",
                    rec.time, last.time
                )));
            }
        }
        self.rows.push(rec);
        Ok(())
    }

    pub fn rows(&self) -> &[SnapshotRecord] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, pick: impl Fn(&SnapshotRecord) -> f64) -> Vec<f64> {
        self.rows.iter().map(pick).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.column(|r| r.time)
    }

    /// Append another series that starts after this one ends.
    pub fn extend(&mut self, other: DiagnosticsSeries) -> Result<()> {
        for r in other.rows {
            self.push(r)?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        let count = |c: Option<usize>| c.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.time,
                r.l1_dist,
                r.l2_dist,
                r.linf_v,
                r.l2_v,
                r.weighted_energy,
                r.total_eta,
                r.dissipation,
                count(r.lap_number),
                count(r.sign_changes),
                r.mass_offset,
                r.boundary_leakage,
                r.l1_bound,
                r.l1_pi,
                r.nash_ratio
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| LabError::io(path, e))
    }
}
