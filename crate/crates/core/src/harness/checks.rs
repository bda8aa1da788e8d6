use std::collections::BTreeSet;

use super::commands::ScenarioRun;
use super::config::Check;
use super::Verdict;
use crate::diagnostics::{SnapshotRecord, L1_BOUND_SLACK};
use crate::error::Result;

/// Largest increase between consecutive values (negative if strictly decreasing).
fn max_increase(values: &[f64]) -> f64 {
    values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
}

fn ratio_verdict(name: &str, first: f64, last: f64) -> Verdict {
    let ratio = if first > 0.0 { last / first } else { 0.0 };
    Verdict::new(name, ratio <= 0.1, ratio, 0.1)
}

fn column(rows: &[SnapshotRecord], pick: impl Fn(&SnapshotRecord) -> f64) -> Vec<f64> {
    rows.iter().map(pick).collect()
}

fn counts(rows: &[SnapshotRecord], pick: impl Fn(&SnapshotRecord) -> Option<usize>) -> Vec<f64> {
    rows.iter().map(|r| pick(r).map_or(f64::NAN, |c| c as f64)).collect()
}

pub(crate) fn series_verdicts(checks: &BTreeSet<Check>, run: &ScenarioRun) -> Result<Vec<Verdict>> {
    let rows = run.series.rows();
    let first = &rows[0];
    let last = &rows[rows.len() - 1];
    let mut out = Vec::new();
    for &check in checks {
        let v = match check {
            Check::L1Contraction => {
                let g = max_increase(&column(rows, |r| r.l1_dist));
                Verdict::new("l1_contraction", g <= 1e-12, g, 1e-12)
            }
            Check::L1Decay => ratio_verdict("l1_decay", first.l1_dist, last.l1_dist),
            Check::LinfVDecay => ratio_verdict("linf_v_decay", first.linf_v, last.linf_v),
            Check::LapNonincrease => {
                let laps = counts(rows, |r| r.lap_number);
                let g = max_increase(&laps);
                Verdict::new("lap_nonincrease", g <= 0.0, g, 0.0).with_note(format!(
                    "lap numbers {:?}",
                    laps.iter().map(|&l| l as i64).collect::<Vec<_>>()
                ))
            }
            Check::L1Bound => {
                let g = rows
                    .iter()
                    .map(|r| r.l1_dist - r.l1_bound)
                    .fold(f64::NEG_INFINITY, f64::max);
                Verdict::new("l1_bound", g <= L1_BOUND_SLACK, g, L1_BOUND_SLACK)
            }
            Check::SignVsLap => {
                let g = rows
                    .iter()
                    .map(|r| r.sign_changes.unwrap_or(0) as f64 - r.lap_number.unwrap_or(0) as f64 - 1.0)
                    .fold(f64::NEG_INFINITY, f64::max);
                Verdict::new("sign_vs_lap", g <= 0.0, g, 0.0)
            }
            Check::WeightedEnergy => {
                let g = max_increase(&column(rows, |r| r.weighted_energy));
                Verdict::new("weighted_energy", g <= 1e-9, g, 1e-9)
            }
            Check::EtaNonnegative => {
                let m = run
                    .fields
                    .iter()
                    .flat_map(|(_, f)| f.eta.iter().copied())
                    .fold(f64::INFINITY, f64::min);
                Verdict::new("eta_nonnegative", m >= 0.0, m, 0.0)
            }
            Check::EtaSandwich => {
                let base = run.initial.background().mean();
                let (alpha, c) = (run.family.alpha(), run.family.dp_max());
                let mut worst = f64::INFINITY;
                for (_, f) in &run.fields {
                    let (lo, hi) = f.sandwich_margins(base, alpha, c);
                    let scale = f.eta.iter().fold(f64::MIN_POSITIVE, |m, v| m.max(v.abs()));
                    worst = worst.min(lo.min(hi) / scale);
                }
                Verdict::new("eta_sandwich", worst >= -1e-12, worst, -1e-12)
                    .with_note("smallest margin relative to max eta")
            }
            Check::PiL1Bound => {
                let bound = run.b_l1 / run.family.alpha();
                let m = column(rows, |r| r.l1_pi).into_iter().fold(f64::NEG_INFINITY, f64::max);
                Verdict::new("pi_l1_bound", m <= bound * (1.0 + 1e-12), m, bound)
            }
            Check::EtaNonincrease => {
                let g = max_increase(&column(rows, |r| r.total_eta));
                Verdict::new("eta_nonincrease", g <= 1e-10, g, 1e-10)
            }
            Check::MassConservation => {
                let m0 = first.mass_offset;
                let drift = rows.iter().map(|r| (r.mass_offset - m0).abs()).fold(0.0, f64::max);
                let leak = last.boundary_leakage;
                let limit = 1e-8 * run.b_l1;
                let worst = drift.max(leak);
                Verdict::new("mass_conservation", worst <= limit, worst, limit)
                    .with_note(format!("mass drift {drift:.3e}, boundary leakage {leak:.3e}"))
            }
            Check::Dispersion => {
                let fit = crate::entropy::dispersion_fit(&run.series, run.config.fit_window())?;
                Verdict::new(
                    "dispersion",
                    fit.passes(),
                    fit.exponent,
                    crate::entropy::DISPERSION_EXPONENT_BOUND,
                )
                .with_note(format!("r^2 = {:.6}", fit.r_squared))
            }
        };
        out.push(v);
    }
    Ok(out)
}
