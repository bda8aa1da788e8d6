//! Midpoint-rule norms, the discrete primitive, and adaptive Simpson.

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    L1,
    L2,
    Linf,
}

/// Midpoint-rule norm of cell values with spacing `h`.
pub fn norm(values: &[f64], h: f64, kind: NormKind) -> Result<f64> {
    if values.is_empty() {
        return Err(LabError::InvalidInput("norm of an empty array".into()));
    }
    if !(h > 0.0) {
        return Err(LabError::InvalidInput(format!(
            "grid spacing must be positive, got {h}"
        )));
    }
    Ok(match kind {
        NormKind::L1 => h * values.iter().map(|v| v.abs()).sum::<f64>(),
        NormKind::L2 => (h * values.iter().map(|v| v * v).sum::<f64>()).sqrt(),
        NormKind::Linf => values.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
    })
}

/// `h * sum(a - b)`.
pub fn mass_offset(a: &[f64], b: &[f64], h: f64) -> f64 {
    h * a.iter().zip(b).map(|(x, y)| x - y).sum::<f64>()
}

/// Left cumulative sum `V_i = h * sum_{j <= i} u_j`, zero inflow at the left edge.
pub fn primitive(u: &[f64], h: f64) -> Vec<f64> {
    let mut acc = 0.0;
    u.iter()
        .map(|&v| {
            acc += v;
            h * acc
        })
        .collect()
}

/// Arithmetic cell average.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to relative tolerance `rel_tol`
/// (with a round-off floor on each panel so integrals near zero terminate).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let tol = rel_tol * whole.abs();
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 40)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    let scale = [fa, flm, fm, frm, fb].iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let floor = 64.0 * f64::EPSILON * (b - a).abs() * scale;
    if depth == 0 || delta.abs() <= 15.0 * tol.max(floor) {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Ordinary least squares `y = slope * x + intercept`; returns (slope, intercept, r²).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        let ss_res: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| {
                let r = b - (slope * a + intercept);
                r * r
            })
            .sum();
        1.0 - ss_res / syy
    };
    (slope, intercept, r2)
}
