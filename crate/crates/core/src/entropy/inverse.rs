use crate::error::{LabError, Result};
use crate::stationary::StationaryFamily;

/// Cubic Hermite piece of `p -> w_p(x_i)` on one knot interval, slopes taken
/// from `dp_w` and limited (Fritsch-Carlson) so the piece stays increasing.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Piece {
    p0: f64,
    dp: f64,
    y0: f64,
    y1: f64,
    m0: f64,
    m1: f64,
}

impl Piece {
    pub(crate) fn new(family: &StationaryFamily, cell: usize, j: usize) -> Self {
        let p = family.p_grid();
        let y0 = family.profiles()[j].values()[cell];
        let y1 = family.profiles()[j + 1].values()[cell];
        let dp = p[j + 1] - p[j];
        let secant = (y1 - y0) / dp;
        let mut m0 = family.dp_profiles()[j].values()[cell];
        let mut m1 = family.dp_profiles()[j + 1].values()[cell];
        let (a, b) = (m0 / secant, m1 / secant);
        let r2 = a * a + b * b;
        if r2 > 9.0 {
            let tau = 3.0 / r2.sqrt();
            m0 = tau * a * secant;
            m1 = tau * b * secant;
        }
        Self {
            p0: p[j],
            dp,
            y0,
            y1,
            m0,
            m1,
        }
    }

    pub(crate) fn end(&self) -> f64 {
        self.p0 + self.dp
    }

    pub(crate) fn value(&self, p: f64) -> f64 {
        let (knot, offset) = self.offset(p);
        knot + offset
    }

    /// `(y_k, H(p) - y_k)` relative to the nearer knot, so that differences
    /// `u - H(p)` close to a knot keep their relative accuracy.
    pub(crate) fn offset(&self, p: f64) -> (f64, f64) {
        let t = (p - self.p0) / self.dp;
        let t2 = t * t;
        let t3 = t2 * t;
        let rise = self.y1 - self.y0;
        if t <= 0.5 {
            let off =
                (3.0 * t2 - 2.0 * t3) * rise + (t3 - 2.0 * t2 + t) * self.dp * self.m0 + (t3 - t2) * self.dp * self.m1;
            (self.y0, off)
        } else {
            let s = 1.0 - t;
            let s2 = s * s;
            let s3 = s2 * s;
            // mirrored basis about the right knot
            let off =
                -(3.0 * s2 - 2.0 * s3) * rise - (s3 - 2.0 * s2 + s) * self.dp * self.m1 - (s3 - s2) * self.dp * self.m0;
            (self.y1, off)
        }
    }

    /// `u - H(p)` without cancellation against the knot value.
    pub(crate) fn gap(&self, u: f64, p: f64) -> f64 {
        let (knot, off) = self.offset(p);
        (u - knot) - off
    }

    pub(crate) fn slope(&self, p: f64) -> f64 {
        let t = (p - self.p0) / self.dp;
        let t2 = t * t;
        (6.0 * t2 - 6.0 * t) * (self.y0 - self.y1) / self.dp
            + (3.0 * t2 - 4.0 * t + 1.0) * self.m0
            + (3.0 * t2 - 2.0 * t) * self.m1
    }
}

/// Index `j` of the knot interval `[p_j, p_{j+1}]` containing `p`.
pub(crate) fn segment_of(family: &StationaryFamily, p: f64) -> Result<usize> {
    let grid = family.p_grid();
    let last = grid.len() - 1;
    if !(p >= grid[0] && p <= grid[last]) {
        return Err(LabError::InvalidInput(format!(
            "p = {p} lies outside the family range [{}, {}]",
            grid[0], grid[last]
        )));
    }
    Ok(grid.partition_point(|&q| q <= p).clamp(1, last) - 1)
}

/// The family's interpolant `w_p(x_cell)` and its p-slope.
pub fn interpolate_w(family: &StationaryFamily, p: f64, cell: usize) -> Result<(f64, f64)> {
    check_cell(family, cell)?;
    let piece = Piece::new(family, cell, segment_of(family, p)?);
    Ok((piece.value(p), piece.slope(p)))
}

fn check_cell(family: &StationaryFamily, cell: usize) -> Result<()> {
    if cell >= family.grid().n_cells() {
        return Err(LabError::InvalidInput(format!(
            "cell {cell} outside a family grid of {} cells",
            family.grid().n_cells()
        )));
    }
    Ok(())
}

/// `pi` with `w_pi(x_cell) = u`: bisection over the knots, then safeguarded
/// Newton on the monotone cubic.
pub fn invert_p(family: &StationaryFamily, u: f64, cell: usize) -> Result<f64> {
    check_cell(family, cell)?;
    let col = |j: usize| family.profiles()[j].values()[cell];
    let p = family.p_grid();
    let last = p.len() - 1;
    let (lo, hi) = (col(0), col(last));
    if !(u >= lo && u <= hi) {
        return Err(LabError::OutOfRange { cell, value: u, lo, hi });
    }
    let (mut a, mut b) = (0, last);
    while b - a > 1 {
        let mid = (a + b) / 2;
        if col(mid) <= u {
            a = mid;
        } else {
            b = mid;
        }
    }
    if col(a) == u {
        return Ok(p[a]);
    }
    if col(b) == u {
        return Ok(p[b]);
    }
    let piece = Piece::new(family, cell, a);
    let (mut left, mut right) = (p[a], p[b]);
    let mut x = left + (right - left) * (u - col(a)) / (col(b) - col(a));
    // relative to the distance from the knots, so pi stays accurate near a knot
    let tol = 4.0 * f64::EPSILON * (u - col(a)).min(col(b) - u);
    for _ in 0..100 {
        let r = -piece.gap(u, x);
        if r.abs() <= tol {
            break;
        }
        if r > 0.0 {
            right = x;
        } else {
            left = x;
        }
        let s = piece.slope(x);
        let newton = x - r / s;
        x = if s > 0.0 && newton > left && newton < right {
            newton
        } else {
            0.5 * (left + right)
        };
        if right - left <= 2.0 * f64::EPSILON * left.abs().max(right.abs()) {
            break;
        }
    }
    Ok(x)
}
