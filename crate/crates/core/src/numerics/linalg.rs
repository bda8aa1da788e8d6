//! Tridiagonal, cyclic tridiagonal and small dense solves.

use nalgebra::{DMatrix, DVector};

use crate::error::{LabError, Result};

/// Thomas algorithm for `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`.
///
/// `sub[0]` and `sup[n-1]` are ignored.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 || sub.len() != n || sup.len() != n || rhs.len() != n {
        return Err(LabError::InvalidInput(
            "tridiagonal bands must share a nonzero length".into(),
        ));
    }
    let mut gam = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut bet = diag[0];
    if bet == 0.0 {
        return Err(LabError::Singular("zero pivot in tridiagonal solve at row 0".into()));
    }
    x[0] = rhs[0] / bet;
    for i in 1..n {
        gam[i] = sup[i - 1] / bet;
        bet = diag[i] - sub[i] * gam[i];
        if bet == 0.0 {
            return Err(LabError::Singular(format!(
                "zero pivot in tridiagonal solve at row {i}"
            )));
        }
        x[i] = (rhs[i] - sub[i] * x[i - 1]) / bet;
    }
    for i in (0..n - 1).rev() {
        x[i] -= gam[i + 1] * x[i + 1];
    }
    Ok(x)
}

/// Periodic tridiagonal system: row 0 couples to `x[n-1]` through `sub[0]` and
/// row `n-1` couples to `x[0]` through `sup[n-1]`. Sherman-Morrison on top of Thomas.
pub fn solve_cyclic_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n < 3 {
        return Err(LabError::InvalidInput("cyclic solve needs at least 3 unknowns".into()));
    }
    let alpha = sup[n - 1];
    let beta = sub[0];
    let gamma = -diag[0];
    let mut d = diag.to_vec();
    d[0] -= gamma;
    d[n - 1] -= alpha * beta / gamma;
    let x = solve_tridiagonal(sub, &d, sup, rhs)?;
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(sub, &d, sup, &u)?;
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    Ok(x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect())
}

/// Dense LU solve; `matrix` is row-major `n x n`.
pub fn solve_dense(matrix: DMatrix<f64>, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = matrix.nrows();
    let scale = matrix.amax().max(f64::MIN_POSITIVE);
    let lu = matrix.lu();
    let u = lu.u();
    let min_pivot = (0..n).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if !(min_pivot > 1e-13 * scale) {
        return Err(LabError::Singular(format!(
            "bordered matrix pivot {min_pivot:.3e} relative to scale {scale:.3e}; grid may be too coarse"
        )));
    }
    let b = DVector::from_column_slice(rhs);
    lu.solve(&b)
        .map(|x| x.iter().copied().collect())
        .ok_or_else(|| LabError::Singular("LU solve failed".into()))
}
