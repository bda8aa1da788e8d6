use super::grid::CellGrid;
use super::quadrature::mean;
use crate::error::{LabError, Result};

/// A periodic function sampled at the centres of a [`CellGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    grid: CellGrid,
    values: Vec<f64>,
    mean: f64,
}

impl Profile {
    pub fn new(grid: CellGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(LabError::InvalidInput(format!(
                "profile has {} values for a grid of {} cells",
                values.len(),
                grid.n_cells()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LabError::InvalidInput("profile contains non-finite values".into()));
        }
        let mean = mean(&values);
        Ok(Self { grid, values, mean })
    }

    pub fn constant(grid: CellGrid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.n_cells()],
            mean: value,
        }
    }

    pub fn grid(&self) -> &CellGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn min(&self) -> (usize, f64) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc })
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Repeat the profile `n_periods` times.
    pub fn tile(&self, n_periods: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.values.len() * n_periods);
        for _ in 0..n_periods {
            out.extend_from_slice(&self.values);
        }
        out
    }
}
