use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Uniform cell-centred discretisation of one period `(0, period)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGrid {
    n_cells: usize,
    period: f64,
    h: f64,
}

impl CellGrid {
    pub const MIN_CELLS: usize = 8;

    pub fn new(n_cells: usize, period: f64) -> Result<Self> {
        if n_cells < Self::MIN_CELLS {
            return Err(LabError::InvalidInput(format!(
                "cell grid needs at least {} cells, got {n_cells}",
                Self::MIN_CELLS
            )));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(LabError::InvalidInput(format!("period must be positive, got {period}")));
        }
        Ok(Self {
            n_cells,
            period,
            h: period / n_cells as f64,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Cell centre `(i + 1/2) h`.
    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h
    }

    /// Right interface of cell `i`, reduced into `[0, period)`.
    pub fn interface(&self, i: usize) -> f64 {
        ((i + 1) % self.n_cells) as f64 * self.h
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.center(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Two ghost cells frozen at the background profile.
    PinnedToWp,
    Periodic,
}

/// `n_periods` copies of a [`CellGrid`] laid end to end.
///
/// The left edge sits at `-(n_periods / 2) * period` (integer division) so the
/// origin is near the middle of the domain and every copy starts on a period
/// boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineGrid {
    cell: CellGrid,
    n_periods: usize,
    boundary: BoundaryMode,
}

impl LineGrid {
    pub fn new(cell: CellGrid, n_periods: usize, boundary: BoundaryMode) -> Result<Self> {
        if n_periods == 0 {
            return Err(LabError::InvalidInput("line grid needs at least one period".into()));
        }
        Ok(Self {
            cell,
            n_periods,
            boundary,
        })
    }

    pub fn cell_grid(&self) -> &CellGrid {
        &self.cell
    }

    pub fn n_periods(&self) -> usize {
        self.n_periods
    }

    pub fn boundary(&self) -> BoundaryMode {
        self.boundary
    }

    pub fn n_cells(&self) -> usize {
        self.cell.n_cells * self.n_periods
    }

    pub fn spacing(&self) -> f64 {
        self.cell.h
    }

    pub fn length(&self) -> f64 {
        self.cell.period * self.n_periods as f64
    }

    pub fn left_edge(&self) -> f64 {
        -((self.n_periods / 2) as f64) * self.cell.period
    }

    /// Global position of cell centre `i`.
    pub fn center(&self, i: usize) -> f64 {
        self.left_edge() + (i as f64 + 0.5) * self.cell.h
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells()).map(|i| self.center(i)).collect()
    }

    /// Index of cell `i` inside its period.
    pub fn tile_index(&self, i: usize) -> usize {
        i % self.cell.n_cells
    }

    /// Position of cell centre `i` reduced into the reference period. Flux
    /// evaluations use this so the tiled profile is reproduced bit for bit.
    pub fn local_center(&self, i: usize) -> f64 {
        self.cell.center(self.tile_index(i))
    }

    /// Right interface of cell `i` reduced into the reference period.
    pub fn local_interface(&self, i: usize) -> f64 {
        self.cell.interface(self.tile_index(i))
    }

    pub fn with_boundary(&self, boundary: BoundaryMode) -> Self {
        Self { boundary, ..*self }
    }
}
