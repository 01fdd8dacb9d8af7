//! Velocity grid and the gridded probability distribution.

use crate::diffusion::moments::MomentRecord;
use crate::error::{CoreError, Result};

/// Default cell count for auto-built grids.
pub const DEFAULT_N_CELLS: usize = 1024;

/// Auto-built grids span this many predicted maximal widths on each side
/// of the initial mean, which keeps the boundary cells empty to well
/// below the containment limit for Gaussian-like distributions.
pub const GRID_WIDTH_MULTIPLE: f64 = 12.0;

/// Tolerance on the total probability mass of a [`DistributionState`].
pub const MASS_TOL: f64 = 1e-12;

/// Uniform cell partition of a velocity interval.
///
/// Probability mass lives on cells; fluxes live on the faces between
/// them. Cell `i` is centered at `v_min + (i + 1/2) dv_cell`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityGrid {
    v_min: f64,
    v_max: f64,
    n_cells: usize,
}

impl VelocityGrid {
    pub fn new(v_min: f64, v_max: f64, n_cells: usize) -> Result<Self> {
        if !(v_min.is_finite() && v_max.is_finite() && v_min < v_max) {
            return Err(CoreError::invalid(
                "grid",
                format!("need finite v_min < v_max, got [{v_min}, {v_max}]"),
            ));
        }
        if n_cells < 16 {
            return Err(CoreError::invalid(
                "n_cells",
                format!("need at least 16 cells, got {n_cells}"),
            ));
        }
        Ok(VelocityGrid {
            v_min,
            v_max,
            n_cells,
        })
    }

    /// Grid of `n_cells` cells spanning `mean +- 12 w_max`.
    ///
    /// `w_max` is the analytically predicted maximal distribution width
    /// over the run (free heating or stationary width, whichever the
    /// scenario reaches).
    pub fn spanning(mean: f64, w_max: f64, n_cells: usize) -> Result<Self> {
        if !(w_max.is_finite() && w_max > 0.0) {
            return Err(CoreError::invalid(
                "w_max",
                format!("must be finite and positive, got {w_max}"),
            ));
        }
        VelocityGrid::new(
            mean - GRID_WIDTH_MULTIPLE * w_max,
            mean + GRID_WIDTH_MULTIPLE * w_max,
            n_cells,
        )
    }

    pub fn v_min(&self) -> f64 {
        self.v_min
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dv_cell(&self) -> f64 {
        (self.v_max - self.v_min) / self.n_cells as f64
    }

    /// Center velocity of cell `i`.
    pub fn center(&self, i: usize) -> f64 {
        self.v_min + (i as f64 + 0.5) * self.dv_cell()
    }

    /// Velocity of interior face `f`, the boundary between cells `f - 1`
    /// and `f`, for `f` in `1..n_cells`.
    pub fn face(&self, f: usize) -> f64 {
        self.v_min + f as f64 * self.dv_cell()
    }
}

/// Probability mass per cell at a given time. Masses are nonnegative and
/// sum to one within [`MASS_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionState {
    p: Vec<f64>,
    time: f64,
}

impl DistributionState {
    /// Wraps raw per-cell masses, validating normalization.
    pub fn from_masses(p: Vec<f64>, time: f64) -> Result<Self> {
        if p.is_empty() {
            return Err(CoreError::invalid("p", "mass vector is empty"));
        }
        if let Some(&bad) = p.iter().find(|&&m| m < 0.0 || !m.is_finite()) {
            return Err(CoreError::invalid(
                "p",
                format!("masses must be finite and nonnegative, found {bad}"),
            ));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(CoreError::invalid(
                "p",
                format!("total mass {total} differs from one by more than {MASS_TOL:.1e}"),
            ));
        }
        Ok(DistributionState { p, time })
    }

    /// Gaussian profile sampled at cell centers and normalized.
    ///
    /// Midpoint sampling reproduces the continuum moments to far better
    /// than the scheme's tolerances once `sigma` covers a few cells.
    pub fn gaussian(grid: &VelocityGrid, mean: f64, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(CoreError::invalid(
                "sigma",
                format!("must be finite and positive, got {sigma}"),
            ));
        }
        if mean <= grid.v_min() || mean >= grid.v_max() {
            return Err(CoreError::invalid(
                "mean",
                format!(
                    "must lie inside the grid [{}, {}], got {mean}",
                    grid.v_min(),
                    grid.v_max()
                ),
            ));
        }
        let mut p: Vec<f64> = (0..grid.n_cells())
            .map(|i| {
                let z = (grid.center(i) - mean) / sigma;
                (-0.5 * z * z).exp()
            })
            .collect();
        let total: f64 = p.iter().sum();
        if total <= 0.0 {
            return Err(CoreError::invalid(
                "sigma",
                "profile underflowed to zero everywhere; grid and sigma are incompatible",
            ));
        }
        for m in &mut p {
            *m /= total;
        }
        Ok(DistributionState { p, time: 0.0 })
    }

    pub fn masses(&self) -> &[f64] {
        &self.p
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn total_mass(&self) -> f64 {
        self.p.iter().sum()
    }

    /// Mass currently sitting in the outermost `edge` cells on each side.
    pub fn boundary_mass(&self, edge: usize) -> f64 {
        let n = self.p.len();
        let edge = edge.min(n / 2);
        let left: f64 = self.p[..edge].iter().sum();
        let right: f64 = self.p[n - edge..].iter().sum();
        left + right
    }

    /// Mean velocity under this distribution.
    pub fn mean(&self, grid: &VelocityGrid) -> f64 {
        self.p
            .iter()
            .enumerate()
            .map(|(i, &m)| m * grid.center(i))
            .sum()
    }

    /// Moment record at the current time (two-pass variance).
    pub fn moments(&self, grid: &VelocityGrid) -> MomentRecord {
        let total = self.total_mass();
        let mean = self.mean(grid);
        let variance: f64 = self
            .p
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                let d = grid.center(i) - mean;
                m * d * d
            })
            .sum();
        MomentRecord {
            time: self.time,
            mean_v: mean,
            variance,
            total_mass: total,
        }
    }

    pub(crate) fn masses_mut(&mut self) -> &mut [f64] {
        &mut self.p
    }

    pub(crate) fn set_time(&mut self, time: f64) {
        self.time = time;
    }
}
