//! Conservative finite-difference solver for the velocity
//! Fokker-Planck equation
//!
//! ```text
//! dP/dt = d/dv [ gamma (v - v0) P + D(v) dP/dv ]
//! ```
//!
//! Probability mass moves only through cell faces, so the total is
//! conserved to rounding; the probability current at interior face `f`
//! is discretized centrally with `D` at the face midpoint,
//!
//! ```text
//! J_f = -gamma (v_f - v0) (p_l + p_r) / (2 dv)  -  D(v_f) (p_r - p_l) / dv^2
//! ```
//!
//! and the boundary faces carry zero flux (reflecting walls). Because
//! `D` is linear in `v`, this scheme reproduces the drift of the mean
//! and the variance growth rate exactly in the grid interior; the
//! boundary-containment guard keeps the distribution away from the
//! walls, where that exactness would degrade.

use crate::diffusion::grid::{DistributionState, VelocityGrid, MASS_TOL};
use crate::diffusion::moments::MomentRecord;
use crate::diffusion::{DiffusionModel, FrictionModel, V0Mode};
use crate::error::{CoreError, Result};

/// Fraction of the explicit diffusion stability limit `dv^2 / D` actually
/// used when choosing steps.
pub const STABILITY_SAFETY: f64 = 0.4;

/// With friction, steps are also capped at this fraction of `1/gamma`.
pub const FRICTION_DT_FRACTION: f64 = 0.1;

/// Cells may round slightly below zero; anything below `-NEGATIVE_MASS_FLOOR`
/// aborts the run as an unstable configuration.
pub const NEGATIVE_MASS_FLOOR: f64 = 1e-12;

/// The outermost [`BOUNDARY_CELLS`] cells on each side must jointly hold
/// less than this much probability after every step.
pub const BOUNDARY_MASS_LIMIT: f64 = 1e-8;
pub const BOUNDARY_CELLS: usize = 2;

/// Explicit stepper bound to one grid, one diffusion model, and an
/// optional friction term. Face coefficients are precomputed; the flux
/// buffer is reused across steps.
#[derive(Debug)]
pub struct FpSolver<'a> {
    grid: &'a VelocityGrid,
    model: &'a DiffusionModel,
    friction: Option<FrictionModel>,
    face_v: Vec<f64>,
    face_d: Vec<f64>,
    flux: Vec<f64>,
}

impl<'a> FpSolver<'a> {
    pub fn new(
        grid: &'a VelocityGrid,
        model: &'a DiffusionModel,
        friction: Option<FrictionModel>,
    ) -> Result<Self> {
        if grid.v_max() >= model.c() {
            return Err(CoreError::invalid(
                "grid",
                format!(
                    "grid must satisfy v_max < c so D stays positive; v_max = {}, c = {}",
                    grid.v_max(),
                    model.c()
                ),
            ));
        }
        let n = grid.n_cells();
        let face_v: Vec<f64> = (1..n).map(|f| grid.face(f)).collect();
        let face_d = face_v
            .iter()
            .map(|&v| model.diffusion_coefficient(v))
            .collect::<Result<Vec<f64>>>()?;
        Ok(FpSolver {
            grid,
            model,
            friction,
            face_v,
            face_d,
            flux: vec![0.0; n.saturating_sub(1)],
        })
    }

    pub fn grid(&self) -> &VelocityGrid {
        self.grid
    }

    pub fn model(&self) -> &DiffusionModel {
        self.model
    }

    /// Largest step the explicit scheme accepts: the diffusion bound
    /// `0.4 dv^2 / max D`, intersected with `0.1 / gamma` under friction.
    /// Infinite when neither mechanism is active.
    pub fn stable_dt(&self) -> f64 {
        let d_max = self.face_d.iter().cloned().fold(0.0_f64, f64::max);
        let dv = self.grid.dv_cell();
        let mut dt = if d_max > 0.0 {
            STABILITY_SAFETY * dv * dv / d_max
        } else {
            f64::INFINITY
        };
        if let Some(f) = &self.friction {
            if f.gamma() > 0.0 {
                dt = dt.min(FRICTION_DT_FRACTION / f.gamma());
            }
        }
        dt
    }

    fn resolve_v0(&self, state: &DistributionState) -> Option<(f64, f64)> {
        self.friction.as_ref().map(|f| {
            let v0 = match f.v0_mode() {
                V0Mode::Fixed(v0) => v0,
                V0Mode::SelfConsistent => state.mean(self.grid),
            };
            (f.gamma(), v0)
        })
    }

    /// Advances the distribution by one explicit step.
    pub fn step(&mut self, state: &mut DistributionState, dt: f64) -> Result<()> {
        let n = self.grid.n_cells();
        if state.masses().len() != n {
            return Err(CoreError::invalid(
                "state",
                format!("state has {} cells, grid has {n}", state.masses().len()),
            ));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(CoreError::invalid(
                "dt",
                format!("must be finite and positive, got {dt}"),
            ));
        }
        if dt > self.stable_dt() * (1.0 + 1e-9) {
            return Err(CoreError::invalid(
                "dt",
                format!("{dt:.6e} exceeds the stability bound {:.6e}", self.stable_dt()),
            ));
        }
        let (gamma, v0) = self.resolve_v0(state).unwrap_or((0.0, 0.0));
        let dv = self.grid.dv_cell();

        {
            let p = state.masses();
            for f in 0..n - 1 {
                let advect = -gamma * (self.face_v[f] - v0) * (p[f] + p[f + 1]) / (2.0 * dv);
                let diffuse = -self.face_d[f] * (p[f + 1] - p[f]) / (dv * dv);
                self.flux[f] = advect + diffuse;
            }
        }
        let p = state.masses_mut();
        for (i, cell) in p.iter_mut().enumerate() {
            let j_left = if i == 0 { 0.0 } else { self.flux[i - 1] };
            let j_right = if i == n - 1 { 0.0 } else { self.flux[i] };
            *cell -= dt * (j_right - j_left);
        }

        let (mut min_mass, mut min_cell) = (0.0_f64, 0usize);
        for (i, &m) in p.iter().enumerate() {
            if m < min_mass {
                min_mass = m;
                min_cell = i;
            }
        }
        if min_mass < -NEGATIVE_MASS_FLOOR {
            return Err(CoreError::NegativeMass {
                cell: min_cell,
                min_mass,
                floor: NEGATIVE_MASS_FLOOR,
            });
        }
        if min_mass < 0.0 {
            let mut clipped = 0usize;
            for m in p.iter_mut() {
                if *m < 0.0 {
                    *m = 0.0;
                    clipped += 1;
                }
            }
            let total: f64 = p.iter().sum();
            for m in p.iter_mut() {
                *m /= total;
            }
            log::warn!(
                "clipped {clipped} cell(s) at floor {NEGATIVE_MASS_FLOOR:.1e} (worst {min_mass:.3e} in cell {min_cell}) and renormalized"
            );
        }

        let time = state.time() + dt;
        let total = state.total_mass();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(CoreError::MassNotConserved {
                time,
                total,
                tolerance: MASS_TOL,
            });
        }
        let boundary = state.boundary_mass(BOUNDARY_CELLS);
        if boundary >= BOUNDARY_MASS_LIMIT {
            return Err(CoreError::BoundaryMass {
                time,
                mass: boundary,
                limit: BOUNDARY_MASS_LIMIT,
            });
        }
        state.set_time(time);
        Ok(())
    }

    /// Runs to `t_end` past the state's current time, recording moments
    /// every `record_every` plus one initial record. Record times are
    /// assigned exactly (`start + k * record_every`), and the step is
    /// chosen so records land on step boundaries.
    pub fn evolve(
        &mut self,
        state: &mut DistributionState,
        t_end: f64,
        record_every: f64,
    ) -> Result<Vec<MomentRecord>> {
        if !(t_end.is_finite() && t_end >= 0.0) {
            return Err(CoreError::invalid(
                "t_end",
                format!("must be finite and nonnegative, got {t_end}"),
            ));
        }
        if !(record_every.is_finite() && record_every > 0.0) {
            return Err(CoreError::invalid(
                "record_every",
                format!("must be finite and positive, got {record_every}"),
            ));
        }
        if let Some(f) = self.friction {
            f.check_width_against_c(self.model, state.mean(self.grid))?;
        }
        let mut records = vec![state.moments(self.grid)];
        if t_end == 0.0 {
            return Ok(records);
        }
        let start = state.time();
        // Tolerate t_end = k * record_every sitting a few ulps below k.
        let n_full = ((t_end / record_every) * (1.0 + 1e-12)).floor() as u64;
        for seg in 1..=n_full {
            self.advance_by(state, record_every)?;
            state.set_time(start + seg as f64 * record_every);
            records.push(state.moments(self.grid));
        }
        let remainder = t_end - n_full as f64 * record_every;
        if remainder > 1e-12 * record_every {
            self.advance_by(state, remainder)?;
            state.set_time(start + t_end);
            records.push(state.moments(self.grid));
        }
        Ok(records)
    }

    fn advance_by(&mut self, state: &mut DistributionState, duration: f64) -> Result<()> {
        let bound = self.stable_dt();
        let n_steps = if bound.is_finite() {
            (duration / bound).ceil().max(1.0) as u64
        } else {
            1
        };
        let dt = duration / n_steps as f64;
        for _ in 0..n_steps {
            self.step(state, dt)?;
        }
        Ok(())
    }
}
