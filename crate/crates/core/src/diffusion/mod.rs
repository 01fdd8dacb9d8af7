//! Velocity diffusion with a Doppler-tilted coefficient, solved two ways.
//!
//! The model: a body is remeasured once per interval `tau` to velocity
//! resolution `dv_rms`, and the measurement rate is Doppler-modulated by
//! the factor `(1 - v/c)`. The resulting diffusion coefficient
//!
//! ```text
//! D(v) = (dv_rms^2 / 2 tau) (1 - v/c)
//! ```
//!
//! is linear in `v`, so its derivative `D' = -dv_rms^2 / (2 tau c)` is a
//! constant drift of the mean: the emergent attraction. An optional
//! friction term `gamma (v - v0)` bounds the heating at the stationary
//! width `w0^2 = <D>/gamma`.
//!
//! [`fp`] advances the probability density on a velocity grid in
//! conservative flux form; [`sde`] advances a Monte Carlo ensemble of
//! sample velocities with the Ito increment matching the same generator.
//! Either route records the moment series the experiments consume.

pub mod fp;
pub mod grid;
pub mod moments;
pub mod sde;

pub use fp::FpSolver;
pub use grid::{DistributionState, VelocityGrid};
pub use moments::MomentRecord;
pub use sde::EnsembleState;

use crate::error::{CoreError, Result};

/// Default upper bound on `dv_rms / c`; the linearized Doppler treatment
/// assumes the resolution is small against the signal speed.
pub const DEFAULT_RESOLUTION_RATIO_LIMIT: f64 = 0.1;

/// Upper bound on `w0 / c` accepted when friction is active: the
/// stationary width must stay small against the signal speed for the
/// linear model to remain valid.
pub const STATIONARY_WIDTH_RATIO_LIMIT: f64 = 0.1;

/// Parameters of the Doppler-modulated diffusion coefficient.
///
/// `c` may be `f64::INFINITY`, which switches the Doppler tilt off and
/// reduces the model to constant-coefficient diffusion; the heat-equation
/// oracles in the test suite use that limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionModel {
    dv_rms: f64,
    tau: f64,
    c: f64,
}

impl DiffusionModel {
    /// Builds a model, enforcing `dv_rms/c < 0.1`.
    ///
    /// `dv_rms = 0` is accepted and means "no measurement": zero
    /// diffusion and zero drift.
    pub fn new(dv_rms: f64, tau: f64, c: f64) -> Result<Self> {
        Self::with_ratio_limit(dv_rms, tau, c, DEFAULT_RESOLUTION_RATIO_LIMIT)
    }

    /// [`DiffusionModel::new`] with an explicit bound on `dv_rms/c`.
    pub fn with_ratio_limit(dv_rms: f64, tau: f64, c: f64, ratio_limit: f64) -> Result<Self> {
        if !(dv_rms.is_finite() && dv_rms >= 0.0) {
            return Err(CoreError::invalid(
                "dv_rms",
                format!("must be finite and nonnegative, got {dv_rms}"),
            ));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(CoreError::invalid(
                "tau",
                format!("must be finite and positive, got {tau}"),
            ));
        }
        if c.is_nan() || c <= 0.0 {
            return Err(CoreError::invalid(
                "c",
                format!("must be positive (finite or infinite), got {c}"),
            ));
        }
        if dv_rms / c >= ratio_limit {
            return Err(CoreError::invalid(
                "dv_rms",
                format!("resolution/signal-speed ratio {} must stay below {ratio_limit}", dv_rms / c),
            ));
        }
        Ok(DiffusionModel { dv_rms, tau, c })
    }

    pub fn dv_rms(&self) -> f64 {
        self.dv_rms
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `D(v) = (dv_rms^2 / 2 tau)(1 - v/c)`, defined for `v < c`.
    pub fn diffusion_coefficient(&self, v: f64) -> Result<f64> {
        if !v.is_finite() || v >= self.c {
            return Err(CoreError::invalid(
                "v",
                format!("diffusion coefficient requires finite v < c, got v = {v}, c = {}", self.c),
            ));
        }
        Ok(0.5 * self.dv_rms * self.dv_rms / self.tau * (1.0 - v / self.c))
    }

    /// Drift of the mean velocity, `-dv_rms^2 / (2 c tau)`.
    ///
    /// Equals `dD/dv` exactly (the coefficient is linear in `v`), which
    /// is also the Ito drift each ensemble sample carries.
    pub fn theoretical_drift(&self) -> f64 {
        -self.dv_rms * self.dv_rms / (2.0 * self.c * self.tau)
    }

    /// Variance growth rate `d var/dt = 2 D(mean_v)`, leading order in `v/c`.
    pub fn theoretical_heating_rate(&self, mean_v: f64) -> Result<f64> {
        Ok(2.0 * self.diffusion_coefficient(mean_v)?)
    }

    /// Stationary variance `w0^2 = D(mean_v) / gamma` under friction.
    pub fn stationary_variance(&self, friction: &FrictionModel, mean_v: f64) -> Result<f64> {
        if friction.gamma() == 0.0 {
            return Err(CoreError::invalid(
                "gamma",
                "free diffusion never saturates; stationary variance requires gamma > 0",
            ));
        }
        Ok(self.diffusion_coefficient(mean_v)? / friction.gamma())
    }
}

/// Doppler-modulated event rate `(1/tau_emit)(1 - v/c)`.
///
/// Sign convention: positive `v` is motion away from the receiver, which
/// slows the received rate.
pub fn doppler_rate(tau_emit: f64, v: f64, c: f64) -> Result<f64> {
    if !(tau_emit.is_finite() && tau_emit > 0.0) {
        return Err(CoreError::invalid(
            "tau_emit",
            format!("must be finite and positive, got {tau_emit}"),
        ));
    }
    if c.is_nan() || c <= 0.0 {
        return Err(CoreError::invalid(
            "c",
            format!("must be positive, got {c}"),
        ));
    }
    if v.is_nan() || v.abs() >= c {
        return Err(CoreError::invalid(
            "v",
            format!("Doppler factor requires |v| < c, got v = {v}, c = {c}"),
        ));
    }
    Ok((1.0 - v / c) / tau_emit)
}

/// Combined drift of the relative velocity when both bodies measure each
/// other: the magnitudes add, and the sign stays attractive.
pub fn mutual_drift(m_a: &DiffusionModel, m_b: &DiffusionModel) -> Result<f64> {
    if m_a.c() != m_b.c() {
        return Err(CoreError::MismatchedSignalSpeed {
            c_a: m_a.c(),
            c_b: m_b.c(),
        });
    }
    Ok(m_a.theoretical_drift() + m_b.theoretical_drift())
}

/// How the friction recentering velocity `v0` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum V0Mode {
    /// `v0` held at the given value for the whole run.
    Fixed(f64),
    /// `v0` tracks the current mean velocity each step, which cancels
    /// the friction force on the mean while still capping the variance.
    SelfConsistent,
}

/// Linear friction `gamma (v - v0)` added to the diffusion dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrictionModel {
    gamma: f64,
    v0_mode: V0Mode,
}

impl FrictionModel {
    pub fn new(gamma: f64, v0_mode: V0Mode) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(CoreError::invalid(
                "gamma",
                format!("must be finite and nonnegative, got {gamma}"),
            ));
        }
        if let V0Mode::Fixed(v0) = v0_mode {
            if !v0.is_finite() {
                return Err(CoreError::invalid(
                    "v0",
                    format!("must be finite, got {v0}"),
                ));
            }
        }
        Ok(FrictionModel { gamma, v0_mode })
    }

    pub fn fixed(gamma: f64, v0: f64) -> Result<Self> {
        Self::new(gamma, V0Mode::Fixed(v0))
    }

    pub fn self_consistent(gamma: f64) -> Result<Self> {
        Self::new(gamma, V0Mode::SelfConsistent)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn v0_mode(&self) -> V0Mode {
        self.v0_mode
    }

    /// Checks that the stationary width this friction implies stays small
    /// against the signal speed (`w0/c < 0.1`), evaluated at the given
    /// reference mean velocity. Trivially satisfied for infinite `c` or
    /// `gamma = 0`.
    pub fn check_width_against_c(
        &self,
        model: &DiffusionModel,
        reference_mean: f64,
    ) -> Result<()> {
        if self.gamma == 0.0 || !model.c().is_finite() {
            return Ok(());
        }
        let w0 = model.stationary_variance(self, reference_mean)?.sqrt();
        if w0 >= STATIONARY_WIDTH_RATIO_LIMIT * model.c() {
            return Err(CoreError::invalid(
                "gamma",
                format!(
                    "stationary width {w0:.3e} is not small against c = {:.3e}; need w0/c < {STATIONARY_WIDTH_RATIO_LIMIT}",
                    model.c()
                ),
            ));
        }
        Ok(())
    }
}
