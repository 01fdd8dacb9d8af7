//! Monte Carlo ensemble route: each sample integrates the Ito equation
//!
//! ```text
//! dv = [ D'(v) - gamma (v - v0) ] dt + sqrt(2 D(v) dt) N(0, 1)
//! ```
//!
//! whose drift term `D'(v) = -dv_rms^2 / (2 tau c)` is the constant
//! slope of the diffusion coefficient; with it, the ensemble obeys the
//! same Fokker-Planck equation the grid solver integrates, so the two
//! routes can be compared moment by moment.
//!
//! Every sample owns a counter-mode RNG substream keyed by (master
//! seed, sample index). Draws never depend on how samples are split
//! across threads, so the `parallel` feature changes throughput only:
//! results are bit-identical to the sequential path.

use crate::diffusion::fp::FRICTION_DT_FRACTION;
use crate::diffusion::moments::MomentRecord;
use crate::diffusion::{DiffusionModel, FrictionModel, V0Mode};
use crate::error::{CoreError, Result};
use crate::rng::substream;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Samples must stay below `(1 - VALIDITY_MARGIN) * c` in magnitude;
/// the first excursion past that ceiling aborts the run, since the
/// linearized diffusion coefficient is meaningless near `c`.
pub const VALIDITY_MARGIN: f64 = 0.01;

/// Largest admissible sample speed for signal speed `c`.
pub fn sample_ceiling(c: f64) -> f64 {
    (1.0 - VALIDITY_MARGIN) * c
}

/// Step used when the caller does not pick one: a hundredth of the
/// correlation time, further capped at `0.1 / gamma` under friction.
pub fn default_sde_dt(model: &DiffusionModel, friction: Option<&FrictionModel>) -> f64 {
    let mut dt = model.tau() / 100.0;
    if let Some(f) = friction {
        if f.gamma() > 0.0 {
            dt = dt.min(FRICTION_DT_FRACTION / f.gamma());
        }
    }
    dt
}

#[derive(Clone, Copy)]
struct StepCoeffs {
    d0: f64,
    inv_c: f64,
    drift0: f64,
    gamma: f64,
    v0: f64,
    dt: f64,
}

/// One Euler-Maruyama update of a single sample.
#[inline]
fn advance_one(v: f64, rng: &mut ChaCha8Rng, k: &StepCoeffs) -> f64 {
    let d = k.d0 * (1.0 - v * k.inv_c);
    let drift = k.drift0 - k.gamma * (v - k.v0);
    let noise: f64 = rng.sample(StandardNormal);
    v + drift * k.dt + (2.0 * d * k.dt).sqrt() * noise
}

fn raw_mean(velocities: &[f64]) -> f64 {
    velocities.iter().sum::<f64>() / velocities.len() as f64
}

/// A velocity ensemble with one RNG substream per sample.
#[derive(Debug, Clone)]
pub struct EnsembleState {
    velocities: Vec<f64>,
    rngs: Vec<ChaCha8Rng>,
    time: f64,
    seed: u64,
}

impl EnsembleState {
    /// Draws `n` samples from N(mean, sigma^2), sample `i` from
    /// substream `i` of `seed`.
    pub fn gaussian(n: usize, mean: f64, sigma: f64, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(CoreError::invalid(
                "n",
                format!("need at least 2 samples for moments, got {n}"),
            ));
        }
        if !mean.is_finite() {
            return Err(CoreError::invalid("mean", format!("must be finite, got {mean}")));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(CoreError::invalid(
                "sigma",
                format!("must be finite and nonnegative, got {sigma}"),
            ));
        }
        let mut velocities = Vec::with_capacity(n);
        let mut rngs = Vec::with_capacity(n);
        for i in 0..n {
            let mut rng = substream(seed, i as u64);
            let noise: f64 = rng.sample(StandardNormal);
            velocities.push(mean + sigma * noise);
            rngs.push(rng);
        }
        Ok(EnsembleState {
            velocities,
            rngs,
            time: 0.0,
            seed,
        })
    }

    pub fn velocities(&self) -> &[f64] {
        &self.velocities
    }

    pub fn n_samples(&self) -> usize {
        self.velocities.len()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Sample mean, unbiased sample variance, and unit mass, stamped
    /// with the ensemble clock. Sums run in sample order regardless of
    /// thread count, so the moments are reproducible bit for bit.
    pub fn moments(&self) -> MomentRecord {
        let n = self.velocities.len() as f64;
        let mean = raw_mean(&self.velocities);
        let ss: f64 = self.velocities.iter().map(|&v| (v - mean) * (v - mean)).sum();
        MomentRecord {
            time: self.time,
            mean_v: mean,
            variance: ss / (n - 1.0),
            total_mass: 1.0,
        }
    }

    fn step_coeffs(&self, model: &DiffusionModel, friction: Option<&FrictionModel>, dt: f64) -> StepCoeffs {
        let d0 = model.dv_rms() * model.dv_rms() / (2.0 * model.tau());
        let inv_c = 1.0 / model.c();
        let (gamma, v0) = match friction {
            None => (0.0, 0.0),
            Some(f) => {
                let v0 = match f.v0_mode() {
                    V0Mode::Fixed(v0) => v0,
                    V0Mode::SelfConsistent => raw_mean(&self.velocities),
                };
                (f.gamma(), v0)
            }
        };
        StepCoeffs {
            d0,
            inv_c,
            drift0: -d0 * inv_c,
            gamma,
            v0,
            dt,
        }
    }

    fn check_step_args(&self, dt: f64) -> Result<()> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(CoreError::invalid(
                "dt",
                format!("must be finite and positive, got {dt}"),
            ));
        }
        Ok(())
    }

    fn check_ceiling(&self, c: f64) -> Result<()> {
        let ceiling = sample_ceiling(c);
        for &v in &self.velocities {
            if v.is_nan() || v.abs() >= ceiling {
                return Err(CoreError::SampleOutOfRange {
                    time: self.time,
                    velocity: v,
                    ceiling,
                });
            }
        }
        Ok(())
    }

    /// Advances every sample by one step, splitting the ensemble across
    /// the rayon pool. Bit-identical to [`Self::sde_step_sequential`].
    #[cfg(feature = "parallel")]
    pub fn sde_step(
        &mut self,
        model: &DiffusionModel,
        friction: Option<&FrictionModel>,
        dt: f64,
    ) -> Result<()> {
        self.check_step_args(dt)?;
        let k = self.step_coeffs(model, friction, dt);
        self.velocities
            .par_iter_mut()
            .zip(self.rngs.par_iter_mut())
            .for_each(|(v, rng)| *v = advance_one(*v, rng, &k));
        self.finish_step(model, dt)
    }

    /// Advances every sample by one step on the calling thread.
    #[cfg(not(feature = "parallel"))]
    pub fn sde_step(
        &mut self,
        model: &DiffusionModel,
        friction: Option<&FrictionModel>,
        dt: f64,
    ) -> Result<()> {
        self.sde_step_sequential(model, friction, dt)
    }

    /// Single-threaded stepper, always compiled; the benchmark suite
    /// uses it as the baseline the parallel path is measured against.
    pub fn sde_step_sequential(
        &mut self,
        model: &DiffusionModel,
        friction: Option<&FrictionModel>,
        dt: f64,
    ) -> Result<()> {
        self.check_step_args(dt)?;
        let k = self.step_coeffs(model, friction, dt);
        for (v, rng) in self.velocities.iter_mut().zip(self.rngs.iter_mut()) {
            *v = advance_one(*v, rng, &k);
        }
        self.finish_step(model, dt)
    }

    fn finish_step(&mut self, model: &DiffusionModel, dt: f64) -> Result<()> {
        self.time += dt;
        self.check_ceiling(model.c())
    }

    pub(crate) fn set_time(&mut self, time: f64) {
        self.time = time;
    }
}

/// Runs the ensemble to `t_end` past its current time, recording
/// moments every `record_every` plus one initial record. Record times
/// are assigned exactly, and the requested `dt` is shrunk per segment
/// so records land on step boundaries.
pub fn evolve_ensemble(
    ensemble: &mut EnsembleState,
    model: &DiffusionModel,
    friction: Option<&FrictionModel>,
    dt: f64,
    t_end: f64,
    record_every: f64,
) -> Result<Vec<MomentRecord>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(CoreError::invalid(
            "dt",
            format!("must be finite and positive, got {dt}"),
        ));
    }
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
    if let Some(f) = friction {
        f.check_width_against_c(model, raw_mean(ensemble.velocities()))?;
    }
    ensemble.check_ceiling(model.c())?;
    let mut records = vec![ensemble.moments()];
    if t_end == 0.0 {
        return Ok(records);
    }
    let start = ensemble.time();
    let n_full = ((t_end / record_every) * (1.0 + 1e-12)).floor() as u64;
    let advance = |ens: &mut EnsembleState, duration: f64| -> Result<()> {
        let n_steps = (duration / dt).ceil().max(1.0) as u64;
        let sub_dt = duration / n_steps as f64;
        for _ in 0..n_steps {
            ens.sde_step(model, friction, sub_dt)?;
        }
        Ok(())
    };
    for seg in 1..=n_full {
        advance(ensemble, record_every)?;
        ensemble.set_time(start + seg as f64 * record_every);
        records.push(ensemble.moments());
    }
    let remainder = t_end - n_full as f64 * record_every;
    if remainder > 1e-12 * record_every {
        advance(ensemble, remainder)?;
        ensemble.set_time(start + t_end);
        records.push(ensemble.moments());
    }
    Ok(records)
}
