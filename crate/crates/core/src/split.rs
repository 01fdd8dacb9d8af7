//! Consistency bookkeeping for a body split into two mutually
//! measuring halves.
//!
//! An unsplit body of mass `M` picks up velocity-fluctuation variance
//! `alpha^2 M^2` per fluctuation time. Cut it into halves and the
//! halves fluctuate on half the time scale with per-step deviation
//! `alpha M / 2`. Treating the halves as independently tracked bodies
//! and averaging their velocities undercounts the center-of-mass
//! variance by a factor of 8. The resolution is that each half also
//! measures the other: every recorded update applies both direct
//! increments to both halves plus a momentum-conserving mutual pair,
//! and with that bookkeeping the center-of-mass variance lands back on
//! the unsplit prediction. [`com_variance_experiment`] plays the whole
//! story out by Monte Carlo and reports both accountings.

use crate::constants::PhysicalConstants;
use crate::error::{CoreError, Result};
use crate::rng::substream;
use rand::Rng;
use rand_distr::StandardNormal;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Parameters of one split-body run. `alpha` converts mass to a
/// per-step velocity deviation; it can be derived from a physical
/// separation or set directly for dimensionless studies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitScenario {
    total_mass: f64,
    separation: Option<f64>,
    alpha: f64,
    n_intervals: u64,
    samples: u64,
    seed: u64,
}

impl SplitScenario {
    /// Derives `alpha = l0^2 c^2 / (hbar r)` from a physical separation.
    pub fn from_separation(
        total_mass: f64,
        separation: f64,
        k: &PhysicalConstants,
        n_intervals: u64,
        samples: u64,
        seed: u64,
    ) -> Result<Self> {
        if !(separation.is_finite() && separation > 0.0) {
            return Err(CoreError::invalid(
                "separation",
                format!("must be finite and positive, got {separation}"),
            ));
        }
        let l0 = k.planck_length();
        let alpha = l0 * l0 * k.c * k.c / (k.hbar * separation);
        let mut scenario = Self::with_alpha(total_mass, alpha, n_intervals, samples, seed)?;
        scenario.separation = Some(separation);
        Ok(scenario)
    }

    /// Uses `alpha` directly; `alpha = 0` degenerates to a frozen body.
    pub fn with_alpha(
        total_mass: f64,
        alpha: f64,
        n_intervals: u64,
        samples: u64,
        seed: u64,
    ) -> Result<Self> {
        if !(total_mass.is_finite() && total_mass > 0.0) {
            return Err(CoreError::invalid(
                "total_mass",
                format!("must be finite and positive, got {total_mass}"),
            ));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(CoreError::invalid(
                "alpha",
                format!("must be finite and nonnegative, got {alpha}"),
            ));
        }
        if n_intervals == 0 {
            return Err(CoreError::invalid("n_intervals", "must be at least 1"));
        }
        if samples < 2 {
            return Err(CoreError::invalid(
                "samples",
                format!("need at least 2 samples for a variance, got {samples}"),
            ));
        }
        Ok(SplitScenario {
            total_mass,
            separation: None,
            alpha,
            n_intervals,
            samples,
            seed,
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn separation(&self) -> Option<f64> {
        self.separation
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n_intervals(&self) -> u64 {
        self.n_intervals
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Unsplit center-of-mass variance per full interval,
    /// `alpha^2 M^2`.
    pub fn predicted_variance(&self) -> f64 {
        let step = self.alpha * self.total_mass;
        step * step
    }
}

/// One recorded update of the two halves. `dv_a1`/`dv_a2` are the
/// direct fluctuation increments; `delta2_v_a1` is half 1's motion as
/// measured by half 2 and `delta1_v_a2` the reverse. Momentum
/// conservation in the mutual measurement forces the latter pair to
/// cancel exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateRecord {
    pub dv_a1: f64,
    pub dv_a2: f64,
    pub delta2_v_a1: f64,
    pub delta1_v_a2: f64,
}

impl UpdateRecord {
    /// Builds a record whose mutual pair is `(delta, -delta)`, which
    /// satisfies the cancellation constraint by construction.
    pub fn new(dv_a1: f64, dv_a2: f64, delta: f64) -> Self {
        UpdateRecord {
            dv_a1,
            dv_a2,
            delta2_v_a1: delta,
            delta1_v_a2: -delta,
        }
    }
}

/// Applies one update to the halves' velocities:
///
/// ```text
/// v1' = v1 + dv_a1 + dv_a2 + delta2_v_a1
/// v2' = v2 + dv_a2 + dv_a1 + delta1_v_a2
/// ```
///
/// Both direct increments enter both velocities, so the implied
/// center-of-mass increment is `dv_a1 + dv_a2`, independent of the
/// mutual pair.
pub fn apply_updates(v_a1: f64, v_a2: f64, u: &UpdateRecord) -> Result<(f64, f64)> {
    for (name, value) in [
        ("dv_a1", u.dv_a1),
        ("dv_a2", u.dv_a2),
        ("delta2_v_a1", u.delta2_v_a1),
        ("delta1_v_a2", u.delta1_v_a2),
    ] {
        if !value.is_finite() {
            return Err(CoreError::invalid(name, format!("must be finite, got {value}")));
        }
    }
    let sum = u.delta2_v_a1 + u.delta1_v_a2;
    if sum != 0.0 {
        return Err(CoreError::MutualIncrementsUnbalanced { sum });
    }
    Ok((
        v_a1 + u.dv_a1 + u.dv_a2 + u.delta2_v_a1,
        v_a2 + u.dv_a2 + u.dv_a1 + u.delta1_v_a2,
    ))
}

/// Result of [`com_variance_experiment`]. `measured` is the
/// per-interval center-of-mass variance under the full mutual-update
/// bookkeeping, `naive_variance` the same quantity when each half is
/// credited only with its own direct increment once per interval and
/// the two are averaged; the latter sits a factor of 8 below
/// `predicted`. `z_score` is `(measured - predicted)` in units of the
/// Monte Carlo standard error of a Gaussian variance estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitOutcome {
    pub predicted: f64,
    pub measured: f64,
    pub naive_variance: f64,
    pub n_samples: u64,
    pub z_score: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct SamplePartial {
    sum: f64,
    sum_sq: f64,
    naive_sum: f64,
    naive_sum_sq: f64,
}

/// One sample path: `n_intervals` full intervals, each made of two
/// half-interval updates. Draw order per half-interval is fixed
/// (direct 1, direct 2, mutual), so results are reproducible bit for
/// bit for a given seed regardless of `delta_std` or thread count.
fn sample_partial(s: &SplitScenario, delta_std: f64, sample: u64) -> SamplePartial {
    let mut rng = substream(s.seed, sample);
    let half_std = s.alpha * s.total_mass / 2.0;
    let mut v1 = 0.0_f64;
    let mut v2 = 0.0_f64;
    let mut partial = SamplePartial::default();
    for _ in 0..s.n_intervals {
        let com_before = 0.5 * (v1 + v2);
        let mut naive_increment = 0.0;
        for half in 0..2 {
            let d1 = half_std * rng.sample::<f64, _>(StandardNormal);
            let d2 = half_std * rng.sample::<f64, _>(StandardNormal);
            let delta = delta_std * rng.sample::<f64, _>(StandardNormal);
            let u = UpdateRecord::new(d1, d2, delta);
            let next = apply_updates(v1, v2, &u).expect("record satisfies its constraint");
            v1 = next.0;
            v2 = next.1;
            if half == 0 {
                naive_increment = 0.5 * (d1 + d2);
            }
        }
        let increment = 0.5 * (v1 + v2) - com_before;
        partial.sum += increment;
        partial.sum_sq += increment * increment;
        partial.naive_sum += naive_increment;
        partial.naive_sum_sq += naive_increment * naive_increment;
    }
    partial
}

fn reduce(s: &SplitScenario, partials: &[SamplePartial]) -> SplitOutcome {
    let mut total = SamplePartial::default();
    for p in partials {
        total.sum += p.sum;
        total.sum_sq += p.sum_sq;
        total.naive_sum += p.naive_sum;
        total.naive_sum_sq += p.naive_sum_sq;
    }
    let n = (s.samples * s.n_intervals) as f64;
    let variance = |sum: f64, sum_sq: f64| {
        let mean = sum / n;
        (sum_sq - n * mean * mean) / (n - 1.0)
    };
    let measured = variance(total.sum, total.sum_sq);
    let naive_variance = variance(total.naive_sum, total.naive_sum_sq);
    let predicted = s.predicted_variance();
    let se = predicted * (2.0 / (n - 1.0)).sqrt();
    let z_score = if se > 0.0 {
        (measured - predicted) / se
    } else if measured == predicted {
        0.0
    } else {
        f64::NAN
    };
    SplitOutcome {
        predicted,
        measured,
        naive_variance,
        n_samples: s.samples,
        z_score,
    }
}

fn check_delta_std(delta_std: f64) -> Result<()> {
    if !(delta_std.is_finite() && delta_std >= 0.0) {
        return Err(CoreError::invalid(
            "delta_std",
            format!("must be finite and nonnegative, got {delta_std}"),
        ));
    }
    Ok(())
}

/// Runs the scenario's sample paths (across the rayon pool when the
/// `parallel` feature is on) and compares the measured center-of-mass
/// variance against the unsplit prediction. `delta_std` scales the
/// mutual increments; any value leaves the outcome unchanged up to
/// rounding, which is itself one of the claims under test.
pub fn com_variance_experiment(s: &SplitScenario, delta_std: f64) -> Result<SplitOutcome> {
    check_delta_std(delta_std)?;
    #[cfg(feature = "parallel")]
    let partials: Vec<SamplePartial> = (0..s.samples)
        .into_par_iter()
        .map(|i| sample_partial(s, delta_std, i))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<SamplePartial> = (0..s.samples).map(|i| sample_partial(s, delta_std, i)).collect();
    Ok(reduce(s, &partials))
}

/// Single-threaded twin of [`com_variance_experiment`]; the benchmark
/// suite uses it as the baseline.
pub fn com_variance_experiment_sequential(s: &SplitScenario, delta_std: f64) -> Result<SplitOutcome> {
    check_delta_std(delta_std)?;
    let partials: Vec<SamplePartial> = (0..s.samples).map(|i| sample_partial(s, delta_std, i)).collect();
    Ok(reduce(s, &partials))
}

/// Default mutual-increment scale: the same per-half deviation as the
/// direct increments.
pub fn default_delta_std(s: &SplitScenario) -> f64 {
    s.alpha * s.total_mass / 2.0
}
