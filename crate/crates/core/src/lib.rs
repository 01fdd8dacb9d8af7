//! Velocity diffusion driven by repeated position measurement, and the
//! estimators built on top of it.
//!
//! A body whose position keeps being resolved to within a velocity
//! resolution `dv_rms` receives a random velocity kick of that size once
//! per interval `tau`. When the measurement rate is Doppler-modulated by
//! the body's velocity relative to the observer, the diffusion
//! coefficient picks up a linear tilt
//!
//! ```text
//! D(v) = (dv_rms^2 / 2 tau) * (1 - v / c)
//! ```
//!
//! and the tilt produces a deterministic mean drift toward the observer,
//! `-dv_rms^2 / (2 c tau)`, on top of the heating `d var/dt = 2 <D>`.
//! [`diffusion`] integrates the associated Fokker-Planck equation on a
//! velocity grid and, independently, as a stochastic ensemble; the two
//! routes are cross-checked in the test suite.
//!
//! [`measurement`] holds a four-state density-matrix pipeline modelling
//! one such measurement event (entangle, decohere, collapse).
//! [`gravity`] chains the drift formula with Planck-scale parameter
//! choices to produce accelerations of the form `-G M / (2 r^2)` plus the
//! plausibility estimators around that identification. [`split`] checks
//! that the velocity-variance bookkeeping survives splitting one body
//! into two mutually-measured halves.
//!
//! The ensemble kernels are data-parallel via rayon when the `parallel`
//! feature (default) is enabled; disabling it falls back to sequential
//! loops with bit-identical results, because every sample draws from its
//! own counter-derived random substream.

pub mod constants;
pub mod diffusion;
pub mod error;
pub mod gravity;
pub mod measurement;
pub mod rng;
pub mod split;

pub use error::CoreError;
