//! End-to-end checks that both solver routes reproduce the moment laws
//! the velocity-tilted diffusion model implies: constant drift of the
//! mean, variance growth at twice the diffusion coefficient, and the
//! friction-balanced stationary state.

use approx::assert_relative_eq;
use veldrift_core::diffusion::fp::FpSolver;
use veldrift_core::diffusion::grid::{DistributionState, VelocityGrid, DEFAULT_N_CELLS};
use veldrift_core::diffusion::moments::{fitted_drift, fitted_heating_rate};
use veldrift_core::diffusion::sde::{evolve_ensemble, EnsembleState};
use veldrift_core::diffusion::{DiffusionModel, FrictionModel};

const DV_RMS: f64 = 1.0;
const TAU: f64 = 1.0;
const C: f64 = 100.0;
const SIGMA0: f64 = 0.5;

fn model() -> DiffusionModel {
    DiffusionModel::new(DV_RMS, TAU, C).unwrap()
}

/// Grid wide enough for a free run of duration `t_end` starting at
/// rest: the width grows diffusively and the mean barely moves.
fn free_grid(t_end: f64) -> VelocityGrid {
    let m = model();
    let d0 = m.diffusion_coefficient(0.0).unwrap();
    let w_max = (SIGMA0 * SIGMA0 + 2.0 * d0 * t_end).sqrt();
    VelocityGrid::spanning(0.0, w_max, DEFAULT_N_CELLS).unwrap()
}

#[test]
fn fp_drift_matches_the_constant_tilt_slope() {
    let m = model();
    let grid = free_grid(10.0);
    let mut solver = FpSolver::new(&grid, &m, None).unwrap();
    let mut state = DistributionState::gaussian(&grid, 0.0, SIGMA0).unwrap();
    let records = solver.evolve(&mut state, 10.0, 1.0).unwrap();
    assert_eq!(records.len(), 11);
    let fitted = fitted_drift(&records).unwrap();
    assert_relative_eq!(fitted, -5.00e-3, max_relative = 0.01);
    assert_relative_eq!(fitted, m.theoretical_drift(), max_relative = 0.01);
}

#[test]
fn fp_heating_matches_twice_the_diffusion_coefficient() {
    let m = model();
    let grid = free_grid(10.0);
    let mut solver = FpSolver::new(&grid, &m, None).unwrap();
    let mut state = DistributionState::gaussian(&grid, 0.0, SIGMA0).unwrap();
    let records = solver.evolve(&mut state, 10.0, 1.0).unwrap();
    let fitted = fitted_heating_rate(&records).unwrap();
    assert_relative_eq!(fitted, m.theoretical_heating_rate(0.0).unwrap(), max_relative = 0.01);
    assert_relative_eq!(fitted, 1.0, max_relative = 0.01);
}

#[test]
fn fp_friction_reaches_the_predicted_stationary_state() {
    let m = model();
    let friction = FrictionModel::fixed(0.1, 0.0).unwrap();
    let w_stationary = m.stationary_variance(&friction, 0.0).unwrap().sqrt();
    let grid = VelocityGrid::spanning(0.0, w_stationary.max(SIGMA0), DEFAULT_N_CELLS).unwrap();
    let mut solver = FpSolver::new(&grid, &m, Some(friction)).unwrap();
    let mut state = DistributionState::gaussian(&grid, 0.0, SIGMA0).unwrap();
    let records = solver.evolve(&mut state, 60.0, 5.0).unwrap();
    let last = records.last().unwrap();
    // Variance saturates at D/gamma evaluated near the settled mean.
    assert_relative_eq!(last.variance, 5.0, max_relative = 0.01);
    // The mean settles at drift/gamma below the friction target.
    let mean_expected = m.theoretical_drift() / 0.1;
    assert_relative_eq!(last.mean_v, mean_expected, max_relative = 0.02);
    assert!((last.total_mass - 1.0).abs() < 1e-12);
}

#[test]
fn fp_friction_transients_follow_the_ou_solution() {
    // Infinite signal speed freezes the diffusion coefficient, making
    // the dynamics an exactly solvable linear relaxation process.
    let m = DiffusionModel::new(1.0, 1.0, f64::INFINITY).unwrap();
    let d = 0.5;
    let gamma = 0.2;
    let v0 = 1.0;
    let mean0 = -1.0;
    let sigma0 = 0.3;
    let friction = FrictionModel::fixed(gamma, v0).unwrap();
    let w_inf_sq = d / gamma;
    let grid = VelocityGrid::spanning(0.0, w_inf_sq.sqrt() + 1.0, DEFAULT_N_CELLS).unwrap();
    let mut solver = FpSolver::new(&grid, &m, Some(friction)).unwrap();
    let mut state = DistributionState::gaussian(&grid, mean0, sigma0).unwrap();
    let records = solver.evolve(&mut state, 10.0, 1.0).unwrap();
    for r in &records {
        let decay = (-gamma * r.time).exp();
        let mean_exact = v0 + (mean0 - v0) * decay;
        let var_exact = w_inf_sq + (sigma0 * sigma0 - w_inf_sq) * decay * decay;
        assert_relative_eq!(r.mean_v, mean_exact, epsilon = 2e-3, max_relative = 2e-3);
        assert_relative_eq!(r.variance, var_exact, max_relative = 2e-3);
    }
}

#[test]
fn self_consistent_mode_keeps_the_drift_and_pins_the_variance() {
    let m = model();
    let friction = FrictionModel::self_consistent(0.1).unwrap();
    let w_stationary = m.stationary_variance(&friction, 0.0).unwrap().sqrt();
    // The mean keeps drifting in this mode; widen the grid for it.
    let drift_span = (m.theoretical_drift() * 60.0).abs();
    let grid =
        VelocityGrid::spanning(0.0, w_stationary.max(SIGMA0) + drift_span, DEFAULT_N_CELLS).unwrap();
    let mut solver = FpSolver::new(&grid, &m, Some(friction)).unwrap();
    let mut state = DistributionState::gaussian(&grid, 0.0, SIGMA0).unwrap();
    let records = solver.evolve(&mut state, 60.0, 1.0).unwrap();

    // Friction centered on the instantaneous mean leaves the tilt's
    // drift untouched.
    let fitted = fitted_drift(&records).unwrap();
    assert_relative_eq!(fitted, -5.00e-3, max_relative = 0.02);

    // The variance saturates instead of growing without bound.
    let last = records.last().unwrap();
    let mid = &records[30];
    let pinned = m.diffusion_coefficient(last.mean_v).unwrap() / 0.1;
    assert_relative_eq!(last.variance, pinned, max_relative = 0.02);
    assert!(
        (last.variance - mid.variance).abs() < 0.02 * pinned,
        "variance kept growing: {} -> {}",
        mid.variance,
        last.variance
    );
}

#[test]
fn fp_and_sde_agree_within_monte_carlo_error() {
    let m = model();
    let n = 100_000usize;
    let grid = free_grid(10.0);
    let mut solver = FpSolver::new(&grid, &m, None).unwrap();
    let mut state = DistributionState::gaussian(&grid, 0.0, SIGMA0).unwrap();
    let fp_records = solver.evolve(&mut state, 10.0, 1.0).unwrap();

    let mut ensemble = EnsembleState::gaussian(n, 0.0, SIGMA0, 42).unwrap();
    let sde_records = evolve_ensemble(&mut ensemble, &m, None, 0.01, 10.0, 1.0).unwrap();

    assert_eq!(fp_records.len(), sde_records.len());
    for (fp, sde) in fp_records.iter().zip(&sde_records).skip(1) {
        let se_mean = fp.variance.sqrt() / (n as f64).sqrt();
        let se_var = fp.variance * (2.0 / (n as f64 - 1.0)).sqrt();
        assert!(
            (fp.mean_v - sde.mean_v).abs() <= 3.0 * se_mean,
            "t={}: means {} vs {} exceed 3 SE = {}",
            fp.time,
            fp.mean_v,
            sde.mean_v,
            3.0 * se_mean
        );
        assert!(
            (fp.variance - sde.variance).abs() <= 3.0 * se_var,
            "t={}: variances {} vs {} exceed 3 SE = {}",
            fp.time,
            fp.variance,
            sde.variance,
            3.0 * se_var
        );
    }
}

#[test]
fn fp_evolution_is_deterministic() {
    let m = model();
    let run = || {
        let grid = free_grid(5.0);
        let mut solver = FpSolver::new(&grid, &m, None).unwrap();
        let mut state = DistributionState::gaussian(&grid, 0.0, SIGMA0).unwrap();
        solver.evolve(&mut state, 5.0, 1.0).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn ensemble_evolution_is_deterministic() {
    let m = model();
    let run = || {
        let mut ensemble = EnsembleState::gaussian(10_000, 0.0, SIGMA0, 42).unwrap();
        evolve_ensemble(&mut ensemble, &m, None, 0.01, 2.0, 0.5).unwrap()
    };
    assert_eq!(run(), run());
}
