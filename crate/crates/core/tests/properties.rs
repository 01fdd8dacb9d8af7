//! Property-based checks of the algebraic invariants each module
//! promises: trace and mass conservation, exact cancellations, and the
//! closed-form identities tying the constants together.

use nalgebra::Matrix4;
use num_complex::Complex64;
use proptest::prelude::*;
use veldrift_core::constants::PhysicalConstants;
use veldrift_core::diffusion::fp::FpSolver;
use veldrift_core::diffusion::grid::{DistributionState, VelocityGrid};
use veldrift_core::diffusion::{DiffusionModel, FrictionModel};
use veldrift_core::gravity::{measured_acceleration, split_accelerations, BodyPair, MacroObject};
use veldrift_core::measurement::{
    collapse_sample, decohere, entangle, initial_state, Branch, MeasurementState, Stage,
};
use veldrift_core::rng::substream;
use veldrift_core::split::{apply_updates, UpdateRecord};

proptest! {
    #[test]
    fn pipeline_conserves_trace_and_populations(w1 in 1e-3..0.999f64) {
        let w2 = 1.0 - w1;
        let s0 = initial_state(w1, w2).unwrap();
        let s1 = entangle(&s0).unwrap();
        let s2 = decohere(&s1).unwrap();

        prop_assert!((s2.rho().trace().re - 1.0).abs() < 1e-12);
        prop_assert!((s2.population(Branch::F1S1) - w1).abs() < 1e-12);
        prop_assert!((s2.population(Branch::F2S2) - w2).abs() < 1e-12);
        let purity_expected = w1 * w1 + w2 * w2;
        prop_assert!((s2.purity() - purity_expected).abs() < 1e-11);

        let mut rng = substream(1, 0);
        let (_, branch) = collapse_sample(&s2, &mut rng).unwrap();
        prop_assert!(matches!(branch, Branch::F1S1 | Branch::F2S2));
    }

    #[test]
    fn decohere_is_idempotent_on_arbitrary_states(entries in proptest::collection::vec(-1.0..1.0f64, 32)) {
        // rho = (A^H A + eps I) / trace is Hermitian, positive, unit
        // trace for any A; eps keeps the all-zero draw invertible.
        let a = Matrix4::from_fn(|i, j| Complex64::new(entries[8 * i + 2 * j], entries[8 * i + 2 * j + 1]));
        let mut rho = a.adjoint() * a + Matrix4::identity().map(|x: Complex64| x * 1e-3);
        let trace = rho.trace().re;
        rho /= Complex64::new(trace, 0.0);
        let state = MeasurementState::new(rho, Stage::Entangled).unwrap();

        let once = decohere(&state).unwrap();
        let twice = decohere(&once).unwrap();
        prop_assert_eq!(once.rho(), twice.rho());
        // Populations never change, only coherences are removed.
        for b in Branch::ALL {
            prop_assert!((once.population(b) - state.population(b)).abs() < 1e-15);
        }
    }

    #[test]
    fn fp_step_never_loses_mass(
        dv_rms in 0.0..0.5f64,
        tau in 0.1..2.0f64,
        gamma in 0.0..0.5f64,
        v0 in -1.0..1.0f64,
        mean in -1.0..1.0f64,
        sigma in 0.1..1.0f64,
        n_exp in 4u32..10,
    ) {
        // The flux form moves mass only between neighbors, so a step
        // either succeeds with the total intact or is rejected by the
        // negativity/boundary guards (under-resolved or unstable
        // configurations); it must never drift the total silently.
        let model = DiffusionModel::new(dv_rms, tau, 100.0).unwrap();
        let friction = if gamma > 0.0 {
            Some(FrictionModel::fixed(gamma, v0).unwrap())
        } else {
            None
        };
        let grid = VelocityGrid::new(-20.0, 20.0, 1 << n_exp).unwrap();
        let mut solver = FpSolver::new(&grid, &model, friction).unwrap();
        let mut state = DistributionState::gaussian(&grid, mean, sigma).unwrap();
        let bound = solver.stable_dt();
        let dt = if bound.is_finite() { 0.5 * bound } else { 0.01 };
        for _ in 0..3 {
            match solver.step(&mut state, dt) {
                Ok(()) => prop_assert!((state.total_mass() - 1.0).abs() <= 1e-12),
                Err(veldrift_core::CoreError::NegativeMass { .. })
                | Err(veldrift_core::CoreError::BoundaryMass { .. }) => break,
                Err(other) => prop_assert!(false, "unexpected error: {other}"),
            }
        }
    }

    #[test]
    fn planck_identities_hold_for_any_constants(
        c in 0.5..10.0f64,
        hbar in 0.5..10.0f64,
        g in 0.5..10.0f64,
    ) {
        let k = PhysicalConstants::new(c, hbar, g, 1.0, 1.0).unwrap();
        let l0 = k.planck_length();
        let g_back = l0 * l0 * c.powi(3) / hbar;
        prop_assert!((g_back / g - 1.0).abs() < 1e-12);
        let m_p = k.planck_mass();
        prop_assert!((m_p * l0 * c / hbar - 1.0).abs() < 1e-12);
    }

    #[test]
    fn com_increment_equals_the_direct_sum(
        v1 in -10.0..10.0f64,
        v2 in -10.0..10.0f64,
        d1 in -1.0..1.0f64,
        d2 in -1.0..1.0f64,
        delta in -5.0..5.0f64,
    ) {
        let u = UpdateRecord::new(d1, d2, delta);
        let (w1, w2) = apply_updates(v1, v2, &u).unwrap();
        let increment = (w1 + w2) / 2.0 - (v1 + v2) / 2.0;
        prop_assert!((increment - (d1 + d2)).abs() < 1e-12);
    }

    #[test]
    fn split_conserves_momentum(
        ma_exp in 20.0..25.0f64,
        mb_exp in 20.0..25.0f64,
        r_exp in 7.0..9.0f64,
    ) {
        let k = PhysicalConstants::CODATA;
        let m_a = 10f64.powf(ma_exp);
        let m_b = 10f64.powf(mb_exp);
        let r = 10f64.powf(r_exp);
        let pair = BodyPair::new(
            MacroObject::new(m_a).unwrap(),
            MacroObject::new(m_b).unwrap(),
            r,
            &k,
        ).unwrap();
        let a_rel = -k.g * (m_a + m_b) / (2.0 * r * r);
        let (a_a, a_b) = split_accelerations(&pair, a_rel).unwrap();
        let residual = m_a * a_a + m_b * a_b;
        prop_assert!(residual.abs() <= 1e-12 * (m_a * a_a).abs());
        prop_assert!(((a_a - a_b) / a_rel - 1.0).abs() < 1e-12);
    }

    #[test]
    fn acceleration_scales_exactly(
        m_exp in 10.0..30.0f64,
        r_exp in 5.0..9.0f64,
    ) {
        let k = PhysicalConstants::CODATA;
        let m = 10f64.powf(m_exp);
        let r = 10f64.powf(r_exp);
        let body = MacroObject::new(m).unwrap();
        let double = MacroObject::new(2.0 * m).unwrap();
        let a = measured_acceleration(&body, r, &k).unwrap();
        prop_assert!(a < 0.0);
        let a2 = measured_acceleration(&double, r, &k).unwrap();
        prop_assert!((a2 / a - 2.0).abs() < 1e-12);
        let a_far = measured_acceleration(&body, 2.0 * r, &k).unwrap();
        prop_assert!((a / a_far - 4.0).abs() < 1e-12);
        // The assembled chain is the half-Newton value.
        let newton_half = -k.g * m / (2.0 * r * r);
        prop_assert!((a / newton_half - 1.0).abs() < 1e-12);
    }
}
