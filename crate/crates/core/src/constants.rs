//! Physical constants, Planck-scale combinations, and unit-system
//! selection for experiment configs.

use crate::error::{CoreError, Result};

/// The constants every estimator in this crate draws from.
///
/// Runs in SI units use [`PhysicalConstants::CODATA`]. Nondimensional
/// runs may override any member from the experiment config; the only
/// requirement is strict positivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Signal speed `c` (m/s in SI mode).
    pub c: f64,
    /// Reduced Planck constant `hbar` (J s).
    pub hbar: f64,
    /// Gravitational constant `G` (m^3 kg^-1 s^-2).
    pub g: f64,
    /// Boltzmann constant `k_B` (J/K).
    pub k_b: f64,
    /// Stefan-Boltzmann constant `sigma_SB` (W m^-2 K^-4).
    pub sigma_sb: f64,
}

impl PhysicalConstants {
    /// CODATA 2018 values; `c`, `hbar`, `k_b`, and `sigma_sb` are exact.
    pub const CODATA: PhysicalConstants = PhysicalConstants {
        c: 299_792_458.0,
        hbar: 1.054_571_817e-34,
        g: 6.674_30e-11,
        k_b: 1.380_649e-23,
        sigma_sb: 5.670_374_419e-8,
    };

    /// Builds a constant set, rejecting non-finite or non-positive entries.
    pub fn new(c: f64, hbar: f64, g: f64, k_b: f64, sigma_sb: f64) -> Result<Self> {
        for (name, value) in [
            ("c", c),
            ("hbar", hbar),
            ("g", g),
            ("k_b", k_b),
            ("sigma_sb", sigma_sb),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(CoreError::invalid(
                    "constants",
                    format!("{name} must be finite and positive, got {value}"),
                ));
            }
        }
        Ok(PhysicalConstants {
            c,
            hbar,
            g,
            k_b,
            sigma_sb,
        })
    }

    /// Planck length `l0 = sqrt(G hbar / c^3)`.
    ///
    /// The square of this length ties the estimator chain back to `G`:
    /// `l0^2 c^3 / hbar == G` to rounding error.
    pub fn planck_length(&self) -> f64 {
        (self.g * self.hbar / self.c.powi(3)).sqrt()
    }

    /// Planck mass `m_P = sqrt(hbar c / G)`, about 2.2e-8 kg.
    ///
    /// Satisfies `m_P * l0 = hbar / c`.
    pub fn planck_mass(&self) -> f64 {
        (self.hbar * self.c / self.g).sqrt()
    }
}

/// Report from [`check_nonrelativistic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonrelReport {
    /// `hbar / (M l0 c)`, the measurement-driven velocity scale over `c`.
    pub ratio: f64,
    /// Threshold the ratio was compared against.
    pub threshold: f64,
    /// True when `ratio < threshold`.
    pub pass: bool,
}

/// Default bound on `hbar / (M l0 c)` below which a body's
/// measurement-driven velocities are treated as nonrelativistic.
pub const NONRELATIVISTIC_THRESHOLD: f64 = 1e-2;

/// Checks that position measurements at the Planck resolution `l0` leave
/// a body of mass `mass` nonrelativistic.
///
/// A position resolution `l0` implies momentum kicks of order `hbar/l0`
/// and hence velocities of order `hbar/(M l0)`. The report carries the
/// ratio of that velocity to `c`, which equals `m_P / mass`; it drops
/// below the default threshold around a hundred Planck masses.
pub fn check_nonrelativistic(mass: f64, k: &PhysicalConstants) -> Result<NonrelReport> {
    check_nonrelativistic_with_threshold(mass, k, NONRELATIVISTIC_THRESHOLD)
}

/// [`check_nonrelativistic`] with an explicit threshold.
pub fn check_nonrelativistic_with_threshold(
    mass: f64,
    k: &PhysicalConstants,
    threshold: f64,
) -> Result<NonrelReport> {
    if !(mass.is_finite() && mass > 0.0) {
        return Err(CoreError::invalid(
            "mass",
            format!("must be finite and positive, got {mass}"),
        ));
    }
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(CoreError::invalid(
            "threshold",
            format!("must be finite and positive, got {threshold}"),
        ));
    }
    let ratio = k.hbar / (mass * k.planck_length() * k.c);
    Ok(NonrelReport {
        ratio,
        threshold,
        pass: ratio < threshold,
    })
}

/// Whether an experiment runs in SI units or in a nondimensional system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitMode {
    Si,
    Nondimensional,
}

impl UnitMode {
    pub fn label(&self) -> &'static str {
        match self {
            UnitMode::Si => "si",
            UnitMode::Nondimensional => "nondimensional",
        }
    }
}

/// Unit-system declaration carried by experiment configs.
///
/// Scales are multipliers from config units to the internal working
/// units; both default to one and must stay positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub mode: UnitMode,
    pub velocity_scale: f64,
    pub time_scale: f64,
}

/// Default signal speed for nondimensional runs. Finite so the Doppler
/// tilt is visible at order-unity velocities, large enough that shipped
/// scenarios stay far from the validity ceiling.
pub const NONDIMENSIONAL_DEFAULT_C: f64 = 100.0;

impl UnitSystem {
    pub fn si() -> Self {
        UnitSystem {
            mode: UnitMode::Si,
            velocity_scale: 1.0,
            time_scale: 1.0,
        }
    }

    pub fn nondimensional() -> Self {
        UnitSystem {
            mode: UnitMode::Nondimensional,
            velocity_scale: 1.0,
            time_scale: 1.0,
        }
    }

    pub fn with_scales(mode: UnitMode, velocity_scale: f64, time_scale: f64) -> Result<Self> {
        for (name, value) in [("velocity_scale", velocity_scale), ("time_scale", time_scale)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(CoreError::invalid(
                    name,
                    format!("must be finite and positive, got {value}"),
                ));
            }
        }
        Ok(UnitSystem {
            mode,
            velocity_scale,
            time_scale,
        })
    }

    /// Constants a config starts from before applying overrides:
    /// CODATA in SI mode, unity (with `c = 100`) in nondimensional mode.
    pub fn default_constants(&self) -> PhysicalConstants {
        match self.mode {
            UnitMode::Si => PhysicalConstants::CODATA,
            UnitMode::Nondimensional => PhysicalConstants {
                c: NONDIMENSIONAL_DEFAULT_C,
                hbar: 1.0,
                g: 1.0,
                k_b: 1.0,
                sigma_sb: 1.0,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn planck_length_matches_codata_value() {
        let l0 = PhysicalConstants::CODATA.planck_length();
        assert_relative_eq!(l0, 1.616_255e-35, max_relative = 1e-3);
    }

    #[test]
    fn planck_length_simple_combination() {
        let k = PhysicalConstants::new(1.0, 1.0, 4.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(k.planck_length(), 2.0, max_relative = 1e-15);
    }

    #[test]
    fn planck_mass_matches_codata_value() {
        let m_p = PhysicalConstants::CODATA.planck_mass();
        assert_relative_eq!(m_p, 2.176_434e-8, max_relative = 1e-3);
    }

    #[test]
    fn planck_mass_times_length_is_hbar_over_c() {
        let k = PhysicalConstants::CODATA;
        assert_relative_eq!(
            k.planck_mass() * k.planck_length(),
            k.hbar / k.c,
            max_relative = 1e-12
        );
    }

    #[test]
    fn length_squared_recovers_newton_constant() {
        let k = PhysicalConstants::CODATA;
        let l0 = k.planck_length();
        assert_relative_eq!(l0 * l0 * k.c.powi(3) / k.hbar, k.g, max_relative = 1e-12);
    }

    #[test]
    fn one_kilogram_is_deeply_nonrelativistic() {
        let report = check_nonrelativistic(1.0, &PhysicalConstants::CODATA).unwrap();
        assert_relative_eq!(report.ratio, 2.1764e-8, max_relative = 1e-3);
        assert!(report.pass);
    }

    #[test]
    fn planck_mass_sits_at_ratio_one() {
        let k = PhysicalConstants::CODATA;
        let report = check_nonrelativistic(k.planck_mass(), &k).unwrap();
        assert_relative_eq!(report.ratio, 1.0, max_relative = 1e-12);
        assert!(!report.pass);
    }

    #[test]
    fn hundred_planck_masses_sits_at_the_threshold() {
        let k = PhysicalConstants::CODATA;
        let report = check_nonrelativistic(100.0 * k.planck_mass(), &k).unwrap();
        assert_relative_eq!(report.ratio, 1e-2, max_relative = 1e-12);
    }

    #[test]
    fn rejects_nonpositive_constants() {
        assert!(PhysicalConstants::new(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(PhysicalConstants::new(1.0, -1.0, 1.0, 1.0, 1.0).is_err());
        assert!(PhysicalConstants::new(1.0, 1.0, f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn nondimensional_defaults_use_c_100() {
        let k = UnitSystem::nondimensional().default_constants();
        assert_eq!(k.c, 100.0);
        assert_eq!(k.hbar, 1.0);
        assert_eq!(UnitSystem::si().default_constants(), PhysicalConstants::CODATA);
    }

    #[test]
    fn unit_scales_must_be_positive() {
        assert!(UnitSystem::with_scales(UnitMode::Si, 0.0, 1.0).is_err());
        assert!(UnitSystem::with_scales(UnitMode::Si, 1.0, -2.0).is_err());
    }
}
