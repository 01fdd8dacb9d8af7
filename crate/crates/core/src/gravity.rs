//! Closed-form estimators connecting measurement resolution to an
//! emergent Newtonian acceleration.
//!
//! The chain goes: a body of mass `M` carries a velocity-fluctuation
//! time `tau = M l0^2 / hbar` (with `l0` the Planck length); over the
//! light travel time to a body at distance `r` the finest resolvable
//! velocity step is `dv = tau c^2 / r`; a random walk with step `dv`
//! per `tau`, tilted by the Doppler asymmetry, drifts at
//! `a = -dv^2 / (2 c tau)`. Assembled, `a = -G M / (2 r^2)`: the
//! inverse-square law with an explicit factor 1/2 left over from
//! setting every chain prefactor to exactly 1.
//!
//! Everything here is a pure function of immutable inputs. All order-
//! unity prefactors are conventional; only scalings and orders of
//! magnitude carry meaning, which is what the accompanying tests pin.

use crate::constants::PhysicalConstants;
use crate::error::{CoreError, Result};

/// Attached to every [`ChainReport`] so downstream output never quotes
/// the acceleration as if its absolute normalization were meaningful.
pub const PREFACTOR_NOTE: &str = "all chain prefactors fixed at 1; the assembled acceleration \
     carries an explicit factor 1/2 relative to G*M/r^2, and only scalings and orders of \
     magnitude are meaningful";

/// Dimensionless Wien displacement constant: the photon energy at the
/// peak of a thermal spectrum is `2.821 k_B T`.
pub const WIEN_PEAK_FACTOR: f64 = 2.821;

/// Bodies must be farther apart than this multiple of `c * tau` for
/// the resolution argument to apply.
pub const DEFAULT_SEPARATION_RATIO: f64 = 10.0;

fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CoreError::invalid(
            name,
            format!("must be finite and positive, got {value}"),
        ))
    }
}

/// A macroscopic body: mass always, plus whatever bulk properties the
/// consistency estimators need (density and radius for recoil, surface
/// temperature and area for the photon budget).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroObject {
    mass: f64,
    density: Option<f64>,
    size: Option<f64>,
    temperature: Option<f64>,
    surface_area: Option<f64>,
}

impl MacroObject {
    pub fn new(mass: f64) -> Result<Self> {
        Ok(MacroObject {
            mass: require_positive("mass", mass)?,
            density: None,
            size: None,
            temperature: None,
            surface_area: None,
        })
    }

    pub fn with_density(mut self, density: f64) -> Result<Self> {
        self.density = Some(require_positive("density", density)?);
        Ok(self)
    }

    /// `size` is the body's radius.
    pub fn with_size(mut self, size: f64) -> Result<Self> {
        self.size = Some(require_positive("size", size)?);
        Ok(self)
    }

    /// Zero kelvin is allowed: it makes the photon budget vanish.
    pub fn with_temperature(mut self, temperature: f64) -> Result<Self> {
        if !(temperature.is_finite() && temperature >= 0.0) {
            return Err(CoreError::invalid(
                "temperature",
                format!("must be finite and nonnegative, got {temperature}"),
            ));
        }
        self.temperature = Some(temperature);
        Ok(self)
    }

    pub fn with_surface_area(mut self, surface_area: f64) -> Result<Self> {
        self.surface_area = Some(require_positive("surface_area", surface_area)?);
        Ok(self)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn density(&self) -> Option<f64> {
        self.density
    }

    pub fn size(&self) -> Option<f64> {
        self.size
    }

    pub fn temperature(&self) -> Option<f64> {
        self.temperature
    }

    pub fn surface_area(&self) -> Option<f64> {
        self.surface_area
    }

    fn property(&self, field: Option<f64>, name: &'static str) -> Result<f64> {
        field.ok_or(CoreError::MissingProperty(name))
    }
}

/// Selects one member of a [`BodyPair`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Two bodies a fixed distance apart. Construction checks that the
/// separation clears both bodies' `c * tau` horizon by the required
/// ratio; inside it the resolution argument has no regime to work in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyPair {
    a: MacroObject,
    b: MacroObject,
    separation: f64,
}

impl BodyPair {
    pub fn new(a: MacroObject, b: MacroObject, separation: f64, k: &PhysicalConstants) -> Result<Self> {
        Self::with_separation_ratio(a, b, separation, k, DEFAULT_SEPARATION_RATIO)
    }

    pub fn with_separation_ratio(
        a: MacroObject,
        b: MacroObject,
        separation: f64,
        k: &PhysicalConstants,
        ratio: f64,
    ) -> Result<Self> {
        require_positive("separation", separation)?;
        require_positive("ratio", ratio)?;
        let l0 = k.planck_length();
        for body in [&a, &b] {
            let tau = fluctuation_time(body.mass(), l0, k)?;
            let required = ratio * k.c * tau;
            if separation <= required {
                return Err(CoreError::SeparationTooSmall {
                    r: separation,
                    ratio,
                    required,
                });
            }
        }
        Ok(BodyPair { a, b, separation })
    }

    pub fn a(&self) -> &MacroObject {
        &self.a
    }

    pub fn b(&self) -> &MacroObject {
        &self.b
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn body(&self, side: Side) -> &MacroObject {
        match side {
            Side::A => &self.a,
            Side::B => &self.b,
        }
    }
}

/// The assembled chain for one source body seen from distance `r`.
/// `1 / tau_a` also sets the rate at which repeated measurements drive
/// neighboring trajectories apart; no chaotic dynamics is simulated
/// here, the report only carries the scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport {
    pub l0: f64,
    pub tau_a: f64,
    pub dv_a: f64,
    pub a_measured: f64,
    pub prefactor_note: &'static str,
}

impl ChainReport {
    pub fn for_source(source: &MacroObject, r: f64, k: &PhysicalConstants) -> Result<Self> {
        let l0 = k.planck_length();
        let tau_a = fluctuation_time(source.mass(), l0, k)?;
        require_positive("r", r)?;
        let dv_a = tau_a * k.c * k.c / r;
        let a_measured = measured_acceleration(source, r, k)?;
        debug_assert!(a_measured < 0.0);
        Ok(ChainReport {
            l0,
            tau_a,
            dv_a,
            a_measured,
            prefactor_note: PREFACTOR_NOTE,
        })
    }
}

/// Time scale of a body's velocity fluctuations, `M l0^2 / hbar`.
/// `l0` is passed in so nonstandard unit systems can supply their own.
pub fn fluctuation_time(mass: f64, l0: f64, k: &PhysicalConstants) -> Result<f64> {
    require_positive("mass", mass)?;
    require_positive("l0", l0)?;
    Ok(mass * l0 * l0 / k.hbar)
}

/// Finest velocity step of the selected body resolvable from across
/// the pair's separation: `tau c^2 / r`.
pub fn velocity_resolution(pair: &BodyPair, which: Side, k: &PhysicalConstants) -> Result<f64> {
    let tau = fluctuation_time(pair.body(which).mass(), k.planck_length(), k)?;
    Ok(tau * k.c * k.c / pair.separation())
}

/// Minimal resolvable velocity difference after an observation time
/// `t0` (one-way), `tau c / t0`.
pub fn resolution_threshold(tau_emit: f64, t0: f64, c: f64) -> Result<f64> {
    require_positive("tau_emit", tau_emit)?;
    require_positive("t0", t0)?;
    require_positive("c", c)?;
    Ok(tau_emit * c / t0)
}

/// Acceleration of a test observer toward `source` at distance `r`,
/// assembled through the resolution chain: `-(1/2c) dv^2 / tau`.
/// Algebraically identical to `-G M / (2 r^2)`; the factor 1/2 is kept
/// rather than absorbed (see [`PREFACTOR_NOTE`]). Independent of every
/// property of the observer.
pub fn measured_acceleration(source: &MacroObject, r: f64, k: &PhysicalConstants) -> Result<f64> {
    require_positive("r", r)?;
    let tau = fluctuation_time(source.mass(), k.planck_length(), k)?;
    let dv = tau * k.c * k.c / r;
    Ok(-dv * dv / (2.0 * k.c * tau))
}

/// Relative acceleration of the pair, the sum of the two one-sided
/// attractions: `-G (M_A + M_B) / (2 r^2)`.
pub fn relative_measured_acceleration(pair: &BodyPair, k: &PhysicalConstants) -> Result<f64> {
    let a_a = measured_acceleration(pair.a(), pair.separation(), k)?;
    let a_b = measured_acceleration(pair.b(), pair.separation(), k)?;
    Ok(a_a - a_b.abs())
}

/// Splits a relative acceleration into per-body accelerations with
/// zero total momentum change:
/// `a'_A = a_rel M_B / (M_A + M_B)`, `a'_B = -a_rel M_A / (M_A + M_B)`,
/// so `M_A a'_A + M_B a'_B = 0` and `a'_A - a'_B = a_rel`.
pub fn split_accelerations(pair: &BodyPair, a_rel: f64) -> Result<(f64, f64)> {
    if !(a_rel.is_finite() && a_rel < 0.0) {
        return Err(CoreError::invalid(
            "a_rel",
            format!("must be finite and negative (attraction), got {a_rel}"),
        ));
    }
    let total = pair.a().mass() + pair.b().mass();
    Ok((a_rel * pair.b().mass() / total, -a_rel * pair.a().mass() / total))
}

/// Angular frequency at the peak of a thermal photon spectrum,
/// `2.821 k_B T / hbar`.
pub fn wien_peak_angular_frequency(temperature: f64, k: &PhysicalConstants) -> Result<f64> {
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(CoreError::invalid(
            "temperature",
            format!("must be finite and nonnegative, got {temperature}"),
        ));
    }
    Ok(WIEN_PEAK_FACTOR * k.k_b * temperature / k.hbar)
}

/// Momentum of one emitted photon of frequency `omega` relative to the
/// source's per-fluctuation momentum step:
/// `hbar^2 omega / (rho^2 R^5 l0^2 c^3)`. Needs density and size.
pub fn recoil_ratio(source: &MacroObject, omega: f64, k: &PhysicalConstants) -> Result<f64> {
    if !(omega.is_finite() && omega >= 0.0) {
        return Err(CoreError::invalid(
            "omega",
            format!("must be finite and nonnegative, got {omega}"),
        ));
    }
    let rho = source.property(source.density(), "density")?;
    let radius = source.property(source.size(), "size")?;
    let l0 = k.planck_length();
    Ok(k.hbar * k.hbar * omega / (rho * rho * radius.powi(5) * l0 * l0 * k.c.powi(3)))
}

/// Thermal photons an observer subtending `solid_angle` collects from
/// the source per fluctuation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonBudget {
    pub n_ph: f64,
    /// Below one photon per fluctuation time the scheme cannot track
    /// the source; callers should surface this.
    pub at_least_one: bool,
}

/// Photon count per fluctuation time,
/// `(sigma_SB l0^2 / (k_B hbar)) T^3 A M omega_solid`. Needs
/// temperature and surface area.
pub fn photon_budget(
    source: &MacroObject,
    solid_angle: f64,
    k: &PhysicalConstants,
) -> Result<PhotonBudget> {
    require_positive("solid_angle", solid_angle)?;
    let t = source.property(source.temperature(), "temperature")?;
    let area = source.property(source.surface_area(), "surface_area")?;
    let l0 = k.planck_length();
    let n_ph = k.sigma_sb * l0 * l0 / (k.k_b * k.hbar) * t.powi(3) * area * source.mass() * solid_angle;
    let at_least_one = n_ph >= 1.0;
    if !at_least_one {
        log::warn!("photon budget {n_ph:.3e} is below one photon per fluctuation time");
    }
    Ok(PhotonBudget { n_ph, at_least_one })
}

/// Temperature whose thermal spectrum matches the source's velocity
/// trembling, `hbar c^3 / (k_B G M)`.
pub fn trembling_temperature(mass: f64, k: &PhysicalConstants) -> Result<f64> {
    require_positive("mass", mass)?;
    Ok(k.hbar * k.c.powi(3) / (k.k_b * k.g * mass))
}

/// Spatial diffusion coefficient of a free body's wave packet,
/// `hbar / M`.
pub fn spatial_diffusion_coefficient(mass: f64, k: &PhysicalConstants) -> Result<f64> {
    require_positive("mass", mass)?;
    Ok(k.hbar / mass)
}

/// Free-evolution width of a Gaussian wave packet,
/// `sqrt(sigma0^2 + (hbar t / (M sigma0))^2)`.
pub fn wavepacket_width(sigma0: f64, mass: f64, t: f64, k: &PhysicalConstants) -> Result<f64> {
    require_positive("sigma0", sigma0)?;
    require_positive("mass", mass)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(CoreError::invalid(
            "t",
            format!("must be finite and nonnegative, got {t}"),
        ));
    }
    let spread = k.hbar * t / (mass * sigma0);
    Ok((sigma0 * sigma0 + spread * spread).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::check_nonrelativistic;
    use crate::diffusion::moments::least_squares_slope;
    use crate::diffusion::DiffusionModel;
    use approx::assert_relative_eq;

    const CODATA: PhysicalConstants = PhysicalConstants::CODATA;

    const EARTH_MASS: f64 = 5.972e24;
    const EARTH_RADIUS: f64 = 6.371e6;
    const MOON_MASS: f64 = 7.342e22;
    const EARTH_MOON_R: f64 = 3.844e8;

    fn unit_constants() -> PhysicalConstants {
        PhysicalConstants::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn fluctuation_time_of_one_kilogram() {
        let k = CODATA;
        let tau = fluctuation_time(1.0, k.planck_length(), &k).unwrap();
        assert_relative_eq!(tau, 2.477e-36, max_relative = 1e-3);
    }

    #[test]
    fn fluctuation_time_unit_values_and_linearity() {
        let k = unit_constants();
        assert_eq!(fluctuation_time(1.0, 1.0, &k).unwrap(), 1.0);
        let k = CODATA;
        let l0 = k.planck_length();
        let tau1 = fluctuation_time(3.0, l0, &k).unwrap();
        let tau2 = fluctuation_time(6.0, l0, &k).unwrap();
        assert_relative_eq!(tau2, 2.0 * tau1, epsilon = 0.0);
    }

    #[test]
    fn earth_velocity_resolution_from_its_surface() {
        let k = CODATA;
        let earth = MacroObject::new(EARTH_MASS).unwrap();
        let probe = MacroObject::new(1.0).unwrap();
        let pair = BodyPair::new(earth, probe, EARTH_RADIUS, &k).unwrap();
        let dv = velocity_resolution(&pair, Side::A, &k).unwrap();
        assert_relative_eq!(dv, 0.209, max_relative = 1e-2);
    }

    #[test]
    fn doubling_separation_halves_the_resolution() {
        let k = CODATA;
        let earth = MacroObject::new(EARTH_MASS).unwrap();
        let probe = MacroObject::new(1.0).unwrap();
        let near = BodyPair::new(earth, probe, EARTH_RADIUS, &k).unwrap();
        let far = BodyPair::new(earth, probe, 2.0 * EARTH_RADIUS, &k).unwrap();
        let ratio = velocity_resolution(&near, Side::A, &k).unwrap()
            / velocity_resolution(&far, Side::A, &k).unwrap();
        assert_relative_eq!(ratio, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn pair_rejects_separations_inside_the_horizon() {
        let k = CODATA;
        // tau c for 1e40 kg is about 7.4e12 m; demand more than 10x that.
        let heavy = MacroObject::new(1.0e40).unwrap();
        let probe = MacroObject::new(1.0).unwrap();
        let err = BodyPair::new(heavy, probe, 1.0e13, &k).unwrap_err();
        assert!(matches!(err, CoreError::SeparationTooSmall { .. }), "got {err}");
        assert!(BodyPair::new(heavy, probe, 1.0e14, &k).is_ok());
    }

    #[test]
    fn earth_surface_acceleration_matches_half_newton() {
        let k = CODATA;
        let earth = MacroObject::new(EARTH_MASS).unwrap();
        let a = measured_acceleration(&earth, EARTH_RADIUS, &k).unwrap();
        let newton = k.g * EARTH_MASS / (EARTH_RADIUS * EARTH_RADIUS);
        assert_relative_eq!(a, -newton / 2.0, max_relative = 1e-12);
        assert_relative_eq!(2.0 * a.abs(), 9.82, max_relative = 1e-3);
    }

    #[test]
    fn acceleration_scalings_are_exact() {
        let k = CODATA;
        let m = MacroObject::new(1.0e24).unwrap();
        let m2 = MacroObject::new(2.0e24).unwrap();
        let r = 1.0e7;
        let a1 = measured_acceleration(&m, r, &k).unwrap();
        let a2 = measured_acceleration(&m2, r, &k).unwrap();
        assert_relative_eq!(a2 / a1, 2.0, epsilon = 1e-12);
        let near = measured_acceleration(&m, r, &k).unwrap();
        let far = measured_acceleration(&m, 2.0 * r, &k).unwrap();
        assert_relative_eq!(near / far, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn log_log_sweeps_recover_the_exponents() {
        let k = CODATA;
        let r = 1.0e7;
        let mass_points: Vec<(f64, f64)> = (0..21)
            .map(|i| {
                let m = 10f64.powi(10 + i);
                let a = measured_acceleration(&MacroObject::new(m).unwrap(), r, &k).unwrap();
                (m.ln(), a.abs().ln())
            })
            .collect();
        let slope = least_squares_slope(&mass_points).unwrap();
        assert!((slope - 1.0).abs() < 1e-12, "mass slope {slope}");

        let body = MacroObject::new(1.0e24).unwrap();
        let r_points: Vec<(f64, f64)> = (0..17)
            .map(|i| {
                let r = 10f64.powf(5.0 + 0.25 * i as f64);
                let a = measured_acceleration(&body, r, &k).unwrap();
                (r.ln(), a.abs().ln())
            })
            .collect();
        let slope = least_squares_slope(&r_points).unwrap();
        assert!((slope + 2.0).abs() < 1e-12, "distance slope {slope}");
    }

    #[test]
    fn acceleration_ignores_every_observer_property() {
        let k = CODATA;
        let earth = MacroObject::new(EARTH_MASS).unwrap();
        let reference = velocity_resolution(
            &BodyPair::new(earth, MacroObject::new(1.0e18).unwrap(), EARTH_MOON_R, &k).unwrap(),
            Side::A,
            &k,
        )
        .unwrap();
        for exp in 18..=24 {
            let observer = MacroObject::new(10f64.powi(exp)).unwrap();
            let pair = BodyPair::new(earth, observer, EARTH_MOON_R, &k).unwrap();
            let dv = velocity_resolution(&pair, Side::A, &k).unwrap();
            assert_eq!(dv, reference);
            let a = measured_acceleration(pair.a(), pair.separation(), &k).unwrap();
            let a_ref = measured_acceleration(&earth, EARTH_MOON_R, &k).unwrap();
            assert_eq!(a, a_ref);
        }
    }

    #[test]
    fn earth_moon_relative_acceleration() {
        let k = CODATA;
        let earth = MacroObject::new(EARTH_MASS).unwrap();
        let moon = MacroObject::new(MOON_MASS).unwrap();
        let pair = BodyPair::new(earth, moon, EARTH_MOON_R, &k).unwrap();
        let a_rel = relative_measured_acceleration(&pair, &k).unwrap();
        assert_relative_eq!(a_rel, -1.365e-3, max_relative = 1e-3);
        let expected = -k.g * (EARTH_MASS + MOON_MASS) / (2.0 * EARTH_MOON_R * EARTH_MOON_R);
        assert_relative_eq!(a_rel, expected, max_relative = 1e-12);
    }

    #[test]
    fn relative_acceleration_limits() {
        let k = CODATA;
        let m = MacroObject::new(1.0e24).unwrap();
        let pair = BodyPair::new(m, m, 1.0e7, &k).unwrap();
        let a_rel = relative_measured_acceleration(&pair, &k).unwrap();
        let single = measured_acceleration(&m, 1.0e7, &k).unwrap();
        assert_relative_eq!(a_rel, 2.0 * single, max_relative = 1e-12);

        let speck = MacroObject::new(1.0e-3).unwrap();
        let lop = BodyPair::new(m, speck, 1.0e7, &k).unwrap();
        let a_lop = relative_measured_acceleration(&lop, &k).unwrap();
        assert_relative_eq!(a_lop, single, max_relative = 1e-12);
    }

    #[test]
    fn split_conserves_momentum_and_difference() {
        let k = CODATA;
        let earth = MacroObject::new(EARTH_MASS).unwrap();
        let moon = MacroObject::new(MOON_MASS).unwrap();
        let pair = BodyPair::new(earth, moon, EARTH_MOON_R, &k).unwrap();
        let a_rel = relative_measured_acceleration(&pair, &k).unwrap();
        let (a_a, a_b) = split_accelerations(&pair, a_rel).unwrap();
        let momentum = EARTH_MASS * a_a + MOON_MASS * a_b;
        let force = k.g * EARTH_MASS * MOON_MASS / (2.0 * EARTH_MOON_R * EARTH_MOON_R);
        assert!((momentum / force).abs() < 1e-12);
        assert_relative_eq!(EARTH_MASS * a_a, -force, max_relative = 1e-12);
        assert_relative_eq!(a_a - a_b, a_rel, max_relative = 1e-12);

        let equal = BodyPair::new(earth, earth, EARTH_MOON_R, &k).unwrap();
        let (e_a, e_b) = split_accelerations(&equal, a_rel).unwrap();
        assert_relative_eq!(e_a, a_rel / 2.0, epsilon = 0.0);
        assert_relative_eq!(e_b, -a_rel / 2.0, epsilon = 0.0);

        assert!(split_accelerations(&pair, 1.0).is_err());
    }

    #[test]
    fn resolution_threshold_examples() {
        assert_eq!(resolution_threshold(1.0, 1.0, 1.0).unwrap(), 1.0);
        assert_relative_eq!(
            resolution_threshold(1e-11, 1.0, 3e8).unwrap(),
            3e-3,
            max_relative = 1e-12
        );
        // With t0 = r / c the threshold is the pair resolution.
        let k = CODATA;
        let earth = MacroObject::new(EARTH_MASS).unwrap();
        let probe = MacroObject::new(1.0).unwrap();
        let pair = BodyPair::new(earth, probe, EARTH_RADIUS, &k).unwrap();
        let tau = fluctuation_time(EARTH_MASS, k.planck_length(), &k).unwrap();
        let via_threshold = resolution_threshold(tau, EARTH_RADIUS / k.c, k.c).unwrap();
        let via_pair = velocity_resolution(&pair, Side::A, &k).unwrap();
        assert_relative_eq!(via_threshold, via_pair, max_relative = 1e-12);
    }

    #[test]
    fn chain_report_assembles_consistently() {
        let k = CODATA;
        let earth = MacroObject::new(EARTH_MASS).unwrap();
        let report = ChainReport::for_source(&earth, EARTH_RADIUS, &k).unwrap();
        assert_relative_eq!(report.l0, k.planck_length(), epsilon = 0.0);
        assert_relative_eq!(
            report.a_measured,
            -report.dv_a * report.dv_a / (2.0 * k.c * report.tau_a),
            max_relative = 1e-12
        );
        assert!(report.a_measured < 0.0);
        assert_eq!(report.prefactor_note, PREFACTOR_NOTE);
    }

    #[test]
    fn drift_law_and_chain_agree_end_to_end() {
        // The same chain built from the diffusion side: resolution and
        // fluctuation time as the model's step and correlation scales
        // reproduce the acceleration exactly.
        let k = CODATA;
        let earth = MacroObject::new(EARTH_MASS).unwrap();
        let probe = MacroObject::new(1.0).unwrap();
        let pair = BodyPair::new(earth, probe, EARTH_RADIUS, &k).unwrap();
        let tau = fluctuation_time(EARTH_MASS, k.planck_length(), &k).unwrap();
        let dv = velocity_resolution(&pair, Side::A, &k).unwrap();
        let model = DiffusionModel::new(dv, tau, k.c).unwrap();
        let a_chain = measured_acceleration(&earth, EARTH_RADIUS, &k).unwrap();
        assert_relative_eq!(model.theoretical_drift(), a_chain, max_relative = 1e-12);
    }

    #[test]
    fn recoil_ratio_for_a_gram_of_water() {
        let k = CODATA;
        let droplet = MacroObject::new(1e-3)
            .unwrap()
            .with_density(1000.0)
            .unwrap()
            .with_size(0.01)
            .unwrap();
        let omega = wien_peak_angular_frequency(300.0, &k).unwrap();
        let ratio = recoil_ratio(&droplet, omega, &k).unwrap();
        assert_relative_eq!(ratio, 1.7507e-6, max_relative = 1e-3);
        // Order of magnitude: within a factor of five of 1e-6.
        assert!(ratio > 0.2e-6 && ratio < 5e-6);
    }

    #[test]
    fn recoil_ratio_scaling_and_units() {
        let k = unit_constants();
        let unit = MacroObject::new(1.0)
            .unwrap()
            .with_density(1.0)
            .unwrap()
            .with_size(1.0)
            .unwrap();
        assert_eq!(recoil_ratio(&unit, 1.0, &k).unwrap(), 1.0);
        let big = MacroObject::new(1.0)
            .unwrap()
            .with_density(1.0)
            .unwrap()
            .with_size(2f64.powf(0.2))
            .unwrap();
        assert_relative_eq!(recoil_ratio(&big, 1.0, &k).unwrap(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn recoil_ratio_requires_bulk_properties() {
        let k = CODATA;
        let bare = MacroObject::new(1.0).unwrap();
        assert!(matches!(
            recoil_ratio(&bare, 1.0, &k).unwrap_err(),
            CoreError::MissingProperty("density")
        ));
        let with_density = MacroObject::new(1.0).unwrap().with_density(1.0).unwrap();
        assert!(matches!(
            recoil_ratio(&with_density, 1.0, &k).unwrap_err(),
            CoreError::MissingProperty("size")
        ));
    }

    #[test]
    fn photon_budget_for_an_earthlike_body() {
        let k = CODATA;
        let body = MacroObject::new(EARTH_MASS)
            .unwrap()
            .with_temperature(288.0)
            .unwrap()
            .with_surface_area(5.1e14)
            .unwrap();
        let budget = photon_budget(&body, 1e-9, &k).unwrap();
        assert_relative_eq!(budget.n_ph, 7.40e17, max_relative = 1e-2);
        assert!(budget.at_least_one);
        // Linearity in the solid angle.
        let double = photon_budget(&body, 2e-9, &k).unwrap();
        assert_relative_eq!(double.n_ph, 2.0 * budget.n_ph, max_relative = 1e-12);
    }

    #[test]
    fn zero_temperature_yields_zero_photons_and_a_warning_flag() {
        let k = CODATA;
        let cold = MacroObject::new(EARTH_MASS)
            .unwrap()
            .with_temperature(0.0)
            .unwrap()
            .with_surface_area(5.1e14)
            .unwrap();
        let budget = photon_budget(&cold, 1e-9, &k).unwrap();
        assert_eq!(budget.n_ph, 0.0);
        assert!(!budget.at_least_one);
    }

    #[test]
    fn photon_budget_requires_thermal_properties() {
        let k = CODATA;
        let bare = MacroObject::new(1.0).unwrap();
        assert!(matches!(
            photon_budget(&bare, 1.0, &k).unwrap_err(),
            CoreError::MissingProperty("temperature")
        ));
    }

    #[test]
    fn trembling_temperature_of_earth() {
        let k = CODATA;
        let t = trembling_temperature(EARTH_MASS, &k).unwrap();
        assert_relative_eq!(t, 0.52, max_relative = 0.05);
        assert_relative_eq!(t, 0.5164, max_relative = 1e-3);
        // Inverse scaling in the mass.
        let t2 = trembling_temperature(2.0 * EARTH_MASS, &k).unwrap();
        assert_relative_eq!(t2, t / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn trembling_temperature_is_8pi_times_the_horizon_temperature() {
        let k = CODATA;
        let mass = 1.0e30;
        let t = trembling_temperature(mass, &k).unwrap();
        let horizon = k.hbar * k.c.powi(3) / (8.0 * std::f64::consts::PI * k.g * mass * k.k_b);
        assert_relative_eq!(t / horizon, 8.0 * std::f64::consts::PI, max_relative = 1e-12);
    }

    #[test]
    fn spatial_diffusion_examples() {
        let k = CODATA;
        assert_relative_eq!(
            spatial_diffusion_coefficient(1.0, &k).unwrap(),
            1.0546e-34,
            max_relative = 1e-3
        );
        let d1 = spatial_diffusion_coefficient(1.0, &k).unwrap();
        let d2 = spatial_diffusion_coefficient(0.5, &k).unwrap();
        assert_relative_eq!(d2, 2.0 * d1, max_relative = 1e-12);
        let unit = unit_constants();
        assert_eq!(spatial_diffusion_coefficient(1.0, &unit).unwrap(), 1.0);
    }

    #[test]
    fn wavepacket_width_examples() {
        let k = unit_constants();
        assert_eq!(wavepacket_width(1.0, 1.0, 0.0, &k).unwrap(), 1.0);
        assert_relative_eq!(
            wavepacket_width(1.0, 1.0, 2.0, &k).unwrap(),
            5f64.sqrt(),
            max_relative = 1e-12
        );
        // At t = M sigma0^2 / hbar the variance has doubled.
        let kc = CODATA;
        let sigma0 = 3.0e-10;
        let mass = 2.0e-26;
        let t_double = mass * sigma0 * sigma0 / kc.hbar;
        assert_relative_eq!(
            wavepacket_width(sigma0, mass, t_double, &kc).unwrap(),
            2f64.sqrt() * sigma0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn nonrelativistic_check_composes_with_the_chain() {
        let k = CODATA;
        let report = check_nonrelativistic(EARTH_MASS, &k).unwrap();
        assert!(report.pass);
        assert!(report.ratio < 1e-30);
    }
}
