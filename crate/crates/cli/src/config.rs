//! Strict TOML experiment configs.
//!
//! Parsing never stops at the first problem: every unknown key, missing
//! key, type mismatch, and out-of-range value in the file is collected
//! and reported together, each one naming the offending key.

use std::fmt;
use std::path::PathBuf;

use veldrift_core::constants::{PhysicalConstants, UnitMode, UnitSystem};

/// Seed used when a config does not set one. Fixed so that omitting the
/// key still yields reproducible runs; never derived from the clock.
pub const DEFAULT_SEED: u64 = veldrift_core::rng::DEFAULT_SEED;

/// Initial distribution width assumed when `sigma0` is omitted.
pub const DEFAULT_SIGMA0: f64 = 0.5;

/// Ensemble size assumed when `n_samples` is omitted.
pub const DEFAULT_N_SAMPLES: u64 = 100_000;

/// Relative mismatch between fitted and closed-form rates above which a
/// drift or heating summary flags the run, unless the config overrides.
pub const DEFAULT_TOLERANCE: f64 = 0.01;

const TOP_LEVEL_KEYS: [&str; 6] = [
    "experiment",
    "seed",
    "output_dir",
    "unit_mode",
    "parameters",
    "constants",
];

const CONSTANT_KEYS: [&str; 5] = ["c", "hbar", "g", "k_b", "sigma_sb"];

/// The experiments the runner knows how to dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    MeasurementDemo,
    Drift,
    Heating,
    Friction,
    FpVsSde,
    NewtonSweep,
    ConsistencyReport,
    AppendixD,
    Spreading,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::MeasurementDemo,
        ExperimentKind::Drift,
        ExperimentKind::Heating,
        ExperimentKind::Friction,
        ExperimentKind::FpVsSde,
        ExperimentKind::NewtonSweep,
        ExperimentKind::ConsistencyReport,
        ExperimentKind::AppendixD,
        ExperimentKind::Spreading,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::MeasurementDemo => "measurement-demo",
            ExperimentKind::Drift => "drift",
            ExperimentKind::Heating => "heating",
            ExperimentKind::Friction => "friction",
            ExperimentKind::FpVsSde => "fp-vs-sde",
            ExperimentKind::NewtonSweep => "newton-sweep",
            ExperimentKind::ConsistencyReport => "consistency-report",
            ExperimentKind::AppendixD => "appendix-d",
            ExperimentKind::Spreading => "spreading",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentKind::MeasurementDemo => {
                "four-stage density-matrix pipeline with collapse sampling"
            }
            ExperimentKind::Drift => {
                "free diffusing ensemble; fits the mean-velocity drift against the closed form"
            }
            ExperimentKind::Heating => {
                "free diffusing ensemble; fits the variance growth against twice the mean diffusion coefficient"
            }
            ExperimentKind::Friction => {
                "damped ensemble relaxing to its stationary mean and variance"
            }
            ExperimentKind::FpVsSde => {
                "grid and stochastic integrators on one scenario, compared within Monte Carlo error"
            }
            ExperimentKind::NewtonSweep => {
                "measured acceleration over a mass sweep against the inverse-square law at half strength"
            }
            ExperimentKind::ConsistencyReport => {
                "scale checks for one body: recoil, photon budget, trembling temperature, nonrelativistic bound"
            }
            ExperimentKind::AppendixD => {
                "center-of-mass variance under mutual velocity updates, full versus naive accounting"
            }
            ExperimentKind::Spreading => "free wavepacket width as a function of time",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Shared scenario block for the diffusion experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionParams {
    pub dv_rms: f64,
    pub tau: f64,
    pub c: f64,
    pub mean0: f64,
    pub sigma0: f64,
    pub t_end: f64,
    pub record_every: f64,
    pub n_cells: usize,
}

/// Validated, fully defaulted parameters for one experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    MeasurementDemo {
        w1: f64,
        w2: f64,
        n_samples: u64,
    },
    Drift {
        diff: DiffusionParams,
        tolerance: f64,
    },
    Heating {
        diff: DiffusionParams,
        tolerance: f64,
    },
    Friction {
        diff: DiffusionParams,
        gamma: f64,
        v0: f64,
        self_consistent: bool,
    },
    FpVsSde {
        diff: DiffusionParams,
        n_samples: u64,
        dt: Option<f64>,
    },
    NewtonSweep {
        masses: Vec<f64>,
        r: f64,
    },
    ConsistencyReport {
        mass: f64,
        density: f64,
        size: f64,
        temperature: f64,
        surface_area: f64,
        solid_angle: f64,
    },
    AppendixD {
        total_mass: f64,
        alpha: Option<f64>,
        separation: Option<f64>,
        n_intervals: u64,
        samples: u64,
        delta_std: Option<f64>,
    },
    Spreading {
        sigma0: f64,
        mass: f64,
        t_end: f64,
        record_every: f64,
    },
}

/// A parsed, validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub unit_mode: UnitMode,
    pub constants: PhysicalConstants,
    pub params: Params,
}

/// Everything wrong with a config file, one entry per problem.
#[derive(Debug)]
pub struct ConfigError {
    pub issues: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "invalid config ({} problem{}):",
            self.issues.len(),
            if self.issues.len() == 1 { "" } else { "s" }
        )?;
        for issue in &self.issues {
            writeln!(f, "  - {issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Collects typed values out of the `[parameters]` table, recording one
/// issue per problem instead of failing fast. Missing or ill-typed
/// required values yield placeholder NaN/zero; callers must discard the
/// assembled params whenever any issue was recorded.
struct ParamReader<'a> {
    table: &'a toml::Table,
    issues: &'a mut Vec<String>,
}

impl<'a> ParamReader<'a> {
    fn check_unknown(&mut self, experiment: &str, allowed: &[&str]) {
        for key in self.table.keys() {
            if !allowed.contains(&key.as_str()) {
                self.issues.push(format!(
                    "parameters: unknown key `{key}` for experiment `{experiment}` (allowed: {})",
                    allowed.join(", ")
                ));
            }
        }
    }

    fn raw_number(&mut self, key: &str) -> Option<f64> {
        match self.table.get(key) {
            None => None,
            Some(toml::Value::Float(x)) => Some(*x),
            Some(toml::Value::Integer(i)) => Some(*i as f64),
            Some(other) => {
                self.issues.push(format!(
                    "parameters.{key}: expected a number, got {}",
                    other.type_str()
                ));
                None
            }
        }
    }

    /// Number that must satisfy `check`; pushes `requirement` on failure.
    fn checked(&mut self, key: &str, check: impl Fn(f64) -> bool, requirement: &str) -> Option<f64> {
        let x = self.raw_number(key)?;
        if check(x) {
            Some(x)
        } else {
            self.issues
                .push(format!("parameters.{key}: must be {requirement}, got {x}"));
            None
        }
    }

    fn required(&mut self, key: &str, check: impl Fn(f64) -> bool, requirement: &str) -> f64 {
        if !self.table.contains_key(key) {
            self.issues
                .push(format!("parameters.{key}: missing required key"));
            return f64::NAN;
        }
        self.checked(key, check, requirement).unwrap_or(f64::NAN)
    }

    fn optional(&mut self, key: &str, default: f64, check: impl Fn(f64) -> bool, requirement: &str) -> f64 {
        if !self.table.contains_key(key) {
            return default;
        }
        self.checked(key, check, requirement).unwrap_or(default)
    }

    /// Optional value with no default, e.g. an override.
    fn maybe(&mut self, key: &str, check: impl Fn(f64) -> bool, requirement: &str) -> Option<f64> {
        if !self.table.contains_key(key) {
            return None;
        }
        self.checked(key, check, requirement)
    }

    fn count(&mut self, key: &str, default: u64, min: u64) -> u64 {
        match self.table.get(key) {
            None => default,
            Some(toml::Value::Integer(i)) if *i >= 0 && *i as u64 >= min => *i as u64,
            Some(toml::Value::Integer(i)) => {
                self.issues
                    .push(format!("parameters.{key}: must be an integer >= {min}, got {i}"));
                default
            }
            Some(other) => {
                self.issues.push(format!(
                    "parameters.{key}: expected an integer, got {}",
                    other.type_str()
                ));
                default
            }
        }
    }

    fn string(&mut self, key: &str) -> Option<String> {
        match self.table.get(key) {
            None => None,
            Some(toml::Value::String(s)) => Some(s.clone()),
            Some(other) => {
                self.issues.push(format!(
                    "parameters.{key}: expected a string, got {}",
                    other.type_str()
                ));
                None
            }
        }
    }

    fn number_array(&mut self, key: &str, check: impl Fn(f64) -> bool, requirement: &str) -> Vec<f64> {
        let items = match self.table.get(key) {
            None => {
                self.issues
                    .push(format!("parameters.{key}: missing required key"));
                return Vec::new();
            }
            Some(toml::Value::Array(items)) => items,
            Some(other) => {
                self.issues.push(format!(
                    "parameters.{key}: expected an array of numbers, got {}",
                    other.type_str()
                ));
                return Vec::new();
            }
        };
        if items.is_empty() {
            self.issues
                .push(format!("parameters.{key}: must not be empty"));
            return Vec::new();
        }
        let mut out = Vec::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            let x = match item {
                toml::Value::Float(x) => *x,
                toml::Value::Integer(n) => *n as f64,
                other => {
                    self.issues.push(format!(
                        "parameters.{key}[{i}]: expected a number, got {}",
                        other.type_str()
                    ));
                    continue;
                }
            };
            if check(x) {
                out.push(x);
            } else {
                self.issues
                    .push(format!("parameters.{key}[{i}]: must be {requirement}, got {x}"));
            }
        }
        out
    }
}

fn finite(x: f64) -> bool {
    x.is_finite()
}

fn finite_positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

fn finite_nonnegative(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

/// Positive, with infinity allowed: the signal speed may be `inf` to
/// switch the Doppler tilt off.
fn positive_or_inf(x: f64) -> bool {
    !x.is_nan() && x > 0.0
}

fn diffusion_block(r: &mut ParamReader<'_>) -> DiffusionParams {
    let dv_rms = r.required("dv_rms", finite_nonnegative, "finite and nonnegative");
    let tau = r.required("tau", finite_positive, "finite and positive");
    let c = r.required("c", positive_or_inf, "positive (inf allowed)");
    let mean0 = r.optional("mean0", 0.0, finite, "finite");
    let sigma0 = r.optional("sigma0", DEFAULT_SIGMA0, finite_positive, "finite and positive");
    let t_end = r.required("t_end", finite_nonnegative, "finite and nonnegative");
    let default_every = if t_end > 0.0 { t_end / 10.0 } else { 1.0 };
    let record_every = r.optional(
        "record_every",
        default_every,
        finite_positive,
        "finite and positive",
    );
    let n_cells = r.count(
        "n_cells",
        veldrift_core::diffusion::grid::DEFAULT_N_CELLS as u64,
        4,
    ) as usize;
    DiffusionParams {
        dv_rms,
        tau,
        c,
        mean0,
        sigma0,
        t_end,
        record_every,
        n_cells,
    }
}

const DIFFUSION_KEYS: [&str; 8] = [
    "dv_rms",
    "tau",
    "c",
    "mean0",
    "sigma0",
    "t_end",
    "record_every",
    "n_cells",
];

fn parse_params(
    kind: ExperimentKind,
    table: &toml::Table,
    issues: &mut Vec<String>,
) -> Params {
    let mut r = ParamReader { table, issues };
    match kind {
        ExperimentKind::MeasurementDemo => {
            r.check_unknown(kind.name(), &["w1", "w2", "n_samples"]);
            let w1 = r.optional("w1", 0.5, |x| (0.0..=1.0).contains(&x), "within [0, 1]");
            let w2 = r.optional("w2", 1.0 - w1, |x| (0.0..=1.0).contains(&x), "within [0, 1]");
            if (w1 + w2 - 1.0).abs() > 1e-12 {
                r.issues.push(format!(
                    "parameters.w2: weights must sum to one, got w1 + w2 = {}",
                    w1 + w2
                ));
            }
            let n_samples = r.count("n_samples", DEFAULT_N_SAMPLES, 1);
            Params::MeasurementDemo { w1, w2, n_samples }
        }
        ExperimentKind::Drift | ExperimentKind::Heating => {
            let allowed: Vec<&str> = DIFFUSION_KEYS.iter().copied().chain(["tolerance"]).collect();
            r.check_unknown(kind.name(), &allowed);
            let diff = diffusion_block(&mut r);
            let tolerance = r.optional(
                "tolerance",
                DEFAULT_TOLERANCE,
                finite_positive,
                "finite and positive",
            );
            if kind == ExperimentKind::Drift {
                Params::Drift { diff, tolerance }
            } else {
                Params::Heating { diff, tolerance }
            }
        }
        ExperimentKind::Friction => {
            let allowed: Vec<&str> = DIFFUSION_KEYS
                .iter()
                .copied()
                .chain(["gamma", "v0", "v0_mode"])
                .collect();
            r.check_unknown(kind.name(), &allowed);
            let diff = diffusion_block(&mut r);
            let gamma = r.required("gamma", finite_positive, "finite and positive");
            let self_consistent = match r.string("v0_mode").as_deref() {
                None | Some("fixed") => false,
                Some("self-consistent") => true,
                Some(other) => {
                    r.issues.push(format!(
                        "parameters.v0_mode: expected \"fixed\" or \"self-consistent\", got \"{other}\""
                    ));
                    false
                }
            };
            if self_consistent && table.contains_key("v0") {
                r.issues.push(
                    "parameters.v0: not allowed when v0_mode = \"self-consistent\" \
                     (the reference velocity tracks the evolving mean)"
                        .to_string(),
                );
            }
            let v0 = r.optional("v0", 0.0, finite, "finite");
            Params::Friction {
                diff,
                gamma,
                v0,
                self_consistent,
            }
        }
        ExperimentKind::FpVsSde => {
            let allowed: Vec<&str> = DIFFUSION_KEYS
                .iter()
                .copied()
                .chain(["n_samples", "dt"])
                .collect();
            r.check_unknown(kind.name(), &allowed);
            let diff = diffusion_block(&mut r);
            let n_samples = r.count("n_samples", DEFAULT_N_SAMPLES, 2);
            let dt = r.maybe("dt", finite_positive, "finite and positive");
            Params::FpVsSde {
                diff,
                n_samples,
                dt,
            }
        }
        ExperimentKind::NewtonSweep => {
            r.check_unknown(kind.name(), &["masses", "r"]);
            let masses = r.number_array("masses", finite_positive, "finite and positive");
            let radius = r.required("r", finite_positive, "finite and positive");
            Params::NewtonSweep { masses, r: radius }
        }
        ExperimentKind::ConsistencyReport => {
            r.check_unknown(
                kind.name(),
                &[
                    "mass",
                    "density",
                    "size",
                    "temperature",
                    "surface_area",
                    "solid_angle",
                ],
            );
            Params::ConsistencyReport {
                mass: r.required("mass", finite_positive, "finite and positive"),
                density: r.required("density", finite_positive, "finite and positive"),
                size: r.required("size", finite_positive, "finite and positive"),
                temperature: r.required("temperature", finite_nonnegative, "finite and nonnegative"),
                surface_area: r.required("surface_area", finite_positive, "finite and positive"),
                solid_angle: r.required("solid_angle", finite_positive, "finite and positive"),
            }
        }
        ExperimentKind::AppendixD => {
            r.check_unknown(
                kind.name(),
                &[
                    "total_mass",
                    "alpha",
                    "separation",
                    "n_intervals",
                    "samples",
                    "delta_std",
                ],
            );
            let total_mass = r.required("total_mass", finite_positive, "finite and positive");
            let alpha = r.maybe("alpha", finite_nonnegative, "finite and nonnegative");
            let separation = r.maybe("separation", finite_positive, "finite and positive");
            if table.contains_key("alpha") == table.contains_key("separation") {
                r.issues.push(
                    "parameters: provide exactly one of `alpha` or `separation`".to_string(),
                );
            }
            let n_intervals = r.count("n_intervals", 4, 1);
            let samples = r.count("samples", DEFAULT_N_SAMPLES, 2);
            let delta_std = r.maybe("delta_std", finite_nonnegative, "finite and nonnegative");
            Params::AppendixD {
                total_mass,
                alpha,
                separation,
                n_intervals,
                samples,
                delta_std,
            }
        }
        ExperimentKind::Spreading => {
            r.check_unknown(kind.name(), &["sigma0", "mass", "t_end", "record_every"]);
            let sigma0 = r.required("sigma0", finite_positive, "finite and positive");
            let mass = r.required("mass", finite_positive, "finite and positive");
            let t_end = r.required("t_end", finite_nonnegative, "finite and nonnegative");
            let default_every = if t_end > 0.0 { t_end / 10.0 } else { 1.0 };
            let record_every = r.optional(
                "record_every",
                default_every,
                finite_positive,
                "finite and positive",
            );
            Params::Spreading {
                sigma0,
                mass,
                t_end,
                record_every,
            }
        }
    }
}

fn parse_constants(
    table: &toml::Table,
    unit_mode: UnitMode,
    issues: &mut Vec<String>,
) -> PhysicalConstants {
    let defaults = UnitSystem::nondimensional().default_constants();
    if unit_mode == UnitMode::Si {
        issues.push(
            "constants: overrides are only allowed when unit_mode = \"nondimensional\" \
             (SI runs use the built-in CODATA values)"
                .to_string(),
        );
        return PhysicalConstants::CODATA;
    }
    let mut out = defaults;
    for (key, value) in table {
        if !CONSTANT_KEYS.contains(&key.as_str()) {
            issues.push(format!(
                "constants: unknown key `{key}` (allowed: {})",
                CONSTANT_KEYS.join(", ")
            ));
            continue;
        }
        let x = match value {
            toml::Value::Float(x) => *x,
            toml::Value::Integer(i) => *i as f64,
            other => {
                issues.push(format!(
                    "constants.{key}: expected a number, got {}",
                    other.type_str()
                ));
                continue;
            }
        };
        if !finite_positive(x) {
            issues.push(format!(
                "constants.{key}: must be finite and positive, got {x}"
            ));
            continue;
        }
        match key.as_str() {
            "c" => out.c = x,
            "hbar" => out.hbar = x,
            "g" => out.g = x,
            "k_b" => out.k_b = x,
            "sigma_sb" => out.sigma_sb = x,
            _ => unreachable!(),
        }
    }
    out
}

/// Parses and validates a config file, reporting every problem found.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let table: toml::Table = text.parse().map_err(|e| ConfigError {
        issues: vec![format!("not valid TOML: {e}")],
    })?;
    let mut issues = Vec::new();

    for key in table.keys() {
        if !TOP_LEVEL_KEYS.contains(&key.as_str()) {
            issues.push(format!(
                "unknown key `{key}` (expected one of: {})",
                TOP_LEVEL_KEYS.join(", ")
            ));
        }
    }

    let experiment = match table.get("experiment") {
        None => {
            issues.push("missing required key `experiment`".to_string());
            None
        }
        Some(toml::Value::String(s)) => match ExperimentKind::from_name(s) {
            Some(kind) => Some(kind),
            None => {
                issues.push(format!(
                    "experiment: unknown experiment `{s}` (run `veldrift list-experiments` for the list)"
                ));
                None
            }
        },
        Some(other) => {
            issues.push(format!(
                "experiment: expected a string, got {}",
                other.type_str()
            ));
            None
        }
    };

    let seed = match table.get("seed") {
        None => DEFAULT_SEED,
        Some(toml::Value::Integer(i)) if *i >= 0 => *i as u64,
        Some(toml::Value::Integer(i)) => {
            issues.push(format!("seed: must be nonnegative, got {i}"));
            DEFAULT_SEED
        }
        Some(other) => {
            issues.push(format!("seed: expected an integer, got {}", other.type_str()));
            DEFAULT_SEED
        }
    };

    let output_dir = match table.get("output_dir") {
        None => None,
        Some(toml::Value::String(s)) => Some(PathBuf::from(s)),
        Some(other) => {
            issues.push(format!(
                "output_dir: expected a string, got {}",
                other.type_str()
            ));
            None
        }
    };

    let unit_mode = match table.get("unit_mode") {
        None => UnitMode::Nondimensional,
        Some(toml::Value::String(s)) => match s.to_ascii_lowercase().as_str() {
            "si" => UnitMode::Si,
            "nondimensional" => UnitMode::Nondimensional,
            _ => {
                issues.push(format!(
                    "unit_mode: expected \"si\" or \"nondimensional\", got \"{s}\""
                ));
                UnitMode::Nondimensional
            }
        },
        Some(other) => {
            issues.push(format!(
                "unit_mode: expected a string, got {}",
                other.type_str()
            ));
            UnitMode::Nondimensional
        }
    };

    let constants = match table.get("constants") {
        None => UnitSystem { mode: unit_mode, ..UnitSystem::nondimensional() }.default_constants(),
        Some(toml::Value::Table(t)) => parse_constants(t, unit_mode, &mut issues),
        Some(other) => {
            issues.push(format!(
                "constants: expected a table, got {}",
                other.type_str()
            ));
            PhysicalConstants::CODATA
        }
    };

    let empty = toml::Table::new();
    let params_table = match table.get("parameters") {
        None => &empty,
        Some(toml::Value::Table(t)) => t,
        Some(other) => {
            issues.push(format!(
                "parameters: expected a table, got {}",
                other.type_str()
            ));
            &empty
        }
    };

    let params = experiment.map(|kind| parse_params(kind, params_table, &mut issues));

    if !issues.is_empty() {
        return Err(ConfigError { issues });
    }
    // Both are Some here: a missing experiment would have recorded an issue.
    let experiment = experiment.expect("experiment validated above");
    Ok(ExperimentConfig {
        experiment,
        seed,
        output_dir,
        unit_mode,
        constants,
        params: params.expect("params validated above"),
    })
}
