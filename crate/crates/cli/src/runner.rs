//! Experiment dispatch: builds core scenarios from a validated config,
//! runs them, writes the CSV artifacts, and assembles `summary.json`.
//!
//! The summary embeds the fully resolved config (defaults applied,
//! derived quantities filled in) and the effective seed, but never the
//! output location, so re-running a config into any directory produces
//! byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use serde_json::{json, Map, Value};

use veldrift_core::constants::{check_nonrelativistic, PhysicalConstants};
use veldrift_core::diffusion::fp::FpSolver;
use veldrift_core::diffusion::grid::{DistributionState, VelocityGrid};
use veldrift_core::diffusion::moments::{fitted_drift, fitted_heating_rate, MomentRecord};
use veldrift_core::diffusion::sde::{default_sde_dt, evolve_ensemble, EnsembleState};
use veldrift_core::diffusion::{DiffusionModel, FrictionModel};
use veldrift_core::gravity::{
    measured_acceleration, photon_budget, recoil_ratio, spatial_diffusion_coefficient,
    trembling_temperature, wavepacket_width, wien_peak_angular_frequency, MacroObject,
    PREFACTOR_NOTE,
};
use veldrift_core::measurement::{
    collapse_sample, decohere, entangle, initial_state, Branch, MeasurementState,
};
use veldrift_core::rng::substream;
use veldrift_core::split::{com_variance_experiment, default_delta_std, SplitScenario};

use crate::config::{DiffusionParams, ExperimentConfig, Params};
use crate::output::{num, num_or_inf, to_json_string, write_csv, MOMENTS_HEADER};

/// What one run produced: the artifacts on disk and the summary text.
#[derive(Debug)]
pub struct RunRecord {
    pub output_dir: PathBuf,
    pub files: Vec<String>,
    pub summary_text: String,
}

/// Runs the configured experiment and writes its artifacts into
/// `out_dir` (which must exist).
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunRecord> {
    let outcome = dispatch(config, out_dir)
        .with_context(|| format!("experiment `{}` failed", config.experiment.name()))?;
    let summary = json!({
        "artifact": {
            "name": "veldrift",
            "version": env!("CARGO_PKG_VERSION"),
        },
        "config": {
            "experiment": config.experiment.name(),
            "seed": config.seed,
            "unit_mode": config.unit_mode.label(),
            "constants": constants_echo(&config.constants),
            "parameters": Value::Object(outcome.parameters),
        },
        "csv_files": outcome.csv_files.clone(),
        "results": outcome.results,
    });
    let text = to_json_string(&summary)?;
    let summary_path = out_dir.join("summary.json");
    fs::write(&summary_path, &text)
        .with_context(|| format!("writing {}", summary_path.display()))?;
    let mut files = outcome.csv_files;
    files.push("summary.json".to_string());
    Ok(RunRecord {
        output_dir: out_dir.to_path_buf(),
        files,
        summary_text: text,
    })
}

struct Outcome {
    results: Value,
    csv_files: Vec<String>,
    /// Config echo with every default and derived value resolved.
    parameters: Map<String, Value>,
}

fn dispatch(config: &ExperimentConfig, out_dir: &Path) -> Result<Outcome> {
    match &config.params {
        Params::MeasurementDemo { w1, w2, n_samples } => {
            run_measurement_demo(*w1, *w2, *n_samples, config.seed)
        }
        Params::Drift { diff, tolerance } => run_drift(diff, *tolerance, out_dir),
        Params::Heating { diff, tolerance } => run_heating(diff, *tolerance, out_dir),
        Params::Friction {
            diff,
            gamma,
            v0,
            self_consistent,
        } => run_friction(diff, *gamma, *v0, *self_consistent, out_dir),
        Params::FpVsSde {
            diff,
            n_samples,
            dt,
        } => run_fp_vs_sde(diff, *n_samples, *dt, config.seed, out_dir),
        Params::NewtonSweep { masses, r } => {
            run_newton_sweep(masses, *r, &config.constants, out_dir)
        }
        Params::ConsistencyReport {
            mass,
            density,
            size,
            temperature,
            surface_area,
            solid_angle,
        } => run_consistency_report(
            *mass,
            *density,
            *size,
            *temperature,
            *surface_area,
            *solid_angle,
            &config.constants,
        ),
        Params::AppendixD {
            total_mass,
            alpha,
            separation,
            n_intervals,
            samples,
            delta_std,
        } => run_appendix_d(
            *total_mass,
            *alpha,
            *separation,
            *n_intervals,
            *samples,
            *delta_std,
            config.seed,
            &config.constants,
        ),
        Params::Spreading {
            sigma0,
            mass,
            t_end,
            record_every,
        } => run_spreading(*sigma0, *mass, *t_end, *record_every, &config.constants, out_dir),
    }
}

fn constants_echo(k: &PhysicalConstants) -> Value {
    json!({
        "c": num(k.c),
        "hbar": num(k.hbar),
        "g": num(k.g),
        "k_b": num(k.k_b),
        "sigma_sb": num(k.sigma_sb),
    })
}

fn diffusion_echo(d: &DiffusionParams) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("dv_rms".into(), num(d.dv_rms));
    m.insert("tau".into(), num(d.tau));
    m.insert("c".into(), num_or_inf(d.c));
    m.insert("mean0".into(), num(d.mean0));
    m.insert("sigma0".into(), num(d.sigma0));
    m.insert("t_end".into(), num(d.t_end));
    m.insert("record_every".into(), num(d.record_every));
    m.insert("n_cells".into(), json!(d.n_cells));
    m
}

fn model_for(d: &DiffusionParams) -> Result<DiffusionModel> {
    Ok(DiffusionModel::new(d.dv_rms, d.tau, d.c)?)
}

/// Grid wide enough for free evolution: the diffusively grown width
/// plus the distance the mean drifts, centered on the drift midpoint.
fn free_grid(d: &DiffusionParams, model: &DiffusionModel) -> Result<VelocityGrid> {
    let d0 = model.diffusion_coefficient(d.mean0)?;
    let sigma_end = (d.sigma0 * d.sigma0 + 2.0 * d0 * d.t_end).sqrt();
    let drift_span = model.theoretical_drift() * d.t_end;
    let center = d.mean0 + 0.5 * drift_span;
    Ok(VelocityGrid::spanning(
        center,
        sigma_end + drift_span.abs(),
        d.n_cells,
    )?)
}

/// Grid spanning both the initial distribution and the stationary state
/// the friction relaxes it toward.
fn friction_grid(
    d: &DiffusionParams,
    model: &DiffusionModel,
    friction: &FrictionModel,
    v0: f64,
    self_consistent: bool,
) -> Result<VelocityGrid> {
    let target_mean = if self_consistent {
        d.mean0 + model.theoretical_drift() * d.t_end
    } else {
        v0 + model.theoretical_drift() / friction.gamma()
    };
    let w0 = model.stationary_variance(friction, target_mean)?.sqrt();
    let center = 0.5 * (d.mean0 + target_mean);
    let width = d.sigma0.max(w0) + 0.5 * (target_mean - d.mean0).abs();
    Ok(VelocityGrid::spanning(center, width, d.n_cells)?)
}

fn run_fp(
    d: &DiffusionParams,
    model: &DiffusionModel,
    friction: Option<FrictionModel>,
    grid: &VelocityGrid,
) -> Result<Vec<MomentRecord>> {
    let mut solver = FpSolver::new(grid, model, friction)?;
    let mut state = DistributionState::gaussian(grid, d.mean0, d.sigma0)?;
    Ok(solver.evolve(&mut state, d.t_end, d.record_every)?)
}

fn moment_rows(records: &[MomentRecord]) -> Vec<Vec<f64>> {
    records
        .iter()
        .map(|r| vec![r.time, r.mean_v, r.variance, r.total_mass])
        .collect()
}

fn too_few_records() -> anyhow::Error {
    anyhow!("need at least two records to fit a rate; raise t_end or lower record_every")
}

fn run_drift(d: &DiffusionParams, tolerance: f64, out_dir: &Path) -> Result<Outcome> {
    let model = model_for(d)?;
    let grid = free_grid(d, &model)?;
    let records = run_fp(d, &model, None, &grid)?;
    write_csv(&out_dir.join("moments.csv"), MOMENTS_HEADER, &moment_rows(&records))?;
    let fitted = fitted_drift(&records).ok_or_else(too_few_records)?;
    let theoretical = model.theoretical_drift();
    let relative_error = relative_gap(fitted, theoretical);
    let mut parameters = diffusion_echo(d);
    parameters.insert("tolerance".into(), num(tolerance));
    Ok(Outcome {
        results: json!({
            "fitted_drift": num(fitted),
            "theoretical_drift": num(theoretical),
            "relative_error": num(relative_error),
            "within_tolerance": relative_error <= tolerance,
        }),
        csv_files: vec!["moments.csv".to_string()],
        parameters,
    })
}

fn run_heating(d: &DiffusionParams, tolerance: f64, out_dir: &Path) -> Result<Outcome> {
    let model = model_for(d)?;
    let grid = free_grid(d, &model)?;
    let records = run_fp(d, &model, None, &grid)?;
    write_csv(&out_dir.join("moments.csv"), MOMENTS_HEADER, &moment_rows(&records))?;
    let fitted = fitted_heating_rate(&records).ok_or_else(too_few_records)?;
    let theoretical = model.theoretical_heating_rate(d.mean0)?;
    let relative_error = relative_gap(fitted, theoretical);
    let mut parameters = diffusion_echo(d);
    parameters.insert("tolerance".into(), num(tolerance));
    Ok(Outcome {
        results: json!({
            "fitted_heating_rate": num(fitted),
            "theoretical_heating_rate": num(theoretical),
            "relative_error": num(relative_error),
            "within_tolerance": relative_error <= tolerance,
        }),
        csv_files: vec!["moments.csv".to_string()],
        parameters,
    })
}

fn run_friction(
    d: &DiffusionParams,
    gamma: f64,
    v0: f64,
    self_consistent: bool,
    out_dir: &Path,
) -> Result<Outcome> {
    let model = model_for(d)?;
    let friction = if self_consistent {
        FrictionModel::self_consistent(gamma)?
    } else {
        FrictionModel::fixed(gamma, v0)?
    };
    let grid = friction_grid(d, &model, &friction, v0, self_consistent)?;
    let records = run_fp(d, &model, Some(friction), &grid)?;
    write_csv(&out_dir.join("moments.csv"), MOMENTS_HEADER, &moment_rows(&records))?;
    let last = records.last().expect("evolve always records the start");
    let fitted = fitted_drift(&records);
    let mut parameters = diffusion_echo(d);
    parameters.insert("gamma".into(), num(gamma));
    parameters.insert(
        "v0_mode".into(),
        json!(if self_consistent { "self-consistent" } else { "fixed" }),
    );
    if !self_consistent {
        parameters.insert("v0".into(), num(v0));
    }
    Ok(Outcome {
        results: json!({
            "fitted_drift": fitted.map(num).unwrap_or(Value::Null),
            "theoretical_drift": num(model.theoretical_drift()),
            "stationary_mean_measured": num(last.mean_v),
            "stationary_mean_predicted": if self_consistent {
                // The mean never settles in this mode; it keeps drifting.
                Value::Null
            } else {
                num(v0 + model.theoretical_drift() / gamma)
            },
            "stationary_variance_measured": num(last.variance),
            "stationary_variance_predicted": num(model.stationary_variance(&friction, last.mean_v)?),
        }),
        csv_files: vec!["moments.csv".to_string()],
        parameters,
    })
}

fn run_fp_vs_sde(
    d: &DiffusionParams,
    n_samples: u64,
    dt: Option<f64>,
    seed: u64,
    out_dir: &Path,
) -> Result<Outcome> {
    let model = model_for(d)?;
    let grid = free_grid(d, &model)?;
    let fp_records = run_fp(d, &model, None, &grid)?;
    let mut ensemble = EnsembleState::gaussian(n_samples as usize, d.mean0, d.sigma0, seed)?;
    let dt = dt.unwrap_or_else(|| default_sde_dt(&model, None));
    let sde_records = evolve_ensemble(&mut ensemble, &model, None, dt, d.t_end, d.record_every)?;
    write_csv(&out_dir.join("moments.csv"), MOMENTS_HEADER, &moment_rows(&fp_records))?;
    write_csv(
        &out_dir.join("moments_sde.csv"),
        MOMENTS_HEADER,
        &moment_rows(&sde_records),
    )?;

    // Gap at each checkpoint after the shared start, in units of three
    // Monte Carlo standard errors of the ensemble estimate.
    let n = n_samples as f64;
    let mut max_mean_gap = 0.0_f64;
    let mut max_variance_gap = 0.0_f64;
    let mut max_mean_gap_over_limit = 0.0_f64;
    let mut max_variance_gap_over_limit = 0.0_f64;
    for (fp, sde) in fp_records.iter().zip(&sde_records).skip(1) {
        let se_mean = (fp.variance / n).sqrt();
        let se_variance = fp.variance * (2.0 / (n - 1.0)).sqrt();
        let mean_gap = (sde.mean_v - fp.mean_v).abs();
        let variance_gap = (sde.variance - fp.variance).abs();
        max_mean_gap = max_mean_gap.max(mean_gap);
        max_variance_gap = max_variance_gap.max(variance_gap);
        max_mean_gap_over_limit = max_mean_gap_over_limit.max(mean_gap / (3.0 * se_mean));
        max_variance_gap_over_limit =
            max_variance_gap_over_limit.max(variance_gap / (3.0 * se_variance));
    }
    let checkpoints = fp_records.len().saturating_sub(1);
    let mut parameters = diffusion_echo(d);
    parameters.insert("n_samples".into(), json!(n_samples));
    parameters.insert("dt".into(), num(dt));
    Ok(Outcome {
        results: json!({
            "checkpoints": checkpoints,
            "max_mean_gap": num(max_mean_gap),
            "max_mean_gap_over_limit": num(max_mean_gap_over_limit),
            "max_variance_gap": num(max_variance_gap),
            "max_variance_gap_over_limit": num(max_variance_gap_over_limit),
            "within_three_se": max_mean_gap_over_limit <= 1.0 && max_variance_gap_over_limit <= 1.0,
        }),
        csv_files: vec!["moments.csv".to_string(), "moments_sde.csv".to_string()],
        parameters,
    })
}

fn run_newton_sweep(
    masses: &[f64],
    r: f64,
    k: &PhysicalConstants,
    out_dir: &Path,
) -> Result<Outcome> {
    let mut rows = Vec::with_capacity(masses.len());
    let mut max_ratio_deviation = 0.0_f64;
    for &mass in masses {
        let source = MacroObject::new(mass)?;
        let a_measured = measured_acceleration(&source, r, k)?;
        let a_newton_half = -k.g * mass / (2.0 * r * r);
        let ratio = a_measured / (-k.g * mass / (r * r));
        max_ratio_deviation = max_ratio_deviation.max((ratio - 0.5).abs());
        rows.push(vec![mass, r, a_measured, a_newton_half, ratio]);
    }
    write_csv(
        &out_dir.join("newton_sweep.csv"),
        "mass_kg,r_m,a_measured,a_newton_half,ratio",
        &rows,
    )?;
    let mut parameters = Map::new();
    parameters.insert(
        "masses".into(),
        Value::Array(masses.iter().map(|&m| num(m)).collect()),
    );
    parameters.insert("r".into(), num(r));
    Ok(Outcome {
        results: json!({
            "n_rows": masses.len(),
            "max_ratio_deviation_from_half": num(max_ratio_deviation),
            "prefactor_note": PREFACTOR_NOTE,
        }),
        csv_files: vec!["newton_sweep.csv".to_string()],
        parameters,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_consistency_report(
    mass: f64,
    density: f64,
    size: f64,
    temperature: f64,
    surface_area: f64,
    solid_angle: f64,
    k: &PhysicalConstants,
) -> Result<Outcome> {
    let source = MacroObject::new(mass)?
        .with_density(density)?
        .with_size(size)?
        .with_temperature(temperature)?
        .with_surface_area(surface_area)?;
    let omega = wien_peak_angular_frequency(temperature, k)?;
    let recoil = recoil_ratio(&source, omega, k)?;
    let budget = photon_budget(&source, solid_angle, k)?;
    let trembling = trembling_temperature(mass, k)?;
    let nonrel = check_nonrelativistic(mass, k)?;
    let mut parameters = Map::new();
    for (key, value) in [
        ("mass", mass),
        ("density", density),
        ("size", size),
        ("temperature", temperature),
        ("surface_area", surface_area),
        ("solid_angle", solid_angle),
    ] {
        parameters.insert(key.into(), num(value));
    }
    Ok(Outcome {
        results: json!({
            "wien_peak_angular_frequency": num(omega),
            "recoil_ratio": num(recoil),
            "photon_budget": {
                "n_ph": num(budget.n_ph),
                "at_least_one": budget.at_least_one,
            },
            "trembling_temperature": num(trembling),
            "nonrelativistic": {
                "ratio": num(nonrel.ratio),
                "threshold": num(nonrel.threshold),
                "pass": nonrel.pass,
            },
        }),
        csv_files: Vec::new(),
        parameters,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_appendix_d(
    total_mass: f64,
    alpha: Option<f64>,
    separation: Option<f64>,
    n_intervals: u64,
    samples: u64,
    delta_std: Option<f64>,
    seed: u64,
    k: &PhysicalConstants,
) -> Result<Outcome> {
    let scenario = match (alpha, separation) {
        (Some(a), None) => SplitScenario::with_alpha(total_mass, a, n_intervals, samples, seed)?,
        (None, Some(r)) => {
            SplitScenario::from_separation(total_mass, r, k, n_intervals, samples, seed)?
        }
        // Config validation enforces exactly one of the two.
        _ => unreachable!("one coupling source"),
    };
    let delta_std = delta_std.unwrap_or_else(|| default_delta_std(&scenario));
    let outcome = com_variance_experiment(&scenario, delta_std)?;
    let mut parameters = Map::new();
    parameters.insert("total_mass".into(), num(total_mass));
    if let Some(r) = separation {
        parameters.insert("separation".into(), num(r));
    }
    parameters.insert("alpha".into(), num(scenario.alpha()));
    parameters.insert("n_intervals".into(), json!(n_intervals));
    parameters.insert("samples".into(), json!(samples));
    parameters.insert("delta_std".into(), num(delta_std));
    Ok(Outcome {
        results: json!({
            "predicted": num(outcome.predicted),
            "measured": num(outcome.measured),
            "n_samples": outcome.n_samples,
            "z_score": num(outcome.z_score),
            "naive_variance": num(outcome.naive_variance),
            "naive_ratio": num(outcome.naive_variance / outcome.predicted),
        }),
        csv_files: Vec::new(),
        parameters,
    })
}

fn run_spreading(
    sigma0: f64,
    mass: f64,
    t_end: f64,
    record_every: f64,
    k: &PhysicalConstants,
    out_dir: &Path,
) -> Result<Outcome> {
    // Records at exact multiples of record_every, tolerating the usual
    // division rounding at the endpoint.
    let n_records = ((t_end / record_every) * (1.0 + 1e-12)).floor() as usize;
    let mut rows = Vec::with_capacity(n_records + 1);
    for i in 0..=n_records {
        let t = i as f64 * record_every;
        rows.push(vec![t, wavepacket_width(sigma0, mass, t, k)?]);
    }
    write_csv(&out_dir.join("spreading.csv"), "time,sigma", &rows)?;
    let characteristic_time = mass * sigma0 * sigma0 / k.hbar;
    let last = rows.last().expect("at least the start record");
    let mut parameters = Map::new();
    parameters.insert("sigma0".into(), num(sigma0));
    parameters.insert("mass".into(), num(mass));
    parameters.insert("t_end".into(), num(t_end));
    parameters.insert("record_every".into(), num(record_every));
    Ok(Outcome {
        results: json!({
            "spatial_diffusion_coefficient": num(spatial_diffusion_coefficient(mass, k)?),
            "characteristic_time": num(characteristic_time),
            "width_at_characteristic_time": num(wavepacket_width(sigma0, mass, characteristic_time, k)?),
            "t_final": num(last[0]),
            "sigma_final": num(last[1]),
        }),
        csv_files: vec!["spreading.csv".to_string()],
        parameters,
    })
}

fn run_measurement_demo(w1: f64, w2: f64, n_samples: u64, seed: u64) -> Result<Outcome> {
    let start = initial_state(w1, w2)?;
    let entangled = entangle(&start)?;
    let decohered = decohere(&entangled)?;
    let mut rng = substream(seed, 0);
    let mut counts = [0u64; 4];
    for _ in 0..n_samples {
        let (_, branch) = collapse_sample(&decohered, &mut rng)?;
        counts[branch.index()] += 1;
    }
    let mut counts_json = Map::new();
    let mut frequencies = Map::new();
    for branch in Branch::ALL {
        counts_json.insert(branch.label().to_string(), json!(counts[branch.index()]));
        frequencies.insert(
            branch.label().to_string(),
            num(counts[branch.index()] as f64 / n_samples as f64),
        );
    }
    let mut parameters = Map::new();
    parameters.insert("w1".into(), num(w1));
    parameters.insert("w2".into(), num(w2));
    parameters.insert("n_samples".into(), json!(n_samples));
    Ok(Outcome {
        results: json!({
            "stages": {
                "initial": stage_json(&start),
                "entangled": stage_json(&entangled),
                "decohered": stage_json(&decohered),
            },
            "counts": counts_json,
            "frequencies": frequencies,
        }),
        csv_files: Vec::new(),
        parameters,
    })
}

/// Density matrix as rows of `[re, im]` pairs plus its purity.
fn stage_json(state: &MeasurementState) -> Value {
    let rho = state.rho();
    let rows: Vec<Value> = (0..4)
        .map(|i| {
            Value::Array(
                (0..4)
                    .map(|j| {
                        let z = rho[(i, j)];
                        json!([num(z.re), num(z.im)])
                    })
                    .collect(),
            )
        })
        .collect();
    json!({ "rho": rows, "purity": num(state.purity()) })
}

fn relative_gap(measured: f64, reference: f64) -> f64 {
    if reference != 0.0 {
        (measured - reference).abs() / reference.abs()
    } else {
        measured.abs()
    }
}
