//! Route execution and cross-validation.
//!
//! A run computes every enabled route for the configured scenario on shared
//! grids, writes one CSV per route, compares the routes against each other
//! and writes a report. The process outcome is the conjunction of all gated
//! comparisons.

use std::fs;
use std::path::PathBuf;
use std::thread;

use shotspec_core::analytic;
use shotspec_core::curve::SpectrumCurve;
use shotspec_core::engine::{build_model, fbl_filtered_model, Detector, Scenario, ScenarioSpec};
use shotspec_core::estimator::{estimate_spectrum, merge_trajectories, BinAccumulator, WelchConfig};
use shotspec_core::params::{steady_state, CouplingParams, FeedbackParams, LaserParams, SteadyState};
use shotspec_core::sim::{simulate, simulate_into, SimConfig};

use crate::config::{DetectorChoice, ExperimentConfig, Route, ScenarioKind};
use crate::csvio;
use crate::report::{compare_curves, CompareReport, Tolerances};
use crate::CliError;

#[derive(Debug)]
pub struct RunOutcome {
    pub passed: bool,
    pub out_dir: PathBuf,
    pub report: CompareReport,
}

fn laser_params(cfg: &ExperimentConfig) -> LaserParams {
    LaserParams::new(1.0, cfg.params.r_over_kappa, cfg.params.p)
}

fn coupling_params(cfg: &ExperimentConfig) -> Option<CouplingParams> {
    cfg.scenario.is_coupled().then(|| {
        CouplingParams::new(
            cfg.params.kappa0_over_kappa,
            cfg.params.kappa_tilde_over_kappa,
            1.0,
        )
    })
}

fn steady(cfg: &ExperimentConfig) -> Result<SteadyState, CliError> {
    let laser = laser_params(cfg);
    let coupling = coupling_params(cfg);
    Ok(steady_state(&laser, coupling.as_ref())?)
}

fn scenario_spec(cfg: &ExperimentConfig) -> ScenarioSpec {
    let detector = match cfg.params.detector {
        DetectorChoice::Exciting => Detector::Exciting,
        DetectorChoice::Measuring => Detector::Measuring,
    };
    let p = cfg.params.p;
    match cfg.scenario {
        ScenarioKind::Single => ScenarioSpec::new(Scenario::Single { pump_regularity: p }),
        ScenarioKind::Fbl => ScenarioSpec::new(Scenario::Fbl {
            pump_regularity: p,
            efficiency: cfg.params.lambda,
        }),
        ScenarioKind::Coupled => ScenarioSpec::with_detector(
            Scenario::Coupled {
                pump_regularity: p,
                kappa: 1.0,
                kappa_tilde: cfg.params.kappa_tilde_over_kappa,
                kappa0: cfg.params.kappa0_over_kappa,
            },
            detector,
        ),
        ScenarioKind::CoupledFbl => ScenarioSpec::with_detector(
            Scenario::CoupledFbl {
                pump_regularity: p,
                efficiency: cfg.params.lambda,
                kappa: 1.0,
                kappa_tilde: cfg.params.kappa_tilde_over_kappa,
                kappa0: cfg.params.kappa0_over_kappa,
            },
            detector,
        ),
    }
}

fn analytic_curve(cfg: &ExperimentConfig, grid: &[f64]) -> Result<SpectrumCurve, CliError> {
    let p = cfg.params.p;
    let curve = match cfg.scenario {
        ScenarioKind::Single => analytic::s_single(p, grid)?,
        ScenarioKind::Fbl => analytic::s_fbl(p, cfg.params.lambda, grid)?,
        ScenarioKind::Coupled => analytic::s_coupled(
            p,
            1.0,
            cfg.params.kappa_tilde_over_kappa,
            cfg.params.kappa0_over_kappa,
            grid,
        )?,
        ScenarioKind::CoupledFbl => analytic::s_coupled_fbl_general(
            cfg.params.lambda,
            1.0,
            cfg.params.kappa_tilde_over_kappa,
            cfg.params.kappa0_over_kappa,
            grid,
        )?,
    };
    Ok(curve)
}

fn engine_curve(cfg: &ExperimentConfig, grid: &[f64]) -> Result<SpectrumCurve, CliError> {
    let spec = scenario_spec(cfg);
    let model = build_model(&spec, &steady(cfg)?)?;
    Ok(model.psd_curve(grid)?)
}

fn feedback_params(cfg: &ExperimentConfig) -> Option<FeedbackParams> {
    (cfg.scenario == ScenarioKind::Fbl).then_some(FeedbackParams {
        efficiency: cfg.params.lambda,
        filter_bandwidth: cfg.sim.filter_bandwidth,
    })
}

fn sim_config(cfg: &ExperimentConfig, seed: u64) -> SimConfig {
    SimConfig {
        duration: cfg.sim.duration,
        seed,
        warmup: cfg.sim.warmup,
        rate_integration_step: cfg.sim.rate_integration_step,
        detector_efficiency: cfg.sim.detector_efficiency,
    }
}

fn welch_config(cfg: &ExperimentConfig) -> WelchConfig {
    WelchConfig {
        segment_length: cfg.welch.segment_length,
        overlap: cfg.welch.overlap,
        window: cfg.welch.window,
        min_segments: cfg.welch.min_segments,
        band: (cfg.welch.band_min, cfg.welch.band_max),
        log_bins: (cfg.welch.log_bins > 0).then_some(cfg.welch.log_bins),
    }
}

type SeedResult = Result<(SpectrumCurve, Vec<String>, f64), CliError>;

struct McOutput {
    curve: SpectrumCurve,
    warnings: Vec<String>,
    max_clipped_fraction: f64,
}

/// One seed: simulate, optionally persist the raw events, bin, estimate.
fn mc_one_seed(cfg: &ExperimentConfig, seed: u64) -> SeedResult {
    let laser = laser_params(cfg);
    let fbl = feedback_params(cfg);
    let sim_cfg = sim_config(cfg, seed);
    let span = cfg.sim.duration - cfg.sim.warmup;
    let (counts, diagnostics) = if cfg.sim.save_events {
        let output = simulate(&laser, fbl.as_ref(), &sim_cfg)?;
        let path = cfg
            .output_dir
            .join(format!("{}_events_seed{}.txt", cfg.scenario, seed));
        csvio::write_events(&path, &output.train)?;
        let mut acc = BinAccumulator::new(cfg.sim.bin_dt, span)?;
        for &t in output.train.times() {
            acc.push(t);
        }
        (acc.into_counts(), output.diagnostics)
    } else {
        let mut acc = BinAccumulator::new(cfg.sim.bin_dt, span)?;
        let diagnostics = simulate_into(&laser, fbl.as_ref(), &sim_cfg, |t| acc.push(t))?;
        (acc.into_counts(), diagnostics)
    };
    let mut curve = estimate_spectrum(&counts, &welch_config(cfg))?;
    curve.meta.seed = Some(seed);
    Ok((curve, diagnostics.warnings(), diagnostics.clipped_fraction))
}

/// Simulate all seeds (optionally in parallel), estimate and merge.
fn mc_curve(cfg: &ExperimentConfig, parallel: bool) -> Result<McOutput, CliError> {
    let seeds: Vec<u64> = (0..cfg.sim.seeds as u64).map(|k| cfg.sim.seed + k).collect();
    let results: Vec<SeedResult> = if parallel && seeds.len() > 1 {
        thread::scope(|scope| {
            let handles: Vec<_> = seeds
                .iter()
                .map(|&seed| scope.spawn(move || mc_one_seed(cfg, seed)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("seed worker panicked"))
                .collect()
        })
    } else {
        seeds.iter().map(|&seed| mc_one_seed(cfg, seed)).collect()
    };

    let mut curves = Vec::with_capacity(seeds.len());
    let mut warnings: Vec<String> = Vec::new();
    let mut max_clip = 0.0f64;
    for result in results {
        let (curve, seed_warnings, clip) = result?;
        curves.push(curve);
        for w in seed_warnings {
            if !warnings.contains(&w) {
                warnings.push(w);
            }
        }
        max_clip = max_clip.max(clip);
    }
    let mut merged = merge_trajectories(&curves)?;
    merged.meta.params = format!(
        "{} seeds={} base_seed={} duration={} warmup={}",
        merged.meta.params, cfg.sim.seeds, cfg.sim.seed, cfg.sim.duration, cfg.sim.warmup
    );
    for w in &warnings {
        if !merged.meta.warnings.contains(w) {
            merged.meta.warnings.push(w.clone());
        }
    }
    Ok(McOutput {
        curve: merged,
        warnings,
        max_clipped_fraction: max_clip,
    })
}

/// Run every enabled route, write artifacts, cross-validate.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    run_inner(cfg, true)
}

fn run_inner(cfg: &ExperimentConfig, parallel_seeds: bool) -> Result<RunOutcome, CliError> {
    fs::create_dir_all(&cfg.output_dir).map_err(|e| CliError::io(&cfg.output_dir, e))?;
    let grid = cfg.grid_points();
    let scenario_name = cfg.scenario.to_string();
    let intermediate_pump = cfg.params.p > 0.0 && cfg.params.p < 1.0;

    let mut report = CompareReport {
        scenario: scenario_name.clone(),
        ..CompareReport::default()
    };
    let steady_info = steady(cfg)?;
    for msg in steady_info.warnings.messages() {
        report.warnings.push(msg);
    }

    let mut analytic_out: Option<SpectrumCurve> = None;
    let mut engine_out: Option<SpectrumCurve> = None;
    let mut mc_out: Option<McOutput> = None;

    for route in &cfg.routes {
        match route {
            Route::Analytic => {
                let curve = analytic_curve(cfg, &grid)?;
                write_route_csv(cfg, &scenario_name, "analytic", &curve)?;
                analytic_out = Some(curve);
            }
            Route::Engine => {
                let curve = engine_curve(cfg, &grid)?;
                for w in &curve.meta.warnings {
                    report.warnings.push(format!("engine: {w}"));
                }
                write_route_csv(cfg, &scenario_name, "engine", &curve)?;
                engine_out = Some(curve);
            }
            Route::Simulate => {
                let output = mc_curve(cfg, parallel_seeds)?;
                for w in &output.warnings {
                    report.warnings.push(format!("simulate: {w}"));
                }
                write_route_csv(cfg, &scenario_name, "simulate", &output.curve)?;
                mc_out = Some(output);
            }
        }
    }

    if let (Some(engine), Some(analytic)) = (&engine_out, &analytic_out) {
        report.comparisons.push(compare_curves(
            "engine vs analytic",
            engine,
            analytic,
            Tolerances {
                max_rel: Some(cfg.compare.tolerance_rel),
                ..Tolerances::default()
            },
        )?);
    }

    // Strong-feedback, strong-coupling limit curve: a hard 5% gate deep in
    // the asymptotic regime, an informational row at moderate parameters.
    if cfg.scenario == ScenarioKind::CoupledFbl
        && cfg.params.p == 0.0
        && cfg.params.lambda >= 10.0
        && cfg.params.kappa0_over_kappa >= 10.0
        && let Some(curve) = analytic_out.as_ref().or(engine_out.as_ref())
    {
        let limit = shotspec_core::analytic::s_strong_limit(cfg.params.kappa0_over_kappa, &grid)?;
        let asymptotic = cfg.params.lambda >= 1e3 && cfg.params.kappa0_over_kappa >= 1e3;
        let mut cmp = compare_curves(
            "spectrum vs strong-coupling limit curve",
            curve,
            &limit,
            Tolerances {
                max_rel: asymptotic.then_some(0.05),
                ..Tolerances::default()
            },
        )?;
        cmp.informational = !asymptotic;
        if !asymptotic {
            cmp.notes.push(
                "finite-gain and finite-coupling corrections expected below lambda, x = 1e3"
                    .to_string(),
            );
        }
        report.comparisons.push(cmp);
    }

    if mc_out.is_some() && intermediate_pump {
        report
            .warnings
            .push("intermediate-p: low-frequency check only".to_string());
    }

    if let Some(mc) = &mc_out {
        let mc_grid = mc.curve.omega();
        let gate_band = intermediate_pump.then_some(1.0);
        let note_intermediate =
            "intermediate-p: renewal pump matches the closed forms at low frequency; gate \
             restricted to omega <= 1";

        // The reference the event-level run is gated against: for the
        // feedback loop the exact finite-bandwidth loop response, otherwise
        // the closed form (or the engine when the closed form is disabled).
        if cfg.scenario == ScenarioKind::Fbl {
            let filtered = fbl_filtered_model(
                cfg.params.p,
                cfg.params.lambda,
                cfg.sim.filter_bandwidth,
                &steady_info,
            )?
            .psd_curve(mc_grid)?;
            write_route_csv(cfg, &scenario_name, "engine-filtered", &filtered)?;
            let mut cmp = compare_curves(
                "simulate vs engine-filtered (finite loop bandwidth)",
                &mc.curve,
                &filtered,
                Tolerances {
                    max_abs: Some(cfg.compare.tolerance_abs),
                    ci_coverage_min: Some(cfg.compare.ci_coverage_min),
                    gate_band_max: gate_band,
                    ..Tolerances::default()
                },
            )?;
            if intermediate_pump {
                cmp.notes.push(note_intermediate.to_string());
            }
            if mc.max_clipped_fraction > 0.0 {
                cmp.notes.push(format!(
                    "pump rate clipped for {:.3}% of the run",
                    mc.max_clipped_fraction * 100.0
                ));
            }
            report.comparisons.push(cmp);
        }

        let reference_name = if analytic_out.is_some() {
            Some("analytic")
        } else if engine_out.is_some() {
            Some("engine")
        } else {
            None
        };
        if let Some(name) = reference_name {
            let reference_on_mc_grid = resample_reference(cfg, mc_grid)?;
            let mut cmp = compare_curves(
                format!("simulate vs {name}"),
                &mc.curve,
                &reference_on_mc_grid,
                Tolerances {
                    max_abs: Some(cfg.compare.tolerance_abs),
                    ci_coverage_min: Some(cfg.compare.ci_coverage_min),
                    gate_band_max: gate_band,
                    ..Tolerances::default()
                },
            )?;
            if cfg.scenario == ScenarioKind::Fbl {
                // The ideal loop responds instantaneously; the simulated
                // loop cannot. Report, do not gate.
                cmp.informational = true;
                cmp.notes.push(format!(
                    "ideal instantaneous loop: expect O(kappa/filter_bandwidth) deviation near \
                     the band edge (filter_bandwidth = {})",
                    cfg.sim.filter_bandwidth
                ));
            }
            if intermediate_pump {
                cmp.notes.push(note_intermediate.to_string());
            }
            report.comparisons.push(cmp);
        }
    }

    let report_path = cfg.output_dir.join("report.txt");
    fs::write(&report_path, report.render()).map_err(|e| CliError::io(&report_path, e))?;

    Ok(RunOutcome {
        passed: report.passed(),
        out_dir: cfg.output_dir.clone(),
        report,
    })
}

/// Closed-form (preferred) or engine reference evaluated on the estimator's
/// grid, for comparing against the event-level route.
fn resample_reference(cfg: &ExperimentConfig, grid: &[f64]) -> Result<SpectrumCurve, CliError> {
    if cfg.routes.contains(&Route::Analytic) {
        analytic_curve(cfg, grid)
    } else {
        engine_curve(cfg, grid)
    }
}

fn write_route_csv(
    cfg: &ExperimentConfig,
    scenario: &str,
    route: &str,
    curve: &SpectrumCurve,
) -> Result<(), CliError> {
    let path = cfg.output_dir.join(format!("{scenario}_{route}.csv"));
    csvio::write_spectrum(&path, curve, scenario, route)?;
    let plot = cfg.output_dir.join(format!("{scenario}_{route}.dat"));
    csvio::write_plot(&plot, curve, scenario, route)
}

/// Run every sweep point concurrently, each into its own subdirectory.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<(f64, RunOutcome)>, CliError> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::config("sweep subcommand requires a [sweep] section"))?;
    let points: Vec<ExperimentConfig> = sweep
        .values
        .iter()
        .map(|&value| {
            let mut point = cfg.with_sweep_value(&sweep.parameter, value);
            point.output_dir = cfg
                .output_dir
                .join(format!("{}={}", sweep.parameter, value));
            point
        })
        .collect();

    let results: Vec<Result<RunOutcome, CliError>> = thread::scope(|scope| {
        let handles: Vec<_> = points
            .iter()
            .map(|point| scope.spawn(move || run_inner(point, false)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });

    let mut outcomes = Vec::with_capacity(results.len());
    for (value, result) in sweep.values.iter().zip(results) {
        outcomes.push((*value, result?));
    }
    Ok(outcomes)
}

/// Text summary of the steady state (and the self-consistent coherent-pump
/// rate when a three-level block is configured).
pub fn steady_report(cfg: &ExperimentConfig) -> Result<String, CliError> {
    use std::fmt::Write as _;

    let laser = laser_params(cfg);
    let coupling = match (&cfg.three_level, cfg.scenario.is_coupled()) {
        (Some(tl), _) => {
            let tl = shotspec_core::params::ThreeLevelParams {
                kappa_tilde: tl.kappa_tilde,
                gamma2_tilde: tl.gamma2_tilde,
                gamma1_tilde: tl.gamma1_tilde,
                dipole_ratio: tl.dipole_ratio,
                atom_count: tl.atom_count,
            };
            Some((shotspec_core::params::solve_kappa0(&laser, &tl)?, Some(tl)))
        }
        (None, true) => Some((
            CouplingParams::new(
                cfg.params.kappa0_over_kappa,
                cfg.params.kappa_tilde_over_kappa,
                1.0,
            ),
            None,
        )),
        (None, false) => None,
    };

    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", cfg.scenario);
    let _ = writeln!(out, "kappa = 1 (rate unit)");
    let _ = writeln!(out, "pump_rate = {}", laser.pump_rate);
    let _ = writeln!(out, "pump_regularity = {}", laser.pump_regularity);
    let coupling_ref = match &coupling {
        Some((c, from_three_level)) => {
            if from_three_level.is_some() {
                let _ = writeln!(out, "solved kappa0 = {} (ratio x = {})", c.kappa0, c.ratio);
            } else {
                let _ = writeln!(out, "kappa0 = {} (ratio x = {})", c.kappa0, c.ratio);
            }
            if let Some(tl) = from_three_level
                && tl.gamma2_tilde > tl.gamma1_tilde / 10.0
            {
                let _ = writeln!(
                    out,
                    "warning: incoherent pump rate not << spontaneous rate (gamma2_tilde > gamma1_tilde/10)"
                );
            }
            Some(c)
        }
        None => None,
    };
    let ss = steady_state(&laser, coupling_ref)?;
    let _ = writeln!(out, "photon_number            = {}", ss.photon_number);
    let _ = writeln!(out, "photon_number_measuring  = {}", ss.photon_number_measuring);
    let _ = writeln!(out, "power (dimensionless)    = {}", ss.power);
    let _ = writeln!(out, "pop_upper                = {}", ss.pop_upper);
    let _ = writeln!(out, "pop_lower                = {}", ss.pop_lower);
    let _ = writeln!(out, "gain_flux                = {}", ss.gain_flux);
    let _ = writeln!(out, "mean_current             = {}", ss.mean_current);
    let _ = writeln!(out, "mean_current_measuring   = {}", ss.mean_current_measuring);
    let warnings = ss.warnings.messages();
    if warnings.is_empty() {
        let _ = writeln!(out, "warnings: none");
    } else {
        let _ = writeln!(out, "warnings:");
        for w in warnings {
            let _ = writeln!(out, "  - {w}");
        }
    }
    Ok(out)
}
