//! Filesystem-level behaviour of the runner: artifact round-trips,
//! determinism of serialized outputs, and refusal rules.

use std::fs;
use std::path::PathBuf;

use shotspec_cli::config::ExperimentConfig;
use shotspec_cli::{csvio, runner, CliError};

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("shotspec-test-{}-{tag}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn mc_config(tag: &str) -> ExperimentConfig {
    let text = format!(
        "scenario = single\nroutes = analytic, engine, simulate\n\
         [params]\np = 1.0\nR_over_kappa = 1e3\n\
         [sim]\nduration = 700\nwarmup = 100\nseed = 7\nseeds = 2\nsave_events = true\n\
         [welch]\nsegment_length = 512\nmin_segments = 32\nband_min = 0.2\nband_max = 10\nlog_bins = 24\n\
         [compare]\ntolerance_abs = 0.25\n\
         [output]\ndir = {}\n",
        temp_dir(tag).display()
    );
    ExperimentConfig::parse(&text).unwrap()
}

#[test]
fn emitted_csv_reparses_identically() {
    let cfg = mc_config("reparse");
    let outcome = runner::run(&cfg).unwrap();
    assert!(outcome.passed, "{}", outcome.report.render());
    for route in ["analytic", "engine", "simulate"] {
        let path = cfg.output_dir.join(format!("single_{route}.csv"));
        let curve = csvio::read_spectrum(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        // Re-serializing the parsed curve reproduces the file byte for byte.
        let again = csvio::spectrum_to_csv(&curve, "single", route);
        assert_eq!(text, again, "route {route}");
    }
    let _ = fs::remove_dir_all(&cfg.output_dir);
}

#[test]
fn identical_config_and_seed_are_byte_identical() {
    // Identical configuration (the output directory is not embedded in any
    // artifact), so every file must come out byte-identical.
    let cfg_a = mc_config("det-a");
    let cfg_b = mc_config("det-b");
    let out_a = runner::run(&cfg_a).unwrap();
    let out_b = runner::run(&cfg_b).unwrap();
    assert!(out_a.passed && out_b.passed);
    let mut names: Vec<String> = fs::read_dir(&cfg_a.output_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(names.iter().any(|n| n.contains("events_seed7")));
    for name in &names {
        let a = fs::read(cfg_a.output_dir.join(name)).unwrap();
        let b = fs::read(cfg_b.output_dir.join(name)).unwrap();
        assert_eq!(a, b, "file {name} differs between identical runs");
    }
    let _ = fs::remove_dir_all(&cfg_a.output_dir);
    let _ = fs::remove_dir_all(&cfg_b.output_dir);
}

#[test]
fn different_seed_changes_the_mc_artifact() {
    let mut cfg_a = mc_config("seed-a");
    let mut cfg_b = mc_config("seed-b");
    cfg_a.sim.save_events = false;
    cfg_b.sim.save_events = false;
    cfg_b.sim.seed = 8;
    let _ = runner::run(&cfg_a).unwrap();
    let _ = runner::run(&cfg_b).unwrap();
    let a = fs::read(cfg_a.output_dir.join("single_simulate.csv")).unwrap();
    let b = fs::read(cfg_b.output_dir.join("single_simulate.csv")).unwrap();
    assert_ne!(a, b);
    // The deterministic routes are untouched by the seed.
    let a = fs::read(cfg_a.output_dir.join("single_analytic.csv")).unwrap();
    let b = fs::read(cfg_b.output_dir.join("single_analytic.csv")).unwrap();
    assert_eq!(a, b);
    let _ = fs::remove_dir_all(&cfg_a.output_dir);
    let _ = fs::remove_dir_all(&cfg_b.output_dir);
}

#[test]
fn saved_events_reload_and_rebin() {
    let cfg = mc_config("events");
    let _ = runner::run(&cfg).unwrap();
    let path = cfg.output_dir.join("single_events_seed7.txt");
    let train = csvio::read_events(&path).unwrap();
    assert_eq!(train.meta().seed, 7);
    assert_eq!(train.t_end(), 600.0);
    assert!(train.len() > 500_000);
    let binned = shotspec_core::estimator::bin_events(&train, cfg.sim.bin_dt).unwrap();
    assert_eq!(binned.total(), train.len() as u64);
    let _ = fs::remove_dir_all(&cfg.output_dir);
}

#[test]
fn sweep_writes_one_directory_per_point() {
    let dir = temp_dir("sweep");
    let text = format!(
        "scenario = fbl\nroutes = analytic, engine\n\
         [params]\np = 0.0\n\
         [sweep]\nparameter = lambda\nvalues = 0, 1, 9\n\
         [output]\ndir = {}\n",
        dir.display()
    );
    let cfg = ExperimentConfig::parse(&text).unwrap();
    let outcomes = runner::run_sweep(&cfg).unwrap();
    assert_eq!(outcomes.len(), 3);
    for (value, outcome) in &outcomes {
        assert!(outcome.passed, "lambda={value}");
        assert!(outcome.out_dir.join("fbl_engine.csv").exists());
    }
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn grid_mismatch_is_an_error_in_file_compare() {
    let dir = temp_dir("mismatch");
    let grid_a = shotspec_core::curve::linear_grid(0.0, 10.0, 32);
    let grid_b = shotspec_core::curve::linear_grid(0.0, 10.0, 33);
    let a = shotspec_core::analytic::s_single(0.0, &grid_a).unwrap();
    let b = shotspec_core::analytic::s_single(0.0, &grid_b).unwrap();
    let path_a = dir.join("a.csv");
    let path_b = dir.join("b.csv");
    csvio::write_spectrum(&path_a, &a, "single", "analytic").unwrap();
    csvio::write_spectrum(&path_b, &b, "single", "analytic").unwrap();
    let curve_a = csvio::read_spectrum(&path_a).unwrap();
    let curve_b = csvio::read_spectrum(&path_b).unwrap();
    let err = shotspec_cli::report::compare_curves(
        "a vs b",
        &curve_a,
        &curve_b,
        shotspec_cli::report::Tolerances::default(),
    );
    assert!(matches!(
        err,
        Err(CliError::Core(shotspec_core::Error::GridMismatch))
    ));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn strong_limit_row_appears_for_strong_coupled_fbl() {
    let dir = temp_dir("limit");
    let text = format!(
        "scenario = coupled-fbl\nroutes = analytic, engine\n\
         [params]\np = 0.0\nlambda = 1000\nkappa0_over_kappa = 1000\nR_over_kappa = 1e6\n\
         [grid]\npoints = 128\nomega_min = 0.01\nomega_max = 10\n\
         [output]\ndir = {}\n",
        dir.display()
    );
    let cfg = ExperimentConfig::parse(&text).unwrap();
    let outcome = runner::run(&cfg).unwrap();
    assert!(outcome.passed, "{}", outcome.report.render());
    let limit_row = outcome
        .report
        .comparisons
        .iter()
        .find(|c| c.name.contains("strong-coupling limit"))
        .expect("limit comparison present");
    assert!(!limit_row.informational);
    assert!(limit_row.max_rel_dev <= 0.05);
    // Plot companions land next to the CSVs.
    assert!(dir.join("coupled-fbl_engine.dat").exists());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn intermediate_pump_is_flagged_even_without_references() {
    let dir = temp_dir("intermediate");
    let text = format!(
        "scenario = fbl\nroutes = simulate\n\
         [params]\np = 0.5\nlambda = 3.0\nR_over_kappa = 1e3\n\
         [sim]\nduration = 700\nwarmup = 100\nseed = 3\nseeds = 1\n\
         [welch]\nsegment_length = 512\nmin_segments = 32\nband_min = 0.2\nband_max = 10\nlog_bins = 24\n\
         [output]\ndir = {}\n",
        dir.display()
    );
    let cfg = ExperimentConfig::parse(&text).unwrap();
    let outcome = runner::run(&cfg).unwrap();
    assert!(outcome.passed);
    assert!(
        outcome
            .report
            .warnings
            .iter()
            .any(|w| w.contains("intermediate-p")),
        "{}",
        outcome.report.render()
    );
    // The filtered-loop gate still applies and carries the restricted band.
    let gated = outcome
        .report
        .comparisons
        .iter()
        .find(|c| c.name.contains("engine-filtered"))
        .expect("filtered reference row present");
    assert_eq!(gated.tolerances.gate_band_max, Some(1.0));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn refusal_rules_surface_through_config_validation() {
    // Route/scenario rule.
    let err = ExperimentConfig::parse(
        "scenario = coupled-fbl\nroutes = simulate\n[params]\nkappa0_over_kappa = 10\n",
    )
    .unwrap_err();
    assert!(err.to_string().contains("single and fbl"), "{err}");
    // Coupling strength rule.
    let err = ExperimentConfig::parse("scenario = coupled\nroutes = engine\n").unwrap_err();
    assert!(err.to_string().contains("kappa0_over_kappa"), "{err}");
}
