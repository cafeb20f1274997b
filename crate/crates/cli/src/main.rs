//! `shotspec` — shot-normalized photocurrent noise spectra, three ways.
//!
//! Subcommands:
//!   analytic | engine | simulate   run one computation route from a config
//!   compare --config FILE          run all enabled routes and cross-validate
//!   compare A.csv B.csv            compare two serialized curves
//!   steady                         print the semiclassical operating point
//!   sweep                          run the [sweep] section, one directory per point
//!
//! Exit codes: 0 success / comparisons passed, 1 a gated comparison failed,
//! 2 usage, configuration or i/o error.

use std::path::PathBuf;
use std::process::ExitCode;

use shotspec_cli::config::{ExperimentConfig, Route};
use shotspec_cli::report::{compare_curves, Tolerances};
use shotspec_cli::runner;
use shotspec_cli::{csvio, CliError};

const USAGE: &str = "\
usage: shotspec <subcommand> [options] [files]

subcommands:
  analytic   --config FILE     closed-form spectra only
  engine     --config FILE     linear-response engine only
  simulate   --config FILE     event-level Monte Carlo only
  compare    --config FILE     all routes enabled in the config, cross-validated
  compare A.csv B.csv          compare two curve files on a shared grid
  steady     --config FILE     semiclassical operating point (and coherent-pump
                               rate when a [threelevel] section is present)
  sweep      --config FILE     run every value in the [sweep] section

options:
  --config FILE   experiment configuration (required except for file compare)
  --seed N        override [sim] seed
  --out DIR       override [output] dir
  --grid N,LO,HI  override [grid]: N log-spaced points on [LO, HI] (plus 0)
  --tol-abs X     file compare: gate on max absolute deviation
  --tol-rel X     file compare: gate on max relative deviation

exit codes: 0 pass, 1 comparison failure, 2 configuration error
";

struct Args {
    subcommand: String,
    config: Option<PathBuf>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    grid: Option<(usize, f64, f64)>,
    tol_abs: Option<f64>,
    tol_rel: Option<f64>,
    files: Vec<PathBuf>,
}

fn parse_args(argv: &[String]) -> Result<Args, CliError> {
    let mut args = Args {
        subcommand: argv
            .first()
            .cloned()
            .ok_or_else(|| CliError::Usage("missing subcommand".into()))?,
        config: None,
        seed: None,
        out: None,
        grid: None,
        tol_abs: None,
        tol_rel: None,
        files: Vec::new(),
    };
    let mut it = argv[1..].iter();
    while let Some(arg) = it.next() {
        let mut value_for = |name: &str| -> Result<String, CliError> {
            it.next()
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("{name} requires a value")))
        };
        match arg.as_str() {
            "--config" => args.config = Some(PathBuf::from(value_for("--config")?)),
            "--seed" => {
                let v = value_for("--seed")?;
                args.seed = Some(v.parse().map_err(|_| {
                    CliError::Usage(format!("--seed expects a non-negative integer, got `{v}`"))
                })?);
            }
            "--out" => args.out = Some(PathBuf::from(value_for("--out")?)),
            "--grid" => {
                let v = value_for("--grid")?;
                let parts: Vec<&str> = v.split(',').collect();
                let parsed = (|| -> Option<(usize, f64, f64)> {
                    if parts.len() != 3 {
                        return None;
                    }
                    Some((
                        parts[0].trim().parse().ok()?,
                        parts[1].trim().parse().ok()?,
                        parts[2].trim().parse().ok()?,
                    ))
                })();
                args.grid = Some(parsed.ok_or_else(|| {
                    CliError::Usage(format!("--grid expects N,LO,HI, got `{v}`"))
                })?);
            }
            "--tol-abs" => {
                let v = value_for("--tol-abs")?;
                args.tol_abs = Some(v.parse().map_err(|_| {
                    CliError::Usage(format!("--tol-abs expects a number, got `{v}`"))
                })?);
            }
            "--tol-rel" => {
                let v = value_for("--tol-rel")?;
                args.tol_rel = Some(v.parse().map_err(|_| {
                    CliError::Usage(format!("--tol-rel expects a number, got `{v}`"))
                })?);
            }
            other if other.starts_with('-') => {
                return Err(CliError::Usage(format!("unknown option `{other}`")));
            }
            file => args.files.push(PathBuf::from(file)),
        }
    }
    Ok(args)
}

fn load_config(args: &Args) -> Result<ExperimentConfig, CliError> {
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("this subcommand requires --config FILE".into()))?;
    let mut cfg = ExperimentConfig::from_file(path)?;
    if let Some(seed) = args.seed {
        cfg.sim.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if let Some((points, lo, hi)) = args.grid {
        cfg.grid.points = points;
        cfg.grid.omega_min = lo;
        cfg.grid.omega_max = hi;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn single_route(args: &Args, route: Route) -> Result<bool, CliError> {
    let mut cfg = load_config(args)?;
    cfg.routes = vec![route];
    cfg.validate()?;
    let outcome = runner::run(&cfg)?;
    print!("{}", outcome.report.render());
    println!("artifacts in {}", outcome.out_dir.display());
    Ok(outcome.passed)
}

fn compare_files(args: &Args) -> Result<bool, CliError> {
    let (a, b) = match args.files.as_slice() {
        [a, b] => (a, b),
        _ => {
            return Err(CliError::Usage(
                "file compare expects exactly two CSV paths".into(),
            ));
        }
    };
    let curve_a = csvio::read_spectrum(a)?;
    let curve_b = csvio::read_spectrum(b)?;
    let tolerances = Tolerances {
        max_abs: args.tol_abs,
        max_rel: args.tol_rel.or(if args.tol_abs.is_none() {
            Some(1e-9)
        } else {
            None
        }),
        ci_coverage_min: curve_a.ci_low().is_some().then_some(0.9),
        gate_band_max: None,
    };
    let cmp = compare_curves(
        format!("{} vs {}", a.display(), b.display()),
        &curve_a,
        &curve_b,
        tolerances,
    )?;
    let passed = cmp.passed;
    let report = shotspec_cli::report::CompareReport {
        scenario: curve_a.meta.label.clone(),
        comparisons: vec![cmp],
        warnings: Vec::new(),
    };
    print!("{}", report.render());
    Ok(passed)
}

fn dispatch(args: &Args) -> Result<bool, CliError> {
    match args.subcommand.as_str() {
        "analytic" => single_route(args, Route::Analytic),
        "engine" => single_route(args, Route::Engine),
        "simulate" => single_route(args, Route::Simulate),
        "compare" => {
            if args.config.is_some() {
                let cfg = load_config(args)?;
                let outcome = runner::run(&cfg)?;
                print!("{}", outcome.report.render());
                println!("artifacts in {}", outcome.out_dir.display());
                Ok(outcome.passed)
            } else {
                compare_files(args)
            }
        }
        "steady" => {
            let cfg = load_config(args)?;
            print!("{}", runner::steady_report(&cfg)?);
            Ok(true)
        }
        "sweep" => {
            let cfg = load_config(args)?;
            let outcomes = runner::run_sweep(&cfg)?;
            let mut all_passed = true;
            for (value, outcome) in &outcomes {
                println!(
                    "sweep point {} = {}: {} ({})",
                    cfg.sweep.as_ref().expect("validated").parameter,
                    value,
                    if outcome.passed { "PASS" } else { "FAIL" },
                    outcome.out_dir.display()
                );
                all_passed &= outcome.passed;
            }
            Ok(all_passed)
        }
        other => Err(CliError::Usage(format!("unknown subcommand `{other}`"))),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let args = match parse_args(&argv) {
        Ok(args) => args,
        Err(err) => {
            eprintln!("{err}");
            eprint!("{USAGE}");
            return ExitCode::from(2);
        }
    };
    match dispatch(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("{err}");
            if matches!(err, CliError::Usage(_)) {
                eprint!("{USAGE}");
            }
            ExitCode::from(2)
        }
    }
}
