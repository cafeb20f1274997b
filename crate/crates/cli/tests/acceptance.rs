//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line with its measured figures (run with `--nocapture` to see
//! them). Tolerances are pinned here, not configurable.
//!
//! The Monte Carlo criteria use the full desk-scale budget (pump rate 1e4,
//! measurement span 2e4, eight seeds merged) and take a couple of minutes of
//! CPU; everything else is sub-second.

use std::fs;
use std::path::PathBuf;
use std::thread;
use std::time::Instant;

use shotspec_cli::config::ExperimentConfig;
use shotspec_cli::runner;
use shotspec_core::analytic;
use shotspec_core::curve::{deviation, linear_grid, SpectrumCurve};
use shotspec_core::engine::{build_model, Scenario, ScenarioSpec};
use shotspec_core::estimator::{
    estimate_spectrum, merge_trajectories, BinAccumulator, Window, WelchConfig, DEFAULT_BIN_DT,
};
use shotspec_core::params::{
    solve_kappa0, steady_state, CouplingParams, FeedbackParams, LaserParams, ThreeLevelParams,
};
use shotspec_core::sim::{simulate_into, SimConfig, SimRng};

const MC_PUMP_RATE: f64 = 1e4;
const MC_SPAN: f64 = 2e4;
const MC_WARMUP: f64 = 200.0;
const MC_SEEDS: u64 = 8;
const MC_FILTER_BANDWIDTH: f64 = 50.0;

fn mc_welch(band_max: f64) -> WelchConfig {
    WelchConfig {
        segment_length: 16384,
        overlap: 0.5,
        window: Window::Hann,
        min_segments: 64,
        band: (0.045, band_max),
        log_bins: Some(96),
    }
}

/// Eight-seed merged spectrum of the simulated scenario.
fn mc_spectrum(pump_regularity: f64, fbl: Option<FeedbackParams>, band_max: f64) -> SpectrumCurve {
    let laser = LaserParams::new(1.0, MC_PUMP_RATE, pump_regularity);
    let welch = mc_welch(band_max);
    let curves: Vec<SpectrumCurve> = thread::scope(|scope| {
        let handles: Vec<_> = (1..=MC_SEEDS)
            .map(|seed| {
                let laser = laser.clone();
                let fbl = fbl.clone();
                let welch = welch.clone();
                scope.spawn(move || {
                    let mut cfg = SimConfig::new(MC_WARMUP + MC_SPAN, seed);
                    cfg.warmup = MC_WARMUP;
                    let mut acc = BinAccumulator::new(DEFAULT_BIN_DT, MC_SPAN).unwrap();
                    simulate_into(&laser, fbl.as_ref(), &cfg, |t| acc.push(t)).unwrap();
                    estimate_spectrum(&acc.into_counts(), &welch).unwrap()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    merge_trajectories(&curves).unwrap()
}

#[test]
fn criterion_1_engine_oracle_equivalence() {
    let start = Instant::now();
    let grid = linear_grid(0.0, 20.0, 512);
    let tolerance = 1e-9;
    let mut worst = 0.0f64;
    let mut check = |engine: &SpectrumCurve, oracle: &SpectrumCurve, what: &str| {
        let dev = deviation(engine, oracle).unwrap();
        worst = worst.max(dev.max_rel);
        assert!(
            dev.max_rel <= tolerance,
            "{what}: relative deviation {} at omega={}",
            dev.max_rel,
            dev.omega_at_rel
        );
    };

    for p in [-1.0, 0.0, 0.5, 1.0] {
        let steady = steady_state(&LaserParams::new(1.0, 1e4, p), None).unwrap();

        let spec = ScenarioSpec::new(Scenario::Single { pump_regularity: p });
        let engine = build_model(&spec, &steady).unwrap().psd_curve(&grid).unwrap();
        check(&engine, &analytic::s_single(p, &grid).unwrap(), &format!("single p={p}"));

        for lambda in [0.0, 1.0, 9.0, 1e3] {
            let spec = ScenarioSpec::new(Scenario::Fbl {
                pump_regularity: p,
                efficiency: lambda,
            });
            let engine = build_model(&spec, &steady).unwrap().psd_curve(&grid).unwrap();
            check(
                &engine,
                &analytic::s_fbl(p, lambda, &grid).unwrap(),
                &format!("fbl p={p} lambda={lambda}"),
            );
        }

        for (kappa_tilde, kappa0) in [(1.0, 1.0), (1.0, 100.0), (2.0, 1e4), (0.5, 37.0)] {
            let laser = LaserParams::new(1.0, 1e4, p);
            let coupling = CouplingParams::new(kappa0, kappa_tilde, 1.0);
            let steady = steady_state(&laser, Some(&coupling)).unwrap();
            let spec = ScenarioSpec::new(Scenario::Coupled {
                pump_regularity: p,
                kappa: 1.0,
                kappa_tilde,
                kappa0,
            });
            let engine = build_model(&spec, &steady).unwrap().psd_curve(&grid).unwrap();
            check(
                &engine,
                &analytic::s_coupled(p, 1.0, kappa_tilde, kappa0, &grid).unwrap(),
                &format!("coupled p={p} kt={kappa_tilde} k0={kappa0}"),
            );
        }
    }

    for lambda in [0.0, 1.0, 9.0, 1e3] {
        for (kappa_tilde, kappa0) in [(1.0, 10.0), (1.0, 1e3), (0.5, 42.0)] {
            let laser = LaserParams::new(1.0, 1e4, 0.0);
            let coupling = CouplingParams::new(kappa0, kappa_tilde, 1.0);
            let steady = steady_state(&laser, Some(&coupling)).unwrap();
            let spec = ScenarioSpec::new(Scenario::CoupledFbl {
                pump_regularity: 0.0,
                efficiency: lambda,
                kappa: 1.0,
                kappa_tilde,
                kappa0,
            });
            let engine = build_model(&spec, &steady).unwrap().psd_curve(&grid).unwrap();
            check(
                &engine,
                &analytic::s_coupled_fbl_general(lambda, 1.0, kappa_tilde, kappa0, &grid).unwrap(),
                &format!("coupled-fbl lambda={lambda} kt={kappa_tilde} k0={kappa0}"),
            );
        }
    }

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "criterion 1 took {elapsed:.2}s, budget 1s");
    println!(
        "criterion 1: PASS (engine matches all closed forms, worst rel dev {worst:.2e}, {elapsed:.3}s)"
    );
}

#[test]
fn criterion_2_strong_coupling_collapse() {
    let start = Instant::now();
    let grid = linear_grid(0.0, 20.0, 512);
    let mut worst_ratio = 0.0f64;
    for p in [0.0, 1.0] {
        for x in [1e2, 1e3, 1e4] {
            let coupled = analytic::s_coupled(p, 1.0, 1.0, x, &grid).unwrap();
            let single = analytic::s_single(p, &grid).unwrap();
            let dev = deviation(&coupled, &single).unwrap();
            let bound = 3.0 / x;
            worst_ratio = worst_ratio.max(dev.max_abs / bound);
            assert!(
                dev.max_abs <= bound,
                "p={p} x={x}: sup deviation {} exceeds {bound}",
                dev.max_abs
            );
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "criterion 2 took {elapsed:.2}s, budget 1s");
    println!(
        "criterion 2: PASS (collapse onto the single-laser form, worst dev at {:.0}% of the 3/X bound, {elapsed:.3}s)",
        worst_ratio * 100.0
    );
}

#[test]
fn criterion_3_strong_feedback_limit() {
    let start = Instant::now();
    let grid = linear_grid(0.0, 10.0, 512);
    let exact = analytic::s_coupled_fbl(1e3, 1e3, &grid).unwrap();
    let limit = analytic::s_strong_limit(1e3, &grid).unwrap();
    let mut worst = 0.0f64;
    for ((w, a), b) in grid.iter().zip(exact.values()).zip(limit.values()) {
        let rel = (a - b).abs() / b;
        worst = worst.max(rel);
        assert!(rel <= 0.05, "omega={w}: {a} vs limit {b} ({rel:.3} relative)");
    }
    // Super-Poissonian at zero frequency across the strong-parameter range.
    for lambda in [10.0, 31.6, 100.0, 1e3] {
        for x in [10.0, 31.6, 100.0, 1e3] {
            let value = analytic::s_coupled_fbl(lambda, x, &[0.0]).unwrap().values()[0];
            assert!(value > 1.0, "lambda={lambda} x={x}: {value} not above shot");
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "criterion 3 took {elapsed:.2}s, budget 1s");
    println!(
        "criterion 3: PASS (limit matched within {:.2}% <= 5%, super-Poissonian at zero frequency, {elapsed:.3}s)",
        worst * 100.0
    );
}

#[test]
fn criterion_4_fbl_photocurrent_squeezing() {
    let start = Instant::now();
    // Closed form exactly: 1 - (p - 1 + (1+lambda)^2)/(1+lambda)^2 = 0.01.
    let closed = analytic::s_fbl(0.0, 9.0, &[0.0]).unwrap().values()[0];
    assert!((closed - 0.01).abs() < 1e-15, "closed form {closed}");

    let est = mc_spectrum(
        0.0,
        Some(FeedbackParams {
            efficiency: 9.0,
            filter_bandwidth: MC_FILTER_BANDWIDTH,
        }),
        10.0,
    );
    let lowest_omega = est.omega()[0];
    let lowest = est.values()[0];
    assert!(
        lowest_omega < 0.05,
        "lowest analysis frequency {lowest_omega} not below 0.05"
    );
    assert!(
        (lowest - 0.01).abs() <= 0.05,
        "Monte Carlo at omega={lowest_omega}: {lowest} vs closed form 0.01"
    );
    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "criterion 4: PASS (closed form 0.01 exact; Monte Carlo {lowest:.4} at omega={lowest_omega:.4}, |dev| <= 0.05, {elapsed:.0}s)"
    );
}

#[test]
fn criterion_5_single_laser_monte_carlo() {
    let start = Instant::now();

    // Poissonian pump: flat shot floor, judged by confidence coverage.
    let flat = mc_spectrum(0.0, None, 20.0);
    let lo = flat.ci_low().unwrap();
    let hi = flat.ci_high().unwrap();
    let covered = lo
        .iter()
        .zip(hi)
        .filter(|(l, h)| **l <= 1.0 && 1.0 <= **h)
        .count();
    let coverage = covered as f64 / flat.len() as f64;
    assert!(
        coverage >= 0.9,
        "p=0: shot floor inside the 95% CI at only {:.1}% of grid points",
        coverage * 100.0
    );

    // Regular pump: the Lorentzian dip within 0.05 absolute.
    let dip = mc_spectrum(1.0, None, 10.0);
    let reference = analytic::s_single(1.0, dip.omega()).unwrap();
    let mut worst = 0.0f64;
    for ((w, v), r) in dip.omega().iter().zip(dip.values()).zip(reference.values()) {
        let dev = (v - r).abs();
        worst = worst.max(dev);
        assert!(dev <= 0.05, "p=1 omega={w}: {v} vs {r}");
    }
    let lowest = dip.values()[0];
    assert!(lowest <= 0.1, "p=1 lowest analysis frequency: {lowest}");

    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "criterion 5: PASS (p=0 coverage {:.1}% >= 90%; p=1 dip within {worst:.3} <= 0.05, lowest bin {lowest:.4} <= 0.1, {elapsed:.0}s)",
        coverage * 100.0
    );
}

#[test]
fn criterion_6_poisson_calibration() {
    use rand::SeedableRng;
    use shotspec_core::sim::sample_pump_interval;

    let start = Instant::now();
    // Ten million events at rate 1e3 over a span of 1e4: a homogeneous
    // Poisson train drawn through the pump sampler at regularity 0.
    let rate = 1e3;
    let span = 1e4;
    let mut rng = SimRng::seed_from_u64(0xca11b8);
    let mut acc = BinAccumulator::new(DEFAULT_BIN_DT, span).unwrap();
    let mut t = 0.0;
    let mut events = 0u64;
    loop {
        t += sample_pump_interval(0.0, rate, &mut rng).unwrap();
        if t >= span {
            break;
        }
        acc.push(t);
        events += 1;
    }
    assert!(events > 9_900_000, "only {events} events generated");

    let cfg = WelchConfig {
        segment_length: 4096,
        band: (0.05, 100.0),
        ..WelchConfig::default()
    };
    let curve = estimate_spectrum(&acc.into_counts(), &cfg).unwrap();
    let n = curve.len() as f64;
    let mean: f64 = curve.values().iter().sum::<f64>() / n;
    assert!(
        (0.99..=1.01).contains(&mean),
        "grid mean {mean} outside [0.99, 1.01]"
    );

    // Least-squares slope in omega; consistent with zero.
    let omega_mean: f64 = curve.omega().iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&w, &v) in curve.omega().iter().zip(curve.values()) {
        sxx += (w - omega_mean) * (w - omega_mean);
        sxy += (w - omega_mean) * (v - mean);
    }
    let slope = sxy / sxx;
    let mut ss_res = 0.0;
    for (&w, &v) in curve.omega().iter().zip(curve.values()) {
        let fit = mean + slope * (w - omega_mean);
        ss_res += (v - fit) * (v - fit);
    }
    let slope_se = (ss_res / (n - 2.0) / sxx).sqrt();
    let t_stat = slope / slope_se;
    assert!(
        t_stat.abs() <= 4.0,
        "slope {slope:.3e} per unit frequency is significant (t = {t_stat:.2})"
    );

    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "criterion 6 took {elapsed:.1}s, budget 30s");
    println!(
        "criterion 6: PASS ({events} events, grid mean {mean:.4} in [0.99, 1.01], slope t = {t_stat:.2}, {elapsed:.1}s)"
    );
}

#[test]
fn criterion_7_steady_state_identities() {
    use rand::RngExt;
    use rand::SeedableRng;

    let start = Instant::now();
    let mut rng = SimRng::seed_from_u64(0x57ead);
    let mut worst_identity = 0.0f64;
    let mut worst_resub = 0.0f64;
    for _ in 0..1000 {
        let kappa = 10f64.powf(rng.random_range(-2.0..2.0));
        let pump = kappa * 10f64.powf(rng.random_range(1.0..6.0));
        let kappa_tilde = 10f64.powf(rng.random_range(-2.0..2.0));
        let lump = 10f64.powf(rng.random_range(-3.0..5.0));
        let mut laser = LaserParams::new(kappa, pump, rng.random_range(-1.0..1.0));
        laser.gamma1 = kappa;
        laser.gamma2 = kappa * 100.0;
        laser.gamma_perp = kappa * 50.5;
        let three_level = ThreeLevelParams {
            kappa_tilde,
            gamma2_tilde: lump,
            gamma1_tilde: lump * 100.0,
            dipole_ratio: 1.0,
            atom_count: 1.0,
        };
        let coupling = solve_kappa0(&laser, &three_level).unwrap();
        let steady = steady_state(&laser, Some(&coupling)).unwrap();

        let balance_lhs = steady.photon_number_measuring * kappa_tilde;
        let balance_rhs = steady.photon_number * coupling.kappa0;
        let rel = (balance_lhs - balance_rhs).abs() / balance_rhs.abs().max(f64::MIN_POSITIVE);
        worst_identity = worst_identity.max(rel);
        assert!(rel <= 1e-12, "coupling balance off by {rel:.2e}");

        let pump_balance = (kappa + coupling.kappa0) * steady.photon_number;
        let rel = (pump_balance - pump).abs() / pump;
        worst_identity = worst_identity.max(rel);
        assert!(rel <= 1e-12, "photon balance off by {rel:.2e}");

        let resub = coupling.kappa0 * steady.photon_number_measuring;
        let c = three_level.pump_lump_constant();
        let rel = (resub - c).abs() / c;
        worst_resub = worst_resub.max(rel);
        assert!(rel <= 1e-10, "coherent-pump re-substitution off by {rel:.2e}");
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "criterion 7 took {elapsed:.2}s, budget 1s");
    println!(
        "criterion 7: PASS (1000 draws, identities within {worst_identity:.2e} <= 1e-12, re-substitution within {worst_resub:.2e} <= 1e-10, {elapsed:.3}s)"
    );
}

#[test]
fn criterion_8_determinism() {
    let start = Instant::now();
    let make_cfg = |tag: &str| -> ExperimentConfig {
        let dir: PathBuf = std::env::temp_dir().join(format!(
            "shotspec-acceptance-{}-{tag}",
            std::process::id()
        ));
        let _ = fs::remove_dir_all(&dir);
        let text = format!(
            "scenario = fbl\nroutes = analytic, engine, simulate\n\
             [params]\np = 0.0\nlambda = 9.0\nR_over_kappa = 1e3\n\
             [sim]\nduration = 900\nwarmup = 100\nseed = 11\nseeds = 2\n\
             [welch]\nsegment_length = 512\nmin_segments = 32\nband_min = 0.2\nband_max = 10\nlog_bins = 24\n\
             [output]\ndir = {}\n",
            dir.display()
        );
        ExperimentConfig::parse(&text).unwrap()
    };
    let cfg_a = make_cfg("a");
    let cfg_b = make_cfg("b");
    let _ = runner::run(&cfg_a).unwrap();
    let _ = runner::run(&cfg_b).unwrap();
    let mut names: Vec<String> = fs::read_dir(&cfg_a.output_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    names.sort();
    assert!(!names.is_empty());
    for name in &names {
        let a = fs::read(cfg_a.output_dir.join(name)).unwrap();
        let b = fs::read(cfg_b.output_dir.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    let _ = fs::remove_dir_all(&cfg_a.output_dir);
    let _ = fs::remove_dir_all(&cfg_b.output_dir);
    let elapsed = start.elapsed().as_secs_f64();
    println!(
        "criterion 8: PASS ({} CSVs byte-identical across repeated runs, {elapsed:.1}s)",
        names.len()
    );
}
