//! Experiment configuration: a flat, sectioned, plain-text key-value format
//! chosen so run records diff cleanly. Unknown sections and keys are
//! rejected with the offending line number, as are duplicate keys.
//!
//! ```text
//! scenario = fbl                 # single | fbl | coupled | coupled-fbl
//! routes = analytic, engine      # subset of {analytic, engine, simulate}
//!
//! [params]
//! p = 0.0
//! lambda = 9.0
//! ```
//!
//! Every key except `scenario` has a default; the full schema is documented
//! in the project README and mirrored by `ExperimentConfig::default_with`.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use shotspec_core::estimator::{Window, DEFAULT_BIN_DT};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ScenarioKind {
    Single,
    Fbl,
    Coupled,
    CoupledFbl,
}

impl ScenarioKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::Single => "single",
            ScenarioKind::Fbl => "fbl",
            ScenarioKind::Coupled => "coupled",
            ScenarioKind::CoupledFbl => "coupled-fbl",
        }
    }

    pub fn is_coupled(&self) -> bool {
        matches!(self, ScenarioKind::Coupled | ScenarioKind::CoupledFbl)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Route {
    Analytic,
    Engine,
    Simulate,
}

impl Route {
    pub fn as_str(&self) -> &'static str {
        match self {
            Route::Analytic => "analytic",
            Route::Engine => "engine",
            Route::Simulate => "simulate",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorChoice {
    Exciting,
    Measuring,
}

/// Physical parameters, all in units of the exciting laser's mode width.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamsSection {
    pub p: f64,
    pub lambda: f64,
    pub kappa0_over_kappa: f64,
    pub kappa_tilde_over_kappa: f64,
    pub r_over_kappa: f64,
    pub detector: DetectorChoice,
}

/// Optional three-level medium block used by the `steady` subcommand to
/// solve the coherent-pump rate self-consistently.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeLevelSection {
    pub kappa_tilde: f64,
    pub gamma2_tilde: f64,
    pub gamma1_tilde: f64,
    pub dipole_ratio: f64,
    pub atom_count: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSection {
    pub duration: f64,
    pub warmup: f64,
    pub seed: u64,
    pub seeds: u32,
    pub filter_bandwidth: f64,
    pub rate_integration_step: f64,
    pub detector_efficiency: f64,
    pub bin_dt: f64,
    pub save_events: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WelchSection {
    pub segment_length: usize,
    pub overlap: f64,
    pub window: Window,
    pub min_segments: usize,
    pub band_min: f64,
    pub band_max: f64,
    /// 0 keeps the raw FFT-bin grid.
    pub log_bins: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSection {
    pub points: usize,
    pub omega_min: f64,
    pub omega_max: f64,
    pub include_zero: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareSection {
    pub tolerance_abs: f64,
    pub tolerance_rel: f64,
    pub ci_coverage_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSection {
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: ScenarioKind,
    pub routes: Vec<Route>,
    pub params: ParamsSection,
    pub three_level: Option<ThreeLevelSection>,
    pub sim: SimSection,
    pub welch: WelchSection,
    pub grid: GridSection,
    pub compare: CompareSection,
    pub output_dir: PathBuf,
    pub sweep: Option<SweepSection>,
}

impl ExperimentConfig {
    /// Defaults for everything except the scenario itself.
    pub fn default_with(scenario: ScenarioKind) -> Self {
        ExperimentConfig {
            scenario,
            routes: vec![Route::Analytic, Route::Engine],
            params: ParamsSection {
                p: 0.0,
                lambda: 0.0,
                kappa0_over_kappa: 0.0,
                kappa_tilde_over_kappa: 1.0,
                r_over_kappa: 1e4,
                detector: DetectorChoice::Measuring,
            },
            three_level: None,
            sim: SimSection {
                duration: 3100.0,
                warmup: 100.0,
                seed: 1,
                seeds: 4,
                filter_bandwidth: 50.0,
                rate_integration_step: 0.005,
                detector_efficiency: 1.0,
                bin_dt: DEFAULT_BIN_DT,
                save_events: false,
            },
            welch: WelchSection {
                segment_length: 4096,
                overlap: 0.5,
                window: Window::Hann,
                min_segments: 64,
                band_min: 0.05,
                band_max: 10.0,
                log_bins: 48,
            },
            grid: GridSection {
                points: 512,
                omega_min: 1e-2,
                omega_max: 1e2,
                include_zero: true,
            },
            compare: CompareSection {
                tolerance_abs: 0.1,
                tolerance_rel: 1e-9,
                ci_coverage_min: 0.9,
            },
            output_dir: PathBuf::from("out"),
            sweep: None,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    /// Parse and cross-validate a configuration.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw = RawConfig::parse(text)?;
        let cfg = Self::from_raw(raw)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn from_raw(mut raw: RawConfig) -> Result<Self, CliError> {
        let scenario_item = raw.take("", "scenario")?.ok_or_else(|| CliError::Config {
            line: None,
            message: "missing required key `scenario`".into(),
        })?;
        let scenario = match scenario_item.value.as_str() {
            "single" => ScenarioKind::Single,
            "fbl" => ScenarioKind::Fbl,
            "coupled" => ScenarioKind::Coupled,
            "coupled-fbl" => ScenarioKind::CoupledFbl,
            other => {
                return Err(CliError::Config {
                    line: Some(scenario_item.line),
                    message: format!(
                        "unknown scenario `{other}` (expected single, fbl, coupled or coupled-fbl)"
                    ),
                });
            }
        };
        let mut cfg = ExperimentConfig::default_with(scenario);

        if let Some(item) = raw.take("", "routes")? {
            let mut routes = BTreeSet::new();
            for token in item.value.split(',') {
                let token = token.trim();
                let route = match token {
                    "analytic" => Route::Analytic,
                    "engine" => Route::Engine,
                    "simulate" => Route::Simulate,
                    other => {
                        return Err(CliError::Config {
                            line: Some(item.line),
                            message: format!(
                                "unknown route `{other}` (expected analytic, engine or simulate)"
                            ),
                        });
                    }
                };
                routes.insert(route);
            }
            if routes.is_empty() {
                return Err(CliError::Config {
                    line: Some(item.line),
                    message: "routes must name at least one of analytic, engine, simulate".into(),
                });
            }
            cfg.routes = routes.into_iter().collect();
        }

        raw.take_f64("params", "p", &mut cfg.params.p)?;
        raw.take_f64("params", "lambda", &mut cfg.params.lambda)?;
        raw.take_f64("params", "kappa0_over_kappa", &mut cfg.params.kappa0_over_kappa)?;
        raw.take_f64(
            "params",
            "kappa_tilde_over_kappa",
            &mut cfg.params.kappa_tilde_over_kappa,
        )?;
        raw.take_f64("params", "R_over_kappa", &mut cfg.params.r_over_kappa)?;
        if let Some(item) = raw.take("params", "detector")? {
            cfg.params.detector = match item.value.as_str() {
                "exciting" => DetectorChoice::Exciting,
                "measuring" => DetectorChoice::Measuring,
                other => {
                    return Err(CliError::Config {
                        line: Some(item.line),
                        message: format!("unknown detector `{other}` (expected exciting or measuring)"),
                    });
                }
            };
        }

        if raw.has_section("threelevel") {
            let mut tl = ThreeLevelSection {
                kappa_tilde: cfg.params.kappa_tilde_over_kappa,
                gamma2_tilde: 1.0,
                gamma1_tilde: 100.0,
                dipole_ratio: 1.0,
                atom_count: 1.0,
            };
            raw.take_f64("threelevel", "kappa_tilde", &mut tl.kappa_tilde)?;
            raw.take_f64("threelevel", "gamma2_tilde", &mut tl.gamma2_tilde)?;
            raw.take_f64("threelevel", "gamma1_tilde", &mut tl.gamma1_tilde)?;
            raw.take_f64("threelevel", "dipole_ratio", &mut tl.dipole_ratio)?;
            raw.take_f64("threelevel", "atom_count", &mut tl.atom_count)?;
            cfg.three_level = Some(tl);
        }

        raw.take_f64("sim", "duration", &mut cfg.sim.duration)?;
        raw.take_f64("sim", "warmup", &mut cfg.sim.warmup)?;
        raw.take_u64("sim", "seed", &mut cfg.sim.seed)?;
        raw.take_u32("sim", "seeds", &mut cfg.sim.seeds)?;
        raw.take_f64("sim", "filter_bandwidth", &mut cfg.sim.filter_bandwidth)?;
        raw.take_f64(
            "sim",
            "rate_integration_step",
            &mut cfg.sim.rate_integration_step,
        )?;
        raw.take_f64("sim", "detector_efficiency", &mut cfg.sim.detector_efficiency)?;
        raw.take_f64("sim", "bin_dt", &mut cfg.sim.bin_dt)?;
        raw.take_bool("sim", "save_events", &mut cfg.sim.save_events)?;

        raw.take_usize("welch", "segment_length", &mut cfg.welch.segment_length)?;
        raw.take_f64("welch", "overlap", &mut cfg.welch.overlap)?;
        if let Some(item) = raw.take("welch", "window")? {
            cfg.welch.window = match item.value.as_str() {
                "hann" => Window::Hann,
                "rectangular" => Window::Rectangular,
                other => {
                    return Err(CliError::Config {
                        line: Some(item.line),
                        message: format!("unknown window `{other}` (expected hann or rectangular)"),
                    });
                }
            };
        }
        raw.take_usize("welch", "min_segments", &mut cfg.welch.min_segments)?;
        raw.take_f64("welch", "band_min", &mut cfg.welch.band_min)?;
        raw.take_f64("welch", "band_max", &mut cfg.welch.band_max)?;
        raw.take_usize("welch", "log_bins", &mut cfg.welch.log_bins)?;

        raw.take_usize("grid", "points", &mut cfg.grid.points)?;
        raw.take_f64("grid", "omega_min", &mut cfg.grid.omega_min)?;
        raw.take_f64("grid", "omega_max", &mut cfg.grid.omega_max)?;
        raw.take_bool("grid", "include_zero", &mut cfg.grid.include_zero)?;

        raw.take_f64("compare", "tolerance_abs", &mut cfg.compare.tolerance_abs)?;
        raw.take_f64("compare", "tolerance_rel", &mut cfg.compare.tolerance_rel)?;
        raw.take_f64("compare", "ci_coverage_min", &mut cfg.compare.ci_coverage_min)?;

        if let Some(item) = raw.take("output", "dir")? {
            cfg.output_dir = PathBuf::from(item.value);
        }

        if raw.has_section("sweep") {
            let parameter = raw.take("sweep", "parameter")?.ok_or_else(|| {
                CliError::config("section [sweep] requires the `parameter` key")
            })?;
            let values_item = raw
                .take("sweep", "values")?
                .ok_or_else(|| CliError::config("section [sweep] requires the `values` key"))?;
            let mut values = Vec::new();
            for token in values_item.value.split(',') {
                let token = token.trim();
                values.push(token.parse::<f64>().map_err(|_| CliError::Config {
                    line: Some(values_item.line),
                    message: format!("sweep value `{token}` is not a number"),
                })?);
            }
            cfg.sweep = Some(SweepSection {
                parameter: parameter.value,
                values,
            });
        }

        raw.finish()?;
        Ok(cfg)
    }

    /// Cross-field rules; every violation names the rule it breaks.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.routes.contains(&Route::Simulate) && self.scenario.is_coupled() {
            return Err(CliError::config(format!(
                "route `simulate` is only available for scenarios single and fbl: the event-level \
                 model covers the directly detected laser, while scenario `{}` is computed exactly \
                 in the frequency domain",
                self.scenario
            )));
        }
        if self.scenario.is_coupled()
            && !(self.params.kappa0_over_kappa > 0.0 && self.params.kappa0_over_kappa.is_finite())
        {
            return Err(CliError::config(format!(
                "scenario `{}` requires kappa0_over_kappa > 0",
                self.scenario
            )));
        }
        if self.scenario == ScenarioKind::CoupledFbl
            && self.routes.contains(&Route::Analytic)
            && self.params.p != 0.0
        {
            return Err(CliError::config(
                "the coupled-fbl closed form is available for the Poissonian pump only (p = 0); \
                 use the engine route for other pump statistics",
            ));
        }
        if self.routes.contains(&Route::Simulate) && !(0.0..=1.0).contains(&self.params.p) {
            return Err(CliError::config(
                "route `simulate` requires p in [0, 1]: pump noise below the regular-pump floor or \
                 above the Poissonian ceiling has no event-level realization",
            ));
        }
        if self.scenario.is_coupled()
            && self.routes.contains(&Route::Analytic)
            && self.params.detector == DetectorChoice::Exciting
        {
            return Err(CliError::config(
                "the analytic route covers the measuring detector only; use the engine route to \
                 observe the exciting laser's detector",
            ));
        }
        if self.sim.seeds == 0 {
            return Err(CliError::config("sim.seeds must be at least 1"));
        }
        if let Some(sweep) = &self.sweep {
            let known = ["p", "lambda", "kappa0_over_kappa", "R_over_kappa"];
            if !known.contains(&sweep.parameter.as_str()) {
                return Err(CliError::config(format!(
                    "sweep parameter `{}` not supported (expected one of {})",
                    sweep.parameter,
                    known.join(", ")
                )));
            }
            if sweep.values.is_empty() {
                return Err(CliError::config("sweep values must not be empty"));
            }
        }
        Ok(())
    }

    /// Apply a sweep override to a clone of this configuration.
    pub fn with_sweep_value(&self, parameter: &str, value: f64) -> ExperimentConfig {
        let mut cfg = self.clone();
        cfg.sweep = None;
        match parameter {
            "p" => cfg.params.p = value,
            "lambda" => cfg.params.lambda = value,
            "kappa0_over_kappa" => cfg.params.kappa0_over_kappa = value,
            "R_over_kappa" => cfg.params.r_over_kappa = value,
            _ => unreachable!("validated sweep parameter"),
        }
        cfg
    }

    /// The analysis grid for the closed-form and engine routes.
    pub fn grid_points(&self) -> Vec<f64> {
        let mut grid = Vec::with_capacity(self.grid.points + 1);
        if self.grid.include_zero && self.grid.omega_min > 0.0 {
            grid.push(0.0);
        }
        grid.extend(shotspec_core::curve::log_grid(
            self.grid.omega_min,
            self.grid.omega_max,
            self.grid.points,
        ));
        grid
    }
}

struct Item {
    line: usize,
    value: String,
}

/// Line-level parse: sections of `key = value` with `#` comments. Keys are
/// collected into a map first so that typos and leftovers can be reported
/// with their line numbers after the typed extraction pass.
struct RawConfig {
    items: Vec<(String, String, Item)>,
    sections: BTreeSet<String>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self, CliError> {
        let mut items: Vec<(String, String, Item)> = Vec::new();
        let mut sections = BTreeSet::new();
        let known_sections = [
            "", "params", "threelevel", "sim", "welch", "grid", "compare", "output", "sweep",
        ];
        let mut section = String::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| CliError::Config {
                    line: Some(line_no),
                    message: format!("malformed section header `{line}`"),
                })?;
                if !known_sections.contains(&name) {
                    return Err(CliError::Config {
                        line: Some(line_no),
                        message: format!("unknown section `[{name}]`"),
                    });
                }
                section = name.to_string();
                sections.insert(section.clone());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CliError::Config {
                line: Some(line_no),
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() || value.is_empty() {
                return Err(CliError::Config {
                    line: Some(line_no),
                    message: "empty key or value".into(),
                });
            }
            if items.iter().any(|(s, k, _)| *s == section && *k == key) {
                return Err(CliError::Config {
                    line: Some(line_no),
                    message: format!("duplicate key `{key}`"),
                });
            }
            items.push((
                section.clone(),
                key,
                Item {
                    line: line_no,
                    value,
                },
            ));
        }
        Ok(RawConfig { items, sections })
    }

    fn has_section(&self, section: &str) -> bool {
        self.sections.contains(section)
    }

    fn take(&mut self, section: &str, key: &str) -> Result<Option<Item>, CliError> {
        let pos = self
            .items
            .iter()
            .position(|(s, k, _)| s == section && k == key);
        Ok(pos.map(|i| self.items.remove(i).2))
    }

    fn take_f64(&mut self, section: &str, key: &str, slot: &mut f64) -> Result<(), CliError> {
        if let Some(item) = self.take(section, key)? {
            *slot = item.value.parse::<f64>().map_err(|_| CliError::Config {
                line: Some(item.line),
                message: format!("value for `{key}` is not a number: `{}`", item.value),
            })?;
        }
        Ok(())
    }

    fn take_u64(&mut self, section: &str, key: &str, slot: &mut u64) -> Result<(), CliError> {
        if let Some(item) = self.take(section, key)? {
            *slot = item.value.parse::<u64>().map_err(|_| CliError::Config {
                line: Some(item.line),
                message: format!("value for `{key}` is not a non-negative integer: `{}`", item.value),
            })?;
        }
        Ok(())
    }

    fn take_u32(&mut self, section: &str, key: &str, slot: &mut u32) -> Result<(), CliError> {
        let mut wide = *slot as u64;
        self.take_u64(section, key, &mut wide)?;
        *slot = u32::try_from(wide).map_err(|_| CliError::config(format!("`{key}` too large")))?;
        Ok(())
    }

    fn take_usize(&mut self, section: &str, key: &str, slot: &mut usize) -> Result<(), CliError> {
        let mut wide = *slot as u64;
        self.take_u64(section, key, &mut wide)?;
        *slot = usize::try_from(wide).map_err(|_| CliError::config(format!("`{key}` too large")))?;
        Ok(())
    }

    fn take_bool(&mut self, section: &str, key: &str, slot: &mut bool) -> Result<(), CliError> {
        if let Some(item) = self.take(section, key)? {
            *slot = match item.value.as_str() {
                "true" | "yes" | "1" => true,
                "false" | "no" | "0" => false,
                other => {
                    return Err(CliError::Config {
                        line: Some(item.line),
                        message: format!("value for `{key}` is not a boolean: `{other}`"),
                    });
                }
            };
        }
        Ok(())
    }

    /// Reject any key nobody consumed.
    fn finish(self) -> Result<(), CliError> {
        if let Some((section, key, item)) = self.items.first() {
            let place = if section.is_empty() {
                "top level".to_string()
            } else {
                format!("section [{section}]")
            };
            return Err(CliError::Config {
                line: Some(item.line),
                message: format!("unknown key `{key}` in {place}"),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = ExperimentConfig::parse("scenario = single\n").unwrap();
        assert_eq!(cfg.scenario, ScenarioKind::Single);
        assert_eq!(cfg.routes, vec![Route::Analytic, Route::Engine]);
        assert_eq!(cfg.sim.seeds, 4);
        assert_eq!(cfg.params.r_over_kappa, 1e4);
    }

    #[test]
    fn full_config_round_trip() {
        let text = "\
# comment
scenario = coupled-fbl
routes = engine   # inline comment

[params]
p = 0.0
lambda = 1000
kappa0_over_kappa = 1000
kappa_tilde_over_kappa = 1.0

[grid]
points = 64
omega_min = 0.1
omega_max = 10
include_zero = false

[output]
dir = out/strong
";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.scenario, ScenarioKind::CoupledFbl);
        assert_eq!(cfg.routes, vec![Route::Engine]);
        assert_eq!(cfg.params.lambda, 1000.0);
        assert_eq!(cfg.grid.points, 64);
        assert!(!cfg.grid.include_zero);
        assert_eq!(cfg.output_dir, PathBuf::from("out/strong"));
        assert_eq!(cfg.grid_points().len(), 64);
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = "scenario = single\n[params]\nbogus = 1\n";
        match ExperimentConfig::parse(text) {
            Err(CliError::Config { line: Some(3), message }) => {
                assert!(message.contains("bogus"), "{message}");
            }
            other => panic!("expected config error with line, got {other:?}"),
        }
    }

    #[test]
    fn unknown_section_rejected() {
        let text = "scenario = single\n[nonsense]\nx = 1\n";
        match ExperimentConfig::parse(text) {
            Err(CliError::Config { line: Some(2), .. }) => {}
            other => panic!("expected section error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_key_rejected() {
        let text = "scenario = single\nscenario = fbl\n";
        assert!(matches!(
            ExperimentConfig::parse(text),
            Err(CliError::Config { line: Some(2), .. })
        ));
    }

    #[test]
    fn bad_number_reports_key() {
        let text = "scenario = single\n[params]\np = soup\n";
        match ExperimentConfig::parse(text) {
            Err(CliError::Config { line: Some(3), message }) => {
                assert!(message.contains('p') && message.contains("soup"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn simulate_route_refused_for_coupled_scenarios() {
        let text = "scenario = coupled\nroutes = simulate\n[params]\nkappa0_over_kappa = 100\n";
        match ExperimentConfig::parse(text) {
            Err(CliError::Config { message, .. }) => {
                assert!(message.contains("single and fbl"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn coupled_requires_positive_coupling() {
        let text = "scenario = coupled\n";
        assert!(ExperimentConfig::parse(text).is_err());
    }

    #[test]
    fn coupled_fbl_analytic_requires_poissonian_pump() {
        let text =
            "scenario = coupled-fbl\n[params]\np = 0.5\nkappa0_over_kappa = 10\n";
        match ExperimentConfig::parse(text) {
            Err(CliError::Config { message, .. }) => {
                assert!(message.contains("p = 0"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        let ok = "scenario = coupled-fbl\nroutes = engine\n[params]\np = 0.5\nkappa0_over_kappa = 10\n";
        assert!(ExperimentConfig::parse(ok).is_ok());
    }

    #[test]
    fn simulate_route_requires_realizable_pump() {
        let text = "scenario = single\nroutes = simulate\n[params]\np = -0.5\n";
        assert!(ExperimentConfig::parse(text).is_err());
    }

    #[test]
    fn sweep_parsing_and_validation() {
        let text = "scenario = fbl\n[sweep]\nparameter = lambda\nvalues = 0, 1, 9\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        let sweep = cfg.sweep.clone().unwrap();
        assert_eq!(sweep.parameter, "lambda");
        assert_eq!(sweep.values, vec![0.0, 1.0, 9.0]);
        let overridden = cfg.with_sweep_value("lambda", 9.0);
        assert_eq!(overridden.params.lambda, 9.0);
        assert!(overridden.sweep.is_none());

        let bad = "scenario = fbl\n[sweep]\nparameter = seeds\nvalues = 1\n";
        assert!(ExperimentConfig::parse(bad).is_err());
    }
}
