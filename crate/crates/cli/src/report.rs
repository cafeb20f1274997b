//! Pairwise curve comparison and the run report.

use std::fmt::Write as _;

use shotspec_core::curve::{deviation, SpectrumCurve};

use crate::CliError;

/// Gates applied to one comparison; absent gates are not checked.
#[derive(Debug, Clone, Copy, Default)]
pub struct Tolerances {
    pub max_abs: Option<f64>,
    pub max_rel: Option<f64>,
    /// Minimum fraction of grid points whose 95% confidence interval covers
    /// the reference (only meaningful when the left curve carries bounds).
    pub ci_coverage_min: Option<f64>,
    /// Restrict the gated points to frequencies at or below this value;
    /// deviations above it are still reported.
    pub gate_band_max: Option<f64>,
}

/// Outcome of comparing a curve against a reference on the same grid.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub name: String,
    pub max_abs_dev: f64,
    pub omega_at_abs: f64,
    pub max_rel_dev: f64,
    pub omega_at_rel: f64,
    /// Fraction of gated points whose confidence interval covers the
    /// reference value.
    pub ci_coverage: Option<f64>,
    pub tolerances: Tolerances,
    pub passed: bool,
    /// Informational rows never gate the run outcome.
    pub informational: bool,
    pub notes: Vec<String>,
}

/// Compare `curve` against `reference` pointwise on a shared grid.
pub fn compare_curves(
    name: impl Into<String>,
    curve: &SpectrumCurve,
    reference: &SpectrumCurve,
    tolerances: Tolerances,
) -> Result<Comparison, CliError> {
    let full = deviation(curve, reference)?;

    // Deviations restricted to the gated band, when one is set.
    let gated = match tolerances.gate_band_max {
        None => full,
        Some(band_max) => {
            let mut dev = shotspec_core::curve::Deviation {
                max_abs: 0.0,
                omega_at_abs: curve.omega()[0],
                max_rel: 0.0,
                omega_at_rel: curve.omega()[0],
            };
            for ((&w, &a), &b) in curve
                .omega()
                .iter()
                .zip(curve.values())
                .zip(reference.values())
            {
                if w > band_max {
                    break;
                }
                let abs = (a - b).abs();
                let rel = abs / a.abs().max(b.abs()).max(1.0);
                if abs > dev.max_abs {
                    dev.max_abs = abs;
                    dev.omega_at_abs = w;
                }
                if rel > dev.max_rel {
                    dev.max_rel = rel;
                    dev.omega_at_rel = w;
                }
            }
            dev
        }
    };

    let ci_coverage = curve.ci_low().zip(curve.ci_high()).map(|(lo, hi)| {
        let mut total = 0usize;
        let mut covered = 0usize;
        for i in 0..curve.len() {
            if let Some(band_max) = tolerances.gate_band_max
                && curve.omega()[i] > band_max
            {
                break;
            }
            total += 1;
            let r = reference.values()[i];
            if lo[i] <= r && r <= hi[i] {
                covered += 1;
            }
        }
        if total == 0 {
            1.0
        } else {
            covered as f64 / total as f64
        }
    });

    let mut passed = true;
    if let Some(tol) = tolerances.max_abs {
        passed &= gated.max_abs <= tol;
    }
    if let Some(tol) = tolerances.max_rel {
        passed &= gated.max_rel <= tol;
    }
    if let Some(min) = tolerances.ci_coverage_min {
        match ci_coverage {
            Some(cov) => passed &= cov >= min,
            None => passed = false,
        }
    }

    Ok(Comparison {
        name: name.into(),
        max_abs_dev: full.max_abs,
        omega_at_abs: full.omega_at_abs,
        max_rel_dev: full.max_rel,
        omega_at_rel: full.omega_at_rel,
        ci_coverage,
        tolerances,
        passed,
        informational: false,
        notes: Vec::new(),
    })
}

/// Full run report: comparisons plus run-level warnings.
#[derive(Debug, Clone, Default)]
pub struct CompareReport {
    pub scenario: String,
    pub comparisons: Vec<Comparison>,
    pub warnings: Vec<String>,
}

impl CompareReport {
    pub fn passed(&self) -> bool {
        self.comparisons
            .iter()
            .filter(|c| !c.informational)
            .all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "comparison report: scenario {}", self.scenario);
        if self.comparisons.is_empty() {
            let _ = writeln!(out, "  (no comparisons: fewer than two routes enabled)");
        }
        for c in &self.comparisons {
            let verdict = if c.informational {
                "INFO"
            } else if c.passed {
                "PASS"
            } else {
                "FAIL"
            };
            let _ = writeln!(out, "  [{verdict}] {}", c.name);
            let _ = writeln!(
                out,
                "    max abs deviation {:.3e} at omega={:.6}",
                c.max_abs_dev, c.omega_at_abs
            );
            let _ = writeln!(
                out,
                "    max rel deviation {:.3e} at omega={:.6}",
                c.max_rel_dev, c.omega_at_rel
            );
            if let Some(cov) = c.ci_coverage {
                let _ = writeln!(out, "    ci coverage {:.1}%", cov * 100.0);
            }
            let t = &c.tolerances;
            let mut gates = Vec::new();
            if let Some(x) = t.max_abs {
                gates.push(format!("abs<={x:.3e}"));
            }
            if let Some(x) = t.max_rel {
                gates.push(format!("rel<={x:.3e}"));
            }
            if let Some(x) = t.ci_coverage_min {
                gates.push(format!("coverage>={:.0}%", x * 100.0));
            }
            if let Some(x) = t.gate_band_max {
                gates.push(format!("gated for omega<={x}"));
            }
            if !gates.is_empty() {
                let _ = writeln!(out, "    gates: {}", gates.join(", "));
            }
            for note in &c.notes {
                let _ = writeln!(out, "    note: {note}");
            }
        }
        if !self.warnings.is_empty() {
            let _ = writeln!(out, "warnings:");
            for w in &self.warnings {
                let _ = writeln!(out, "  - {w}");
            }
        }
        let _ = writeln!(
            out,
            "result: {}",
            if self.passed() { "PASS" } else { "FAIL" }
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use shotspec_core::analytic;
    use shotspec_core::curve::CurveMeta;

    #[test]
    fn identical_curves_pass_with_zero_deviation() {
        let grid = shotspec_core::curve::default_grid();
        let a = analytic::s_single(0.5, &grid).unwrap();
        let cmp = compare_curves(
            "self",
            &a,
            &a,
            Tolerances {
                max_abs: Some(0.0),
                max_rel: Some(0.0),
                ..Tolerances::default()
            },
        )
        .unwrap();
        assert!(cmp.passed);
        assert_eq!(cmp.max_abs_dev, 0.0);
    }

    #[test]
    fn fbl_versus_single_deviation_by_hand() {
        // At zero frequency: single = 1, squeezed loop = 0.01.
        let grid = vec![0.0, 1.0];
        let fbl = analytic::s_fbl(0.0, 9.0, &grid).unwrap();
        let single = analytic::s_single(0.0, &grid).unwrap();
        let cmp = compare_curves("fbl vs single", &fbl, &single, Tolerances::default()).unwrap();
        assert!((cmp.max_abs_dev - 0.99).abs() < 1e-12);
        assert_eq!(cmp.omega_at_abs, 0.0);
    }

    #[test]
    fn coupled_versus_single_worst_point_at_dc() {
        let grid = shotspec_core::curve::linear_grid(0.0, 20.0, 512);
        let coupled = analytic::s_coupled(0.0, 1.0, 1.0, 100.0, &grid).unwrap();
        let single = analytic::s_single(0.0, &grid).unwrap();
        let cmp = compare_curves("c vs s", &coupled, &single, Tolerances::default()).unwrap();
        assert!((cmp.max_abs_dev - 202.0 / 10404.0).abs() < 1e-12);
        assert_eq!(cmp.omega_at_abs, 0.0);
    }

    #[test]
    fn ci_coverage_gate() {
        let meta = CurveMeta::new("est");
        let est = SpectrumCurve::with_ci(
            vec![0.0, 1.0, 2.0, 3.0],
            vec![1.0, 1.0, 1.0, 1.0],
            vec![0.9, 0.9, 0.9, 1.05],
            vec![1.1, 1.1, 1.1, 1.2],
            meta.clone(),
        )
        .unwrap();
        let reference =
            SpectrumCurve::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0; 4], CurveMeta::new("ref")).unwrap();
        let cmp = compare_curves(
            "cov",
            &est,
            &reference,
            Tolerances {
                ci_coverage_min: Some(0.75),
                ..Tolerances::default()
            },
        )
        .unwrap();
        assert_eq!(cmp.ci_coverage, Some(0.75));
        assert!(cmp.passed);

        let strict = compare_curves(
            "cov",
            &est,
            &reference,
            Tolerances {
                ci_coverage_min: Some(0.9),
                ..Tolerances::default()
            },
        )
        .unwrap();
        assert!(!strict.passed);
    }

    #[test]
    fn gate_band_restricts_the_gate_but_not_the_report() {
        let a = SpectrumCurve::new(
            vec![0.0, 1.0, 5.0],
            vec![1.0, 1.0, 2.0],
            CurveMeta::new("a"),
        )
        .unwrap();
        let b = SpectrumCurve::new(vec![0.0, 1.0, 5.0], vec![1.0; 3], CurveMeta::new("b")).unwrap();
        let cmp = compare_curves(
            "banded",
            &a,
            &b,
            Tolerances {
                max_abs: Some(0.1),
                gate_band_max: Some(2.0),
                ..Tolerances::default()
            },
        )
        .unwrap();
        assert!(cmp.passed, "deviation beyond the gate band must not gate");
        assert_eq!(cmp.max_abs_dev, 1.0);
    }

    #[test]
    fn report_renders_and_aggregates() {
        let grid = vec![0.0, 1.0];
        let a = analytic::s_single(0.0, &grid).unwrap();
        let mut cmp = compare_curves(
            "x",
            &a,
            &a,
            Tolerances {
                max_rel: Some(1e-9),
                ..Tolerances::default()
            },
        )
        .unwrap();
        let mut report = CompareReport {
            scenario: "single".into(),
            ..CompareReport::default()
        };
        report.comparisons.push(cmp.clone());
        assert!(report.passed());
        cmp.passed = false;
        cmp.informational = true;
        report.comparisons.push(cmp);
        assert!(report.passed(), "informational rows must not gate");
        let text = report.render();
        assert!(text.contains("result: PASS"));
        assert!(text.contains("INFO"));
    }
}
