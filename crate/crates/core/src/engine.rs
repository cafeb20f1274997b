//! Generic frequency-domain solver for linear Langevin systems driven by
//! white noise with an arbitrary correlation matrix.
//!
//! A model is the tuple (M, L, C, a, b, shot):
//!
//! ```text
//! (-i omega I + M) x(omega) = L f(omega)
//! observable(omega)         = a x(omega) + b f(omega)
//! <f_j(omega) f_k(omega')>  = C_jk delta(omega + omega')
//! ```
//!
//! with real M, L, C, a, b. The spectral density of the observable at a real
//! frequency is `Re[v C v^dagger]` for the response row
//! `v = a (-i omega I + M)^{-1} L + b`, divided by `shot` to express it in
//! shot-noise units.
//!
//! C only has to be symmetric, not positive semidefinite: sub-Poissonian
//! pumps enter as sources with negative variance. Nothing is ever sampled
//! from C — the algebra is meaningful even where a time-domain realization
//! is not. A resulting negative spectrum marks a scenario outside the
//! validity of the linearized theory and is flagged on the output curve.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::curve::{CurveMeta, SpectrumCurve};
use crate::error::{Error, Result};
use crate::linalg::{self, C64, Mat};
use crate::params::SteadyState;

/// Which photodetector the spectrum is taken at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    /// Detector in the exciting laser's output beam.
    Exciting,
    /// Detector in the measuring (three-level) laser's output beam.
    Measuring,
}

/// The four physical configurations the engine knows how to assemble.
///
/// Single-laser and feedback-loop scenarios are expressed in grid units
/// (mode width 1); the coupled scenarios keep all mode widths explicit.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Single {
        pump_regularity: f64,
    },
    Fbl {
        pump_regularity: f64,
        efficiency: f64,
    },
    Coupled {
        pump_regularity: f64,
        kappa: f64,
        kappa_tilde: f64,
        kappa0: f64,
    },
    CoupledFbl {
        pump_regularity: f64,
        efficiency: f64,
        kappa: f64,
        kappa_tilde: f64,
        kappa0: f64,
    },
}

impl Scenario {
    pub fn label(&self) -> String {
        match self {
            Scenario::Single { pump_regularity } => format!("single(p={pump_regularity})"),
            Scenario::Fbl {
                pump_regularity,
                efficiency,
            } => format!("fbl(p={pump_regularity}, lambda={efficiency})"),
            Scenario::Coupled {
                pump_regularity,
                kappa,
                kappa_tilde,
                kappa0,
            } => format!(
                "coupled(p={pump_regularity}, kappa={kappa}, kappa_tilde={kappa_tilde}, kappa0={kappa0})"
            ),
            Scenario::CoupledFbl {
                pump_regularity,
                efficiency,
                kappa,
                kappa_tilde,
                kappa0,
            } => format!(
                "coupled-fbl(p={pump_regularity}, lambda={efficiency}, kappa={kappa}, kappa_tilde={kappa_tilde}, kappa0={kappa0})"
            ),
        }
    }
}

/// Scenario plus the detector whose photocurrent is observed.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub detector: Detector,
}

impl ScenarioSpec {
    /// Observe the only detector there is (single-laser scenarios) or the
    /// measuring laser's detector (coupled scenarios).
    pub fn new(scenario: Scenario) -> Self {
        let detector = match scenario {
            Scenario::Single { .. } | Scenario::Fbl { .. } => Detector::Exciting,
            _ => Detector::Measuring,
        };
        ScenarioSpec { scenario, detector }
    }

    pub fn with_detector(scenario: Scenario, detector: Detector) -> Self {
        ScenarioSpec { scenario, detector }
    }
}

/// Immutable frequency-domain noise model; see the module docs for the
/// conventions.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearNoiseModel {
    label: String,
    drift: Mat,
    input: Mat,
    corr: Mat,
    observe: Vec<f64>,
    feedthrough: Vec<f64>,
    shot_level: f64,
}

impl LinearNoiseModel {
    /// Validate and freeze a model. The drift matrix must have all its
    /// eigenvalues in the open right half plane (the dynamics are damped),
    /// the correlation matrix must be symmetric, and the shot level positive.
    pub fn new(
        label: impl Into<String>,
        drift: Mat,
        input: Mat,
        corr: Mat,
        observe: Vec<f64>,
        feedthrough: Vec<f64>,
        shot_level: f64,
    ) -> Result<Self> {
        let label = label.into();
        let n = drift.rows();
        let m = corr.rows();
        if drift.cols() != n {
            return Err(Error::ShapeMismatch("drift matrix must be square"));
        }
        if input.rows() != n || input.cols() != m {
            return Err(Error::ShapeMismatch("input matrix must be states x sources"));
        }
        if corr.cols() != m {
            return Err(Error::ShapeMismatch("correlation matrix must be square"));
        }
        if observe.len() != n {
            return Err(Error::ShapeMismatch("observable row must have one entry per state"));
        }
        if feedthrough.len() != m {
            return Err(Error::ShapeMismatch("feedthrough row must have one entry per source"));
        }
        if !drift.is_finite()
            || !input.is_finite()
            || !corr.is_finite()
            || observe.iter().any(|v| !v.is_finite())
            || feedthrough.iter().any(|v| !v.is_finite())
        {
            return Err(Error::ShapeMismatch("model entries must be finite"));
        }
        if !shot_level.is_finite() || shot_level <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "shot_level",
                value: shot_level,
                reason: "must be finite and > 0",
            });
        }
        let scale = corr.data().iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let mut max_dev = 0.0f64;
        for i in 0..m {
            for j in i + 1..m {
                max_dev = max_dev.max((corr[(i, j)] - corr[(j, i)]).abs());
            }
        }
        if max_dev > 1e-12 * scale.max(1.0) {
            return Err(Error::AsymmetricCorrelation { max_dev });
        }
        if !linalg::drift_is_stable(&drift) {
            return Err(Error::UnstableDrift { scenario: label });
        }
        Ok(LinearNoiseModel {
            label,
            drift,
            input,
            corr,
            observe,
            feedthrough,
            shot_level,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.drift.rows()
    }

    pub fn n_sources(&self) -> usize {
        self.corr.rows()
    }

    pub fn shot_level(&self) -> f64 {
        self.shot_level
    }

    pub fn drift(&self) -> &Mat {
        &self.drift
    }

    pub fn input(&self) -> &Mat {
        &self.input
    }

    pub fn corr(&self) -> &Mat {
        &self.corr
    }

    pub fn observe(&self) -> &[f64] {
        &self.observe
    }

    pub fn feedthrough(&self) -> &[f64] {
        &self.feedthrough
    }

    /// Response row `v(omega) = a (-i omega I + M)^{-1} L + b`.
    pub fn response_row(&self, omega: f64) -> Vec<C64> {
        let n = self.dim();
        let m = self.n_sources();
        // y = a (-i w I + M)^{-1} is obtained from (-i w I + M)^T y^T = a^T.
        let mut at = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let diag = if i == j { C64::new(0.0, -omega) } else { C64::new(0.0, 0.0) };
                at[i * n + j] = diag + C64::new(self.drift[(j, i)], 0.0);
            }
        }
        let mut y: Vec<C64> = self.observe.iter().map(|&v| C64::new(v, 0.0)).collect();
        // Stable drift keeps -i w I + M regular for every real frequency.
        linalg::solve_complex_in_place(&mut at, n, &mut y)
            .expect("resolvent is regular for a stable drift matrix");
        let mut v = vec![C64::new(0.0, 0.0); m];
        for (k, entry) in v.iter_mut().enumerate() {
            let mut acc = C64::new(self.feedthrough[k], 0.0);
            for (i, &resolvent) in y.iter().enumerate() {
                acc += resolvent * self.input[(i, k)];
            }
            *entry = acc;
        }
        v
    }

    /// Spectral density of the observable before shot normalization:
    /// the quadratic form `v C v^dagger`, assembled symmetrically so the
    /// result is real by construction.
    pub fn psd_unnormalized_at(&self, omega: f64) -> f64 {
        let v = self.response_row(omega);
        let m = self.n_sources();
        let mut out = 0.0;
        let mut check = C64::new(0.0, 0.0);
        let mut scale = 0.0f64;
        for j in 0..m {
            for k in 0..m {
                let c = self.corr[(j, k)];
                let cross = v[j] * v[k].conj();
                check += cross * c;
                scale += (c * cross).norm_sqr().max(0.0);
                if j == k {
                    out += c * v[j].norm_sqr();
                } else if j < k {
                    out += 2.0 * c * cross.re;
                }
            }
        }
        // The quadratic form of a symmetric real C is real; a surviving
        // imaginary part would mean broken algebra upstream.
        let scale = crate::math::sqrt(scale) + f64::MIN_POSITIVE;
        assert!(
            check.im.abs() <= 1e-10 * scale,
            "residual imaginary part {} exceeds tolerance",
            check.im
        );
        out
    }

    /// Shot-normalized spectral density at one frequency.
    pub fn psd_at(&self, omega: f64) -> f64 {
        self.psd_unnormalized_at(omega) / self.shot_level
    }

    /// Shot-normalized spectrum over a grid. Negative values are physically
    /// inadmissible and get flagged in the curve's metadata.
    pub fn psd_curve(&self, grid: &[f64]) -> Result<SpectrumCurve> {
        let values: Vec<f64> = grid.iter().map(|&w| self.psd_at(w)).collect();
        let mut meta = CurveMeta::new(self.label.clone());
        meta.params = format!("states={} sources={}", self.dim(), self.n_sources());
        if let Some((w, v)) = grid
            .iter()
            .zip(values.iter())
            .find(|&(_, &v)| v < 0.0)
            .map(|(w, v)| (*w, *v))
        {
            meta.warnings.push(format!(
                "negative spectral value {v:.3e} at omega={w}: scenario outside the linearized theory's validity"
            ));
        }
        SpectrumCurve::new(grid.to_vec(), values, meta)
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Assemble the noise model for one of the four scenarios around a computed
/// steady state.
///
/// Source ordering and correlation values for each scenario:
///
/// * `Single`: sources (pump F, detector shot S); `C = diag(-p i, i)`.
/// * `Fbl`: same sources; the loop feeds the detector shot back into the
///   dynamics with weight `-lambda` and stiffens the drift to
///   `(1 + lambda) kappa`.
/// * `Coupled`: sources (F, measuring-medium F~, observed detector shot);
///   `<FF> = -p (kappa + kappa0) n`, `<F~F~> = -2 kappa_tilde n_tilde`, and
///   the coherent-pump channel correlates the two lasers' sources:
///   `<F F~> = kappa_tilde n_tilde`. Without the cross term the model
///   contradicts both closed-form coupled spectra and produces negative
///   spectra at strong coupling.
/// * `CoupledFbl`: sources (F, F~, S, S~); the in-loop detector shot S drives
///   the exciting laser with weight `-lambda (1 + kappa0/kappa)`.
pub fn build_model(spec: &ScenarioSpec, steady: &SteadyState) -> Result<LinearNoiseModel> {
    let n = steady.photon_number;
    let current = steady.mean_current;
    if !n.is_finite() || n <= 0.0 || !current.is_finite() || current <= 0.0 {
        return Err(Error::InconsistentSteadyState("exciting laser must be lasing"));
    }
    // Mode width in the steady state's units; equals 1 in grid units.
    let kappa_ss = current / n;

    match &spec.scenario {
        Scenario::Single { pump_regularity } => {
            if spec.detector == Detector::Measuring {
                return Err(Error::InconsistentSteadyState(
                    "single-laser scenario has no measuring detector",
                ));
            }
            let drift = Mat::from_rows(&[&[kappa_ss]]);
            let input = Mat::from_rows(&[&[1.0, 0.0]]);
            let corr = Mat::from_rows(&[
                &[-pump_regularity * current, 0.0],
                &[0.0, current],
            ]);
            LinearNoiseModel::new(
                spec.scenario.label(),
                drift,
                input,
                corr,
                vec![kappa_ss],
                vec![0.0, 1.0],
                current,
            )
        }
        Scenario::Fbl {
            pump_regularity,
            efficiency,
        } => {
            if spec.detector == Detector::Measuring {
                return Err(Error::InconsistentSteadyState(
                    "feedback-loop scenario has no measuring detector",
                ));
            }
            let drift = Mat::from_rows(&[&[(1.0 + efficiency) * kappa_ss]]);
            let input = Mat::from_rows(&[&[1.0, -efficiency]]);
            let corr = Mat::from_rows(&[
                &[-pump_regularity * current, 0.0],
                &[0.0, current],
            ]);
            LinearNoiseModel::new(
                spec.scenario.label(),
                drift,
                input,
                corr,
                vec![kappa_ss],
                vec![0.0, 1.0],
                current,
            )
        }
        Scenario::Coupled {
            pump_regularity,
            kappa,
            kappa_tilde,
            kappa0,
        } => {
            check_coupled_consistency(steady, *kappa, *kappa_tilde, *kappa0)?;
            let n_tilde = steady.photon_number_measuring;
            let current_tilde = steady.mean_current_measuring;
            let drift = Mat::from_rows(&[
                &[kappa + kappa0, -kappa_tilde],
                &[-kappa0, 2.0 * kappa_tilde],
            ]);
            let pump_var = -pump_regularity * (kappa + kappa0) * n;
            let medium_var = -2.0 * kappa_tilde * n_tilde;
            let cross = kappa_tilde * n_tilde;
            let input = Mat::from_rows(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
            let (corr, observe, feedthrough, shot) = match spec.detector {
                Detector::Measuring => (
                    Mat::from_rows(&[
                        &[pump_var, cross, 0.0],
                        &[cross, medium_var, 0.0],
                        &[0.0, 0.0, current_tilde],
                    ]),
                    vec![0.0, *kappa_tilde],
                    vec![0.0, 0.0, 1.0],
                    current_tilde,
                ),
                Detector::Exciting => (
                    Mat::from_rows(&[
                        &[pump_var, cross, 0.0],
                        &[cross, medium_var, 0.0],
                        &[0.0, 0.0, current],
                    ]),
                    vec![*kappa, 0.0],
                    vec![0.0, 0.0, 1.0],
                    current,
                ),
            };
            LinearNoiseModel::new(spec.scenario.label(), drift, input, corr, observe, feedthrough, shot)
        }
        Scenario::CoupledFbl {
            pump_regularity,
            efficiency,
            kappa,
            kappa_tilde,
            kappa0,
        } => {
            check_coupled_consistency(steady, *kappa, *kappa_tilde, *kappa0)?;
            let n_tilde = steady.photon_number_measuring;
            let current_tilde = steady.mean_current_measuring;
            let drift = Mat::from_rows(&[
                &[(kappa + kappa0) * (1.0 + efficiency), -kappa_tilde],
                &[-kappa0, 2.0 * kappa_tilde],
            ]);
            // Sources (F, F~, S, S~): the in-loop detector shot S closes the
            // loop on the exciting laser's pump.
            let input = Mat::from_rows(&[
                &[1.0, 0.0, -efficiency * (1.0 + kappa0 / kappa), 0.0],
                &[0.0, 1.0, 0.0, 0.0],
            ]);
            let pump_var = -pump_regularity * (kappa + kappa0) * n;
            let medium_var = -2.0 * kappa_tilde * n_tilde;
            let cross = kappa_tilde * n_tilde;
            let corr = Mat::from_rows(&[
                &[pump_var, cross, 0.0, 0.0],
                &[cross, medium_var, 0.0, 0.0],
                &[0.0, 0.0, current, 0.0],
                &[0.0, 0.0, 0.0, current_tilde],
            ]);
            let (observe, feedthrough, shot) = match spec.detector {
                Detector::Measuring => (vec![0.0, *kappa_tilde], vec![0.0, 0.0, 0.0, 1.0], current_tilde),
                Detector::Exciting => (vec![*kappa, 0.0], vec![0.0, 0.0, 1.0, 0.0], current),
            };
            LinearNoiseModel::new(spec.scenario.label(), drift, input, corr, observe, feedthrough, shot)
        }
    }
}

fn check_coupled_consistency(
    steady: &SteadyState,
    kappa: f64,
    kappa_tilde: f64,
    kappa0: f64,
) -> Result<()> {
    if kappa <= 0.0 || kappa_tilde <= 0.0 || !(kappa0 > 0.0 && kappa0.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "kappa0",
            value: kappa0,
            reason: "coupled scenarios need positive mode widths and coupling",
        });
    }
    if !rel_close(steady.mean_current, kappa * steady.photon_number, 1e-9) {
        return Err(Error::InconsistentSteadyState(
            "mean current does not match kappa * photon number",
        ));
    }
    if !rel_close(
        steady.photon_number_measuring * kappa_tilde,
        steady.photon_number * kappa0,
        1e-9,
    ) {
        return Err(Error::InconsistentSteadyState(
            "measuring photon number does not match the coupling balance",
        ));
    }
    if !(steady.mean_current_measuring > 0.0 && steady.mean_current_measuring.is_finite()) {
        return Err(Error::InconsistentSteadyState("measuring laser must be lasing"));
    }
    Ok(())
}

/// Feedback-loop model with the finite-bandwidth photocurrent filter kept as
/// a dynamical state, for comparison against the event-level simulation
/// (whose loop necessarily filters): states (photon fluctuation, filtered
/// current fluctuation), sources (pump F, detector shot S).
///
/// As the filter bandwidth grows this model converges to the ideal `Fbl`
/// scenario; at bandwidth `B` the deviation is of order `kappa/B` away from
/// zero frequency. Assumes unit detector efficiency.
pub fn fbl_filtered_model(
    pump_regularity: f64,
    efficiency: f64,
    filter_bandwidth: f64,
    steady: &SteadyState,
) -> Result<LinearNoiseModel> {
    if filter_bandwidth <= 0.0 || !filter_bandwidth.is_finite() {
        return Err(Error::InvalidParameter {
            name: "filter_bandwidth",
            value: filter_bandwidth,
            reason: "must be finite and > 0",
        });
    }
    let n = steady.photon_number;
    let current = steady.mean_current;
    if !n.is_finite() || n <= 0.0 || !current.is_finite() || current <= 0.0 {
        return Err(Error::InconsistentSteadyState("exciting laser must be lasing"));
    }
    let kappa_ss = current / n;
    let b = filter_bandwidth;
    let drift = Mat::from_rows(&[&[kappa_ss, efficiency], &[-b * kappa_ss, b]]);
    let input = Mat::from_rows(&[&[1.0, 0.0], &[0.0, b]]);
    let corr = Mat::from_rows(&[&[-pump_regularity * current, 0.0], &[0.0, current]]);
    LinearNoiseModel::new(
        format!("fbl-filtered(p={pump_regularity}, lambda={efficiency}, bandwidth={b})"),
        drift,
        input,
        corr,
        vec![kappa_ss, 0.0],
        vec![0.0, 1.0],
        current,
    )
}
