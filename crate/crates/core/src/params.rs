//! Physical parameters and the semiclassical operating point.
//!
//! All rates share one unit; the conventional choice is the exciting laser's
//! mode width `kappa = 1`, which also sets the frequency unit of every
//! spectrum in this crate.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        });
    }
    Ok(())
}

fn check_non_negative(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and >= 0",
        });
    }
    Ok(())
}

/// Two-level laser: mode width, pump, saturation and relaxation constants.
///
/// `pump_regularity` interpolates the pump statistics: 1 is a perfectly
/// regular pump, 0 a Poissonian one, negative values carry excess classical
/// noise. `saturation_photons` is the photon number that saturates the laser
/// transition; the dimensionless operating power is the mean photon number
/// divided by it.
#[derive(Debug, Clone, PartialEq)]
pub struct LaserParams {
    /// Mode spectral width (rate unit of the whole model).
    pub kappa: f64,
    /// Mean pump rate into the upper laser level.
    pub pump_rate: f64,
    /// Pump-statistics parameter, <= 1.
    pub pump_regularity: f64,
    /// Photon number saturating the laser transition.
    pub saturation_photons: f64,
    /// Longitudinal relaxation rate of the upper laser level.
    pub gamma1: f64,
    /// Longitudinal relaxation rate of the lower laser level.
    pub gamma2: f64,
    /// Transverse (polarization) relaxation rate.
    pub gamma_perp: f64,
    /// Dipole coupling constant; optional, used only for consistency checks
    /// against `saturation_photons`.
    pub dipole_coupling: Option<f64>,
}

impl LaserParams {
    /// Parameters with defaults that keep the linearized theory comfortable:
    /// saturation photon number 1 (so the operating power equals the photon
    /// number) and relaxation rates far above the mode width.
    pub fn new(kappa: f64, pump_rate: f64, pump_regularity: f64) -> Self {
        LaserParams {
            kappa,
            pump_rate,
            pump_regularity,
            saturation_photons: 1.0,
            gamma1: 1.0,
            gamma2: 100.0,
            gamma_perp: 50.5,
            dipole_coupling: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("kappa", self.kappa)?;
        check_positive("pump_rate", self.pump_rate)?;
        check_positive("saturation_photons", self.saturation_photons)?;
        check_positive("gamma1", self.gamma1)?;
        check_positive("gamma2", self.gamma2)?;
        check_positive("gamma_perp", self.gamma_perp)?;
        if !self.pump_regularity.is_finite() || self.pump_regularity > 1.0 {
            return Err(Error::InvalidParameter {
                name: "pump_regularity",
                value: self.pump_regularity,
                reason: "must be finite and <= 1",
            });
        }
        if let Some(g) = self.dipole_coupling {
            check_positive("dipole_coupling", g)?;
            // saturation_photons must equal gamma_perp*gamma1/(2 g^2).
            let implied = self.gamma_perp * self.gamma1 / (2.0 * g * g);
            let rel = (self.saturation_photons - implied).abs() / implied;
            if rel > 1e-12 {
                return Err(Error::InvalidParameter {
                    name: "saturation_photons",
                    value: self.saturation_photons,
                    reason: "inconsistent with gamma_perp*gamma1/(2*dipole_coupling^2)",
                });
            }
        }
        Ok(())
    }
}

/// Negative feedback loop: detected photocurrent fluctuations reduce the pump
/// rate with dimensionless gain `efficiency`. The photocurrent estimate that
/// closes the loop is a single-pole low-pass filter of the detection train
/// with bandwidth `filter_bandwidth` (a simulation-only knob; the closed-form
/// loop responds instantaneously).
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackParams {
    pub efficiency: f64,
    pub filter_bandwidth: f64,
}

impl FeedbackParams {
    pub fn new(efficiency: f64) -> Self {
        FeedbackParams {
            efficiency,
            filter_bandwidth: 50.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_non_negative("efficiency", self.efficiency)?;
        check_positive("filter_bandwidth", self.filter_bandwidth)?;
        Ok(())
    }
}

/// Three-level measuring laser pumped coherently by the exciting laser.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeLevelParams {
    /// Measuring-laser mode width.
    pub kappa_tilde: f64,
    /// Incoherent pump rate into the intermediate level.
    pub gamma2_tilde: f64,
    /// Spontaneous rate on the measuring laser transition.
    pub gamma1_tilde: f64,
    /// Ratio of the dipole constants of the two optical transitions.
    pub dipole_ratio: f64,
    /// Number of three-level atoms taking part; 0 means no medium at all.
    pub atom_count: f64,
}

impl ThreeLevelParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("kappa_tilde", self.kappa_tilde)?;
        check_positive("gamma2_tilde", self.gamma2_tilde)?;
        check_positive("gamma1_tilde", self.gamma1_tilde)?;
        check_positive("dipole_ratio", self.dipole_ratio)?;
        check_non_negative("atom_count", self.atom_count)?;
        Ok(())
    }

    /// The model is derived for a slow incoherent pump; flag inputs where it
    /// is not at least an order of magnitude below the spontaneous rate.
    pub fn incoherent_pump_too_fast(&self) -> bool {
        self.gamma2_tilde > self.gamma1_tilde / 10.0
    }

    /// Lump constant governing the coherent-pump rate: incoherent pump rate
    /// times squared dipole ratio times atom count.
    pub fn pump_lump_constant(&self) -> f64 {
        self.gamma2_tilde * self.dipole_ratio * self.dipole_ratio * self.atom_count
    }
}

/// Coupling between the exciting and the measuring laser.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingParams {
    /// Coherent-pump rate into the three-level medium.
    pub kappa0: f64,
    /// Measuring-laser mode width.
    pub kappa_tilde: f64,
    /// Convenience ratio kappa0 / kappa of the exciting laser.
    pub ratio: f64,
}

impl CouplingParams {
    pub fn new(kappa0: f64, kappa_tilde: f64, kappa: f64) -> Self {
        CouplingParams {
            kappa0,
            kappa_tilde,
            ratio: kappa0 / kappa,
        }
    }

    pub fn validate(&self, kappa: f64) -> Result<()> {
        check_non_negative("kappa0", self.kappa0)?;
        check_positive("kappa_tilde", self.kappa_tilde)?;
        let implied = self.kappa0 / kappa;
        let scale = implied.abs().max(1e-300);
        if (self.ratio - implied).abs() / scale > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "ratio",
                value: self.ratio,
                reason: "must equal kappa0/kappa",
            });
        }
        Ok(())
    }
}

/// Soft diagnostics attached to a steady state. None of these stop a
/// computation; they mark inputs outside the regime the closed forms were
/// derived for.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SteadyStateWarnings {
    /// Operating power below 10: the saturated-regime photon-number equation
    /// is a poor description.
    pub weak_saturation: bool,
    /// gamma1 not a decade below gamma2: the stationary population formulas
    /// assume gamma1 << gamma2.
    pub gamma_order: bool,
}

impl SteadyStateWarnings {
    pub fn any(&self) -> bool {
        self.weak_saturation || self.gamma_order
    }

    pub fn messages(&self) -> Vec<String> {
        let mut msgs = Vec::new();
        if self.weak_saturation {
            msgs.push(String::from(
                "operating power below 10: saturation assumption is weak",
            ));
        }
        if self.gamma_order {
            msgs.push(String::from(
                "gamma1 not << gamma2: stationary solutions assume gamma1 < gamma2/10",
            ));
        }
        msgs
    }
}

/// Semiclassical operating point of the (optionally coupled) laser system.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    /// Mean photon number of the exciting laser.
    pub photon_number: f64,
    /// Mean photon number of the measuring laser (0 without coupling).
    pub photon_number_measuring: f64,
    /// Dimensionless operating power: photon number over saturation photons.
    pub power: f64,
    /// Mean population of the upper laser level.
    pub pop_upper: f64,
    /// Mean population of the lower laser level.
    pub pop_lower: f64,
    /// Stationary stimulated-emission photon flux; equals half the total loss
    /// rate times the photon number.
    pub gain_flux: f64,
    /// Mean photocurrent at the exciting laser's detector.
    pub mean_current: f64,
    /// Mean photocurrent at the measuring laser's detector (0 without coupling).
    pub mean_current_measuring: f64,
    pub warnings: SteadyStateWarnings,
}

/// Solve the stationary operating point.
///
/// Photon balance fixes the exciting laser's photon number as the pump rate
/// over the total loss `kappa + kappa0`; the measuring laser then holds
/// `photon_number * kappa0 / kappa_tilde` photons. Populations use the
/// saturated-regime stationary solutions.
pub fn steady_state(laser: &LaserParams, coupling: Option<&CouplingParams>) -> Result<SteadyState> {
    laser.validate()?;
    if let Some(c) = coupling {
        c.validate(laser.kappa)?;
    }
    let kappa0 = coupling.map_or(0.0, |c| c.kappa0);
    let total_loss = laser.kappa + kappa0;

    let n = laser.pump_rate / total_loss;
    let n_tilde = coupling.map_or(0.0, |c| n * c.kappa0 / c.kappa_tilde);
    let power = n / laser.saturation_photons;

    let warnings = SteadyStateWarnings {
        weak_saturation: power < 10.0,
        gamma_order: laser.gamma1 >= laser.gamma2 / 10.0,
    };

    Ok(SteadyState {
        photon_number: n,
        photon_number_measuring: n_tilde,
        power,
        pop_upper: total_loss * laser.saturation_photons / laser.gamma1,
        pop_lower: total_loss * n / laser.gamma2,
        gain_flux: total_loss * n / 2.0,
        mean_current: laser.kappa * n,
        mean_current_measuring: coupling.map_or(0.0, |c| c.kappa_tilde * n_tilde),
        warnings,
    })
}

/// Self-consistent coherent-pump rate of the three-level medium.
///
/// The pump rate is the lump constant divided by the measuring laser's photon
/// number, which itself depends on the pump rate through the photon balance.
/// Eliminating the photon numbers leaves a quadratic with a single positive
/// root:
///
/// ```text
/// pump_rate * kappa0^2 - c * kappa_tilde * kappa0 - c * kappa_tilde * kappa = 0
/// ```
pub fn solve_kappa0(laser: &LaserParams, three_level: &ThreeLevelParams) -> Result<CouplingParams> {
    laser.validate()?;
    three_level.validate()?;
    let c = three_level.pump_lump_constant();
    if c == 0.0 {
        return Ok(CouplingParams::new(0.0, three_level.kappa_tilde, laser.kappa));
    }
    let r = laser.pump_rate;
    let ck = c * three_level.kappa_tilde;
    let disc = ck * ck + 4.0 * r * ck * laser.kappa;
    debug_assert!(disc > 0.0);
    let kappa0 = (ck + math::sqrt(disc)) / (2.0 * r);
    Ok(CouplingParams::new(kappa0, three_level.kappa_tilde, laser.kappa))
}
