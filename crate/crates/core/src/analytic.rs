//! Closed-form shot-normalized photocurrent spectra.
//!
//! These curves are the ground truth the other computation routes are checked
//! against. Frequencies are in units of the exciting laser's mode width; for
//! the single-laser and feedback-loop forms that width is fixed to 1, the
//! coupled forms keep all mode widths explicit.

use alloc::format;
use alloc::vec::Vec;

use crate::curve::{CurveMeta, SpectrumCurve};
use crate::error::{Error, Result};

fn check_regularity(p: f64) -> Result<()> {
    if !p.is_finite() || p > 1.0 {
        return Err(Error::InvalidParameter {
            name: "pump_regularity",
            value: p,
            reason: "must be finite and <= 1",
        });
    }
    Ok(())
}

fn check_gain(efficiency: f64) -> Result<()> {
    if !efficiency.is_finite() || efficiency < 0.0 {
        return Err(Error::InvalidParameter {
            name: "efficiency",
            value: efficiency,
            reason: "must be finite and >= 0",
        });
    }
    Ok(())
}

fn check_rate(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        });
    }
    Ok(())
}

/// Directly detected single-mode laser:
/// `1 - p / (1 + omega^2)` with the mode width as frequency unit.
///
/// A Poissonian pump (`p = 0`) leaves pure shot noise; a regular pump digs a
/// Lorentzian dip that reaches zero at zero frequency.
pub fn s_single(pump_regularity: f64, grid: &[f64]) -> Result<SpectrumCurve> {
    check_regularity(pump_regularity)?;
    let values: Vec<f64> = grid
        .iter()
        .map(|&w| 1.0 - pump_regularity / (1.0 + w * w))
        .collect();
    SpectrumCurve::new(
        grid.to_vec(),
        values,
        CurveMeta::new("single").with_params(format!("p={pump_regularity}")),
    )
}

/// Laser inside the negative feedback loop:
/// `1 - (p - 1 + (1+lambda)^2) / ((1+lambda)^2 + omega^2)`.
///
/// At high loop gain the photocurrent shot noise is removed at zero frequency
/// regardless of the pump statistics.
pub fn s_fbl(pump_regularity: f64, efficiency: f64, grid: &[f64]) -> Result<SpectrumCurve> {
    check_regularity(pump_regularity)?;
    check_gain(efficiency)?;
    let g2 = (1.0 + efficiency) * (1.0 + efficiency);
    let values: Vec<f64> = grid
        .iter()
        .map(|&w| 1.0 - (pump_regularity - 1.0 + g2) / (g2 + w * w))
        .collect();
    SpectrumCurve::new(
        grid.to_vec(),
        values,
        CurveMeta::new("fbl").with_params(format!("p={pump_regularity} lambda={efficiency}")),
    )
}

/// Measuring-laser photocurrent for two strongly coupled lasers.
///
/// `kappa` and `kappa_tilde` are the mode widths of the exciting and the
/// measuring laser, `kappa0` the coherent-pump rate into the three-level
/// medium. For `kappa = kappa_tilde << kappa0` the curve collapses onto the
/// directly detected single-laser spectrum.
pub fn s_coupled(
    pump_regularity: f64,
    kappa: f64,
    kappa_tilde: f64,
    kappa0: f64,
    grid: &[f64],
) -> Result<SpectrumCurve> {
    check_regularity(pump_regularity)?;
    check_rate("kappa", kappa)?;
    check_rate("kappa_tilde", kappa_tilde)?;
    check_rate("kappa0", kappa0)?;
    let total = kappa + kappa0;
    let values: Vec<f64> = grid
        .iter()
        .map(|&w| {
            let w2 = w * w;
            let numerator = w2 + kappa * total + kappa0 * total * pump_regularity / 2.0;
            let re = w2 - kappa_tilde * (2.0 * kappa + kappa0);
            let im = w * (2.0 * kappa_tilde + total);
            1.0 - 2.0 * kappa_tilde * kappa_tilde * numerator / (re * re + im * im)
        })
        .collect();
    SpectrumCurve::new(
        grid.to_vec(),
        values,
        CurveMeta::new("coupled").with_params(format!(
            "p={pump_regularity} kappa={kappa} kappa_tilde={kappa_tilde} kappa0={kappa0}"
        )),
    )
}

/// Measuring-laser photocurrent when the exciting laser sits in the feedback
/// loop, for a Poissonian pump and `kappa = kappa_tilde = 1` grid units.
///
/// `ratio` is the coupling ratio kappa0/kappa. The curve exceeds the shot
/// floor at low frequency for strong coupling and strong feedback: the loop
/// makes the light super-Poissonian even while the in-loop photocurrent is
/// squeezed.
pub fn s_coupled_fbl(efficiency: f64, ratio: f64, grid: &[f64]) -> Result<SpectrumCurve> {
    check_rate("ratio", ratio)?;
    s_coupled_fbl_general(efficiency, 1.0, 1.0, ratio, grid)
}

/// General form of the loop-coupled spectrum with all mode widths explicit.
/// Only the Poissonian-pump case has a closed form; other pump statistics go
/// through the linear-response engine.
pub fn s_coupled_fbl_general(
    efficiency: f64,
    kappa: f64,
    kappa_tilde: f64,
    kappa0: f64,
    grid: &[f64],
) -> Result<SpectrumCurve> {
    check_gain(efficiency)?;
    check_rate("kappa", kappa)?;
    check_rate("kappa_tilde", kappa_tilde)?;
    check_rate("kappa0", kappa0)?;
    let x = kappa0 / kappa;
    let l = efficiency;
    let pump_term = 1.0 + l * (2.0 + x) + l * l * (1.0 + x) * (1.0 - x / 2.0);
    let values: Vec<f64> = grid
        .iter()
        .map(|&w| {
            let w2 = w * w;
            let numerator = w2 + kappa * kappa * (1.0 + x) * pump_term;
            let re = w2 - kappa_tilde * kappa * (2.0 + x + 2.0 * l * (1.0 + x));
            let im = w * (2.0 * kappa_tilde + kappa * (1.0 + x) * (1.0 + l));
            1.0 - 2.0 * kappa_tilde * kappa_tilde * numerator / (re * re + im * im)
        })
        .collect();
    SpectrumCurve::new(
        grid.to_vec(),
        values,
        CurveMeta::new("coupled-fbl").with_params(format!(
            "p=0 lambda={efficiency} kappa={kappa} kappa_tilde={kappa_tilde} kappa0={kappa0}"
        )),
    )
}

/// Strong-coupling, strong-feedback limit of the loop-coupled spectrum:
/// `1 + (x/4) * 4 / (omega^2 + 4)` with unit mode widths.
pub fn s_strong_limit(ratio: f64, grid: &[f64]) -> Result<SpectrumCurve> {
    check_rate("ratio", ratio)?;
    let values: Vec<f64> = grid
        .iter()
        .map(|&w| 1.0 + ratio * (1.0 / (w * w + 4.0)))
        .collect();
    SpectrumCurve::new(
        grid.to_vec(),
        values,
        CurveMeta::new("strong-limit").with_params(format!("x={ratio}")),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{default_grid, deviation, linear_grid, log_grid};

    #[test]
    fn single_spot_values() {
        let grid = [0.0, 1.0, 2.0];
        let poisson = s_single(0.0, &grid).unwrap();
        assert!(poisson.values().iter().all(|&v| v == 1.0));

        let regular = s_single(1.0, &grid).unwrap();
        assert_eq!(regular.values()[0], 0.0);
        assert_eq!(regular.values()[1], 0.5);

        let half = s_single(0.5, &grid).unwrap();
        assert!((half.values()[2] - 0.9).abs() < 1e-15);

        let super_poisson = s_single(-1.0, &grid).unwrap();
        assert_eq!(super_poisson.values()[0], 2.0);
    }

    #[test]
    fn fbl_reduces_to_single_at_zero_gain() {
        let grid = default_grid();
        for p in [-1.0, 0.0, 0.5, 1.0] {
            let a = s_fbl(p, 0.0, &grid).unwrap();
            let b = s_single(p, &grid).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn fbl_squeezing_spot_values() {
        let grid = [0.0];
        // (1-p)/(1+lambda)^2 at zero frequency.
        let v = s_fbl(0.0, 9.0, &grid).unwrap().values()[0];
        assert!((v - 0.01).abs() < 1e-15);
        let v = s_fbl(1.0, 9.0, &grid).unwrap().values()[0];
        assert!(v.abs() < 1e-15);
        let v = s_fbl(1.0, 1e6, &grid).unwrap().values()[0];
        assert!(v.abs() <= 1e-12);
        let v = s_fbl(-1.0, 9.0, &grid).unwrap().values()[0];
        assert!((v - 0.02).abs() < 1e-15);
    }

    #[test]
    fn coupled_spot_values_by_substitution() {
        let grid = [0.0];
        // kappa=kappa_tilde=1, kappa0=100: numerator 2*(101 + 50.5*101*p),
        // denominator 102^2 = 10404 at zero frequency.
        let v = s_coupled(0.0, 1.0, 1.0, 100.0, &grid).unwrap().values()[0];
        assert!((v - (1.0 - 202.0 / 10404.0)).abs() < 1e-15);
        let v = s_coupled(1.0, 1.0, 1.0, 100.0, &grid).unwrap().values()[0];
        assert!((v - (1.0 - 10302.0 / 10404.0)).abs() < 1e-15);
    }

    #[test]
    fn coupled_collapses_onto_single_for_strong_coupling() {
        let grid = linear_grid(0.0, 20.0, 512);
        for p in [0.0, 1.0] {
            for x in [100.0, 1e3, 1e4] {
                let coupled = s_coupled(p, 1.0, 1.0, x, &grid).unwrap();
                let single = s_single(p, &grid).unwrap();
                let dev = deviation(&coupled, &single).unwrap();
                assert!(
                    dev.max_abs <= 3.0 / x,
                    "x={x} p={p}: dev {} > {}",
                    dev.max_abs,
                    3.0 / x
                );
            }
        }
    }

    #[test]
    fn coupled_fbl_reduces_to_coupled_at_zero_gain() {
        let grid = default_grid();
        let a = s_coupled_fbl(0.0, 100.0, &grid).unwrap();
        let b = s_coupled(0.0, 1.0, 1.0, 100.0, &grid).unwrap();
        let dev = deviation(&a, &b).unwrap();
        assert!(dev.max_abs <= 1e-12, "dev {}", dev.max_abs);
    }

    #[test]
    fn coupled_fbl_zero_frequency_by_substitution() {
        // lambda = x = 100: numerator 2*101*(1 + 100*102 + 1e4*101*(-49)),
        // denominator (2 + 100 + 2*100*101)^2.
        let grid = [0.0];
        let v = s_coupled_fbl(100.0, 100.0, &grid).unwrap().values()[0];
        let expected = 1.0 + 9_994_919_398.0 / 412_171_204.0;
        assert!((v - expected).abs() < 1e-9);
        // Super-shot and in the vicinity of 1 + x/4 = 26.
        assert!(v > 1.0);
        assert!((v - 26.0).abs() < 1.0);
    }

    #[test]
    fn coupled_fbl_super_poissonian_above_x_two() {
        // The sign flip sits at x = 2; anything above goes super-shot at low
        // frequency once the loop gain is large.
        let grid = [0.0, 0.5, 1.0];
        for x in [2.5, 10.0, 100.0, 1e3] {
            for l in [10.0, 100.0, 1e3] {
                let curve = s_coupled_fbl(l, x, &grid).unwrap();
                assert!(curve.values()[0] > 1.0, "x={x} lambda={l}");
            }
        }
    }

    #[test]
    fn strong_limit_spot_values() {
        let grid = [0.0, 2.0];
        let curve = s_strong_limit(100.0, &grid).unwrap();
        assert!((curve.values()[0] - 26.0).abs() < 1e-12);
        assert!((curve.values()[1] - 13.5).abs() < 1e-12);
    }

    #[test]
    fn strong_limit_approximates_coupled_fbl_at_large_gain() {
        let grid = linear_grid(0.0, 10.0, 512);
        let exact = s_coupled_fbl(1e3, 1e3, &grid).unwrap();
        let limit = s_strong_limit(1e3, &grid).unwrap();
        for (a, b) in exact.values().iter().zip(limit.values()) {
            assert!((a - b).abs() / b <= 0.05, "{a} vs {b}");
        }
    }

    #[test]
    fn all_curves_reach_shot_floor_at_high_frequency() {
        let mut grid = log_grid(1.0, 1e3, 64);
        grid.push(2e3);
        let curves = [
            s_single(1.0, &grid).unwrap(),
            s_fbl(0.0, 9.0, &grid).unwrap(),
            s_coupled(1.0, 1.0, 1.0, 100.0, &grid).unwrap(),
            s_coupled_fbl(1e3, 1e3, &grid).unwrap(),
            s_strong_limit(1e3, &grid).unwrap(),
        ];
        for curve in &curves {
            let idx = curve.omega().iter().position(|&w| w >= 1e3).unwrap();
            for v in &curve.values()[idx..] {
                assert!((v - 1.0).abs() <= 1e-3, "{} at high frequency: {v}", curve.meta.label);
            }
        }
    }

    #[test]
    fn rejects_out_of_domain_parameters() {
        let grid = [0.0, 1.0];
        assert!(s_single(1.5, &grid).is_err());
        assert!(s_fbl(0.0, -1.0, &grid).is_err());
        assert!(s_coupled(0.0, 0.0, 1.0, 1.0, &grid).is_err());
        assert!(s_coupled_fbl(1.0, 0.0, &grid).is_err());
        assert!(s_strong_limit(-1.0, &grid).is_err());
    }
}
