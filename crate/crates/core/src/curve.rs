//! Spectrum curves: a frequency grid with shot-normalized spectral values and
//! optional confidence bounds.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Scenario label, parameter echo and accumulated warnings carried alongside a
/// curve so that serialized outputs stay self-describing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CurveMeta {
    pub label: String,
    pub params: String,
    pub seed: Option<u64>,
    pub warnings: Vec<String>,
}

impl CurveMeta {
    pub fn new(label: impl Into<String>) -> Self {
        CurveMeta {
            label: label.into(),
            ..CurveMeta::default()
        }
    }

    pub fn with_params(mut self, params: impl Into<String>) -> Self {
        self.params = params.into();
        self
    }
}

/// Shot-normalized spectral density sampled on an ordered frequency grid.
///
/// Frequencies are angular, non-negative and expressed in units of the
/// exciting laser's mode width. Values are dimensionless; the shot floor of a
/// Poissonian photoelectron stream is 1. Estimated curves additionally carry
/// 95% confidence bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCurve {
    omega: Vec<f64>,
    values: Vec<f64>,
    ci_low: Option<Vec<f64>>,
    ci_high: Option<Vec<f64>>,
    pub meta: CurveMeta,
}

impl SpectrumCurve {
    /// A curve without confidence information (closed forms, engine output).
    pub fn new(omega: Vec<f64>, values: Vec<f64>, meta: CurveMeta) -> Result<Self> {
        Self::build(omega, values, None, None, meta)
    }

    /// A curve with per-frequency 95% confidence bounds (estimator output).
    pub fn with_ci(
        omega: Vec<f64>,
        values: Vec<f64>,
        ci_low: Vec<f64>,
        ci_high: Vec<f64>,
        meta: CurveMeta,
    ) -> Result<Self> {
        Self::build(omega, values, Some(ci_low), Some(ci_high), meta)
    }

    fn build(
        omega: Vec<f64>,
        values: Vec<f64>,
        ci_low: Option<Vec<f64>>,
        ci_high: Option<Vec<f64>>,
        meta: CurveMeta,
    ) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::InvalidGrid("empty"));
        }
        if omega.len() != values.len() {
            return Err(Error::ShapeMismatch("omega and values lengths differ"));
        }
        if omega[0] < 0.0 || omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidGrid("frequencies must be finite and >= 0"));
        }
        if omega.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("frequencies must be strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("values must be finite"));
        }
        if let (Some(lo), Some(hi)) = (&ci_low, &ci_high) {
            if lo.len() != omega.len() || hi.len() != omega.len() {
                return Err(Error::ShapeMismatch("confidence bound lengths differ"));
            }
            for (l, h) in lo.iter().zip(hi.iter()) {
                if !l.is_finite() || !h.is_finite() || l > h {
                    return Err(Error::InvalidGrid("confidence bounds must be finite with low <= high"));
                }
            }
        }
        Ok(SpectrumCurve {
            omega,
            values,
            ci_low,
            ci_high,
            meta,
        })
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ci_low(&self) -> Option<&[f64]> {
        self.ci_low.as_deref()
    }

    pub fn ci_high(&self) -> Option<&[f64]> {
        self.ci_high.as_deref()
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Grids must match bit-for-bit for pointwise comparison or merging.
    pub fn same_grid(&self, other: &SpectrumCurve) -> bool {
        self.omega.len() == other.omega.len()
            && self
                .omega
                .iter()
                .zip(other.omega.iter())
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// Largest pointwise deviation between two curves on a shared grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    pub max_abs: f64,
    pub omega_at_abs: f64,
    /// Relative deviation |a-b| / max(|a|, |b|, 1); the floor keeps the ratio
    /// meaningful where a shot-normalized curve passes through zero.
    pub max_rel: f64,
    pub omega_at_rel: f64,
}

/// Pointwise deviation of `a` from `b`. Errors if the grids differ.
pub fn deviation(a: &SpectrumCurve, b: &SpectrumCurve) -> Result<Deviation> {
    if !a.same_grid(b) {
        return Err(Error::GridMismatch);
    }
    let mut dev = Deviation {
        max_abs: 0.0,
        omega_at_abs: a.omega[0],
        max_rel: 0.0,
        omega_at_rel: a.omega[0],
    };
    for ((&w, &va), &vb) in a.omega.iter().zip(a.values.iter()).zip(b.values.iter()) {
        let abs = (va - vb).abs();
        let rel = abs / va.abs().max(vb.abs()).max(1.0);
        if abs > dev.max_abs {
            dev.max_abs = abs;
            dev.omega_at_abs = w;
        }
        if rel > dev.max_rel {
            dev.max_rel = rel;
            dev.omega_at_rel = w;
        }
    }
    Ok(dev)
}

/// `n` equally spaced points covering `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return alloc::vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

/// `n` logarithmically spaced points covering `[lo, hi]`, `lo > 0`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return alloc::vec![lo];
    }
    let (llo, lhi) = (math::ln(lo), math::ln(hi));
    let step = (lhi - llo) / (n - 1) as f64;
    let mut grid: Vec<f64> = (0..n).map(|i| math::exp(llo + step * i as f64)).collect();
    // Pin the endpoints against rounding so grids are reproducible.
    grid[0] = lo;
    grid[n - 1] = hi;
    grid
}

/// Default analysis grid: zero frequency plus 512 logarithmic points over
/// [1e-2, 1e2] mode widths.
pub fn default_grid() -> Vec<f64> {
    let mut grid = alloc::vec![0.0];
    grid.extend(log_grid(1e-2, 1e2, 512));
    grid
}
