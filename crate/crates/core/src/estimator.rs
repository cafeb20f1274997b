//! Welch spectral estimation of photoelectron trains, calibrated so a
//! homogeneous Poisson train estimates to exactly 1 at every analysis
//! frequency.
//!
//! The pipeline is bin -> mean-subtract -> window -> periodogram -> average.
//! Counts in disjoint bins of a Poisson process are independent with variance
//! equal to their mean, so the expected windowed periodogram of the
//! mean-subtracted counts is `mean * (sum w^2 - |W_j|^2 / N)`, where `W_j` is
//! the window's DFT at the analysis bin; dividing by that expression makes
//! the shot floor exactly 1 bin by bin, including the bins next to DC that
//! per-segment mean subtraction biases. Structure below the Nyquist scale is
//! attenuated by the binning filter, which is undone by an explicit
//! `sinc^2(omega dt / 2)` correction of the deviation from the shot floor;
//! the analysis band is capped at half the Nyquist frequency so the
//! correction stays small.
//!
//! Confidence intervals are chi-squared with an effective segment count that
//! discounts window overlap, optionally pooled over logarithmic frequency
//! cells (with a window-dependent discount for the correlation between
//! neighbouring bins).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::curve::{CurveMeta, SpectrumCurve};
use crate::error::{Error, Result};
use crate::fft::Fft;
use crate::linalg::C64;
use crate::math;
use crate::sim::EventTrain;

/// Largest bin width accepted: the analysis must reach 20 frequency units
/// below the Nyquist frequency.
pub const MAX_BIN_DT: f64 = core::f64::consts::PI / 20.0;

/// Default bin width: Nyquist at 200 frequency units, so the binning filter
/// distorts the default band by less than 1% before correction.
pub const DEFAULT_BIN_DT: f64 = core::f64::consts::PI / 200.0;

/// Photoelectron counts on a uniform grid of bins starting at `t0`, bin `k`
/// covering `[t0 + k dt, t0 + (k+1) dt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedCounts {
    counts: Vec<u32>,
    dt: f64,
    t0: f64,
}

impl BinnedCounts {
    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    /// Mean count per bin.
    pub fn mean(&self) -> f64 {
        if self.counts.is_empty() {
            0.0
        } else {
            self.total() as f64 / self.counts.len() as f64
        }
    }
}

/// Streaming binner for timestamps that never need to be stored whole.
/// Timestamps must be non-negative; those at or beyond `n_bins * dt` fall
/// outside the covered range and are dropped.
#[derive(Debug, Clone)]
pub struct BinAccumulator {
    counts: Vec<u32>,
    dt: f64,
}

impl BinAccumulator {
    /// Bins covering `[0, span)`, truncated to whole bins.
    pub fn new(dt: f64, span: f64) -> Result<Self> {
        if dt <= 0.0 || !dt.is_finite() {
            return Err(Error::InvalidParameter {
                name: "dt",
                value: dt,
                reason: "must be finite and > 0",
            });
        }
        if dt > MAX_BIN_DT {
            return Err(Error::BinWidthTooCoarse {
                dt,
                max: MAX_BIN_DT,
            });
        }
        let n_bins = (span / dt) as usize;
        if n_bins == 0 {
            return Err(Error::InvalidParameter {
                name: "span",
                value: span,
                reason: "must cover at least one bin",
            });
        }
        Ok(BinAccumulator {
            counts: vec![0u32; n_bins],
            dt,
        })
    }

    #[inline]
    pub fn push(&mut self, t: f64) {
        debug_assert!(t >= 0.0);
        let idx = (t / self.dt) as usize;
        if let Some(c) = self.counts.get_mut(idx) {
            *c += 1;
        }
    }

    pub fn into_counts(self) -> BinnedCounts {
        BinnedCounts {
            counts: self.counts,
            dt: self.dt,
            t0: 0.0,
        }
    }
}

/// Bin an event train on the half-open grid `[k dt, (k+1) dt)`; the covered
/// range is the largest whole number of bins inside `[0, t_end]`, and the
/// count total equals the number of events inside that range exactly.
pub fn bin_events(train: &EventTrain, dt: f64) -> Result<BinnedCounts> {
    if train.is_empty() {
        return Err(Error::EmptyTrain);
    }
    let mut acc = BinAccumulator::new(dt, train.t_end())?;
    for &t in train.times() {
        acc.push(t);
    }
    Ok(acc.into_counts())
}

/// Window applied to each Welch segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    /// No tapering; used for calibration checks.
    Rectangular,
    /// Periodic Hann taper; the default bias/variance trade-off.
    Hann,
}

/// Welch estimator configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct WelchConfig {
    /// Bins per segment; must be a power of two, at least 64.
    pub segment_length: usize,
    /// Segment overlap fraction in [0, 0.5].
    pub overlap: f64,
    pub window: Window,
    /// Minimum number of segments required for the chi-squared confidence
    /// intervals to be meaningful.
    pub min_segments: usize,
    /// Analysis band (angular frequency); the effective upper edge is also
    /// capped at half the Nyquist frequency of the binning.
    pub band: (f64, f64),
    /// Pool the corrected estimate into at most this many logarithmically
    /// spaced cells; `None` keeps the raw FFT bin grid.
    pub log_bins: Option<usize>,
}

impl Default for WelchConfig {
    fn default() -> Self {
        WelchConfig {
            segment_length: 4096,
            overlap: 0.5,
            window: Window::Hann,
            min_segments: 64,
            band: (0.05, 20.0),
            log_bins: None,
        }
    }
}

fn window_coefficients(window: Window, n: usize) -> Vec<f64> {
    match window {
        Window::Rectangular => vec![1.0; n],
        Window::Hann => (0..n)
            .map(|k| 0.5 * (1.0 - math::cos(2.0 * core::f64::consts::PI * k as f64 / n as f64)))
            .collect(),
    }
}

/// |W_j|^2 / N for the mean-subtraction bias correction: the periodic Hann
/// window's DFT is supported on j in {0, +-1}, the rectangular window's on 0.
fn window_dft_power_over_n(window: Window, n: usize, j: usize) -> f64 {
    let nf = n as f64;
    match window {
        Window::Rectangular => {
            if j == 0 {
                nf
            } else {
                0.0
            }
        }
        Window::Hann => {
            if j == 0 {
                nf / 4.0
            } else if j == 1 || j == n - 1 {
                nf / 16.0
            } else {
                0.0
            }
        }
    }
}

/// First analysis bin free of the window's main-lobe leakage around DC.
fn first_clean_bin(window: Window) -> usize {
    match window {
        Window::Rectangular => 1,
        Window::Hann => 2,
    }
}

/// Variance inflation when pooling `n_pool` neighbouring periodogram bins of
/// a windowed estimate: 1 + 2 sum_d rho_d^2 (n-d)/n with rho_d the bin-to-bin
/// correlation of the window.
fn pooling_inflation(window: Window, n_pool: usize) -> f64 {
    let rho2: &[f64] = match window {
        Window::Rectangular => &[],
        // |W2(1)/W2(0)|^2 = (2/3)^2, |W2(2)/W2(0)|^2 = (1/6)^2 for Hann.
        Window::Hann => &[4.0 / 9.0, 1.0 / 36.0],
    };
    let n = n_pool as f64;
    let mut inflation = 1.0;
    for (d, r2) in rho2.iter().enumerate() {
        let lag = (d + 1) as f64;
        if lag < n {
            inflation += 2.0 * r2 * (n - lag) / n;
        }
    }
    inflation
}

/// Chi-squared quantile via the Wilson-Hilferty cube approximation; accurate
/// well below a percent for the segment counts enforced here.
fn chi_squared_quantile(dof: f64, z: f64) -> f64 {
    let a = 2.0 / (9.0 * dof);
    let core = 1.0 - a + z * math::sqrt(a);
    dof * core * core * core
}

const Z_975: f64 = 1.959963984540054;

struct BandBins {
    /// Index of the first analysis bin.
    j_min: usize,
    /// Index of the last analysis bin (inclusive).
    j_max: usize,
}

fn analysis_band(cfg: &WelchConfig, n: usize, dt: f64) -> Result<BandBins> {
    let delta_omega = 2.0 * core::f64::consts::PI / (n as f64 * dt);
    let (lo, hi) = cfg.band;
    if !lo.is_finite() || !hi.is_finite() || lo < 0.0 || hi <= lo {
        return Err(Error::InvalidGrid("analysis band must satisfy 0 <= low < high"));
    }
    let half_nyquist = core::f64::consts::PI / (2.0 * dt);
    let hi = hi.min(half_nyquist);
    let mut j_min = math::ceil(lo / delta_omega) as usize;
    j_min = j_min.max(first_clean_bin(cfg.window));
    let j_max = (math::floor(hi / delta_omega) as usize).min(n / 4);
    if j_max < j_min {
        return Err(Error::InvalidGrid(
            "analysis band is empty for this segment length and bin width",
        ));
    }
    Ok(BandBins { j_min, j_max })
}

/// Welch-averaged, shot-calibrated spectral estimate with 95% confidence
/// bounds.
pub fn estimate_spectrum(counts: &BinnedCounts, cfg: &WelchConfig) -> Result<SpectrumCurve> {
    let n = cfg.segment_length;
    if !n.is_power_of_two() || n < 64 {
        return Err(Error::BadSegmentLength { n });
    }
    if !(0.0..=0.5).contains(&cfg.overlap) {
        return Err(Error::InvalidParameter {
            name: "overlap",
            value: cfg.overlap,
            reason: "must be in [0, 0.5]",
        });
    }
    let hop = (n as f64 * (1.0 - cfg.overlap)) as usize;
    let hop = hop.max(1);
    let n_bins = counts.len();
    let n_segments = if n_bins >= n { (n_bins - n) / hop + 1 } else { 0 };
    let needed = cfg.min_segments.max(2);
    if n_segments < needed {
        return Err(Error::TooFewSegments {
            have: n_segments,
            need: needed,
        });
    }
    let mean_count = counts.mean();
    if mean_count <= 0.0 {
        return Err(Error::ZeroMeanCount);
    }

    let band = analysis_band(cfg, n, counts.dt())?;
    let window = window_coefficients(cfg.window, n);
    let sum_w2: f64 = window.iter().map(|w| w * w).sum();

    // Averaged periodogram |X_j|^2 over the analysis bins.
    let fft = Fft::new(n);
    let mut power_sum = vec![0.0f64; band.j_max - band.j_min + 1];
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for seg in 0..n_segments {
        let start = seg * hop;
        let segment = &counts.counts()[start..start + n];
        let seg_mean = segment.iter().map(|&c| c as f64).sum::<f64>() / n as f64;
        for (slot, (&c, &w)) in buf.iter_mut().zip(segment.iter().zip(window.iter())) {
            *slot = C64::new((c as f64 - seg_mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (slot, j) in power_sum.iter_mut().zip(band.j_min..=band.j_max) {
            *slot += buf[j].norm_sqr();
        }
    }

    // Effective number of independent segments given the overlap.
    let overlap_rho = if hop < n {
        window
            .iter()
            .take(n - hop)
            .zip(window.iter().skip(hop))
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / sum_w2
    } else {
        0.0
    };
    let k = n_segments as f64;
    let k_eff = k / (1.0 + 2.0 * overlap_rho * overlap_rho * (1.0 - 1.0 / k));

    let delta_omega = 2.0 * core::f64::consts::PI / (n as f64 * counts.dt());

    // Shot-calibrated raw estimate and the binning-filter correction per bin.
    let raw_and_sinc: Vec<(f64, f64, f64)> = (band.j_min..=band.j_max)
        .map(|j| {
            let denom = sum_w2 - window_dft_power_over_n(cfg.window, n, j);
            let raw = power_sum[j - band.j_min] / (k * mean_count * denom);
            let omega = j as f64 * delta_omega;
            let x = omega * counts.dt() / 2.0;
            let sinc = math::sin(x) / x;
            (omega, raw, sinc * sinc)
        })
        .collect();

    let correct = |raw: f64, sinc2: f64| 1.0 + (raw - 1.0) / sinc2;

    let mut omega_out = Vec::new();
    let mut value_out = Vec::new();
    let mut ci_low = Vec::new();
    let mut ci_high = Vec::new();

    let mut emit = |omega: f64, raw_mean: f64, sinc2_mean: f64, pooled: usize| {
        let dof = 2.0 * k_eff * pooled as f64 / pooling_inflation(cfg.window, pooled);
        let q_low = chi_squared_quantile(dof, Z_975);
        let q_high = chi_squared_quantile(dof, -Z_975);
        omega_out.push(omega);
        value_out.push(correct(raw_mean, sinc2_mean));
        ci_low.push(correct(raw_mean * dof / q_low, sinc2_mean));
        ci_high.push(correct(raw_mean * dof / q_high, sinc2_mean));
    };

    match cfg.log_bins {
        None => {
            for &(omega, raw, sinc2) in &raw_and_sinc {
                emit(omega, raw, sinc2, 1);
            }
        }
        Some(cells) => {
            let cells = cells.max(1);
            let lo = raw_and_sinc.first().expect("band is non-empty").0;
            let hi = raw_and_sinc.last().expect("band is non-empty").0;
            let log_step = (math::ln(hi) - math::ln(lo)) / cells as f64;
            let mut idx = 0;
            for cell in 0..cells {
                let edge = if cell + 1 == cells {
                    f64::INFINITY
                } else {
                    math::exp(math::ln(lo) + log_step * (cell + 1) as f64)
                };
                let start = idx;
                let mut omega_sum = 0.0;
                let mut raw_sum = 0.0;
                let mut sinc_sum = 0.0;
                while idx < raw_and_sinc.len() && raw_and_sinc[idx].0 < edge {
                    omega_sum += raw_and_sinc[idx].0;
                    raw_sum += raw_and_sinc[idx].1;
                    sinc_sum += raw_and_sinc[idx].2;
                    idx += 1;
                }
                let pooled = idx - start;
                if pooled > 0 {
                    let inv = 1.0 / pooled as f64;
                    emit(omega_sum * inv, raw_sum * inv, sinc_sum * inv, pooled);
                }
            }
        }
    }

    let meta = CurveMeta::new("welch").with_params(format!(
        "segment_length={n} overlap={} window={:?} segments={n_segments} k_eff={k_eff:.1} dt={}",
        cfg.overlap,
        cfg.window,
        counts.dt()
    ));
    SpectrumCurve::with_ci(omega_out, value_out, ci_low, ci_high, meta)
}

/// Inverse-variance weighted mean of spectra estimated on identical grids,
/// with the combined confidence interval. Curves without confidence bounds
/// merge to the plain mean (all or none must carry bounds).
pub fn merge_trajectories(curves: &[SpectrumCurve]) -> Result<SpectrumCurve> {
    let first = curves.first().ok_or(Error::InvalidGrid("no curves to merge"))?;
    if curves.len() == 1 {
        return Ok(first.clone());
    }
    for other in &curves[1..] {
        if !first.same_grid(other) {
            return Err(Error::GridMismatch);
        }
    }
    let with_ci = curves.iter().filter(|c| c.ci_low().is_some()).count();
    if with_ci != 0 && with_ci != curves.len() {
        return Err(Error::MixedConfidenceInfo);
    }
    let n = first.len();
    let mut values = vec![0.0f64; n];

    let mut meta = CurveMeta::new(format!("merged({})", curves.len()));
    meta.params = first.meta.params.clone();
    for curve in curves {
        for warning in &curve.meta.warnings {
            if !meta.warnings.contains(warning) {
                meta.warnings.push(warning.clone());
            }
        }
    }

    if with_ci == 0 {
        for curve in curves {
            for (slot, v) in values.iter_mut().zip(curve.values()) {
                *slot += v / curves.len() as f64;
            }
        }
        return SpectrumCurve::new(first.omega().to_vec(), values, meta);
    }

    let mut ci_low = vec![0.0f64; n];
    let mut ci_high = vec![0.0f64; n];
    for i in 0..n {
        let mut weight_sum = 0.0;
        let mut weighted_value = 0.0;
        for curve in curves {
            let low = curve.ci_low().expect("checked above")[i];
            let high = curve.ci_high().expect("checked above")[i];
            let sigma = ((high - low) / (2.0 * Z_975)).max(f64::MIN_POSITIVE);
            let weight = 1.0 / (sigma * sigma);
            weight_sum += weight;
            weighted_value += weight * curve.values()[i];
        }
        let value = weighted_value / weight_sum;
        let sigma = 1.0 / math::sqrt(weight_sum);
        values[i] = value;
        ci_low[i] = value - Z_975 * sigma;
        ci_high[i] = value + Z_975 * sigma;
    }
    SpectrumCurve::with_ci(first.omega().to_vec(), values, ci_low, ci_high, meta)
}

/// Fano factor of the counts pooled into non-overlapping windows of
/// `bins_per_window` bins: variance over mean of the window sums. The
/// long-window limit estimates the zero-frequency shot-normalized spectrum.
pub fn fano_from_counts(counts: &BinnedCounts, bins_per_window: usize) -> Result<f64> {
    if bins_per_window == 0 {
        return Err(Error::InvalidParameter {
            name: "bins_per_window",
            value: 0.0,
            reason: "must be >= 1",
        });
    }
    let n_windows = counts.len() / bins_per_window;
    if n_windows < 16 {
        return Err(Error::InvalidParameter {
            name: "bins_per_window",
            value: bins_per_window as f64,
            reason: "record too short: need at least 16 windows",
        });
    }
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for w in 0..n_windows {
        let start = w * bins_per_window;
        let total: u64 = counts.counts()[start..start + bins_per_window]
            .iter()
            .map(|&c| c as u64)
            .sum();
        let total = total as f64;
        sum += total;
        sum_sq += total * total;
    }
    let mean = sum / n_windows as f64;
    if mean == 0.0 {
        return Err(Error::ZeroMeanCount);
    }
    let var = (sum_sq - sum * sum / n_windows as f64) / (n_windows as f64 - 1.0);
    Ok(var / mean)
}
