//! Crate-wide error type.

use alloc::string::String;
use core::fmt;

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong while building models, simulating or
/// estimating spectra.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A physical parameter is outside its domain.
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    /// A frequency grid is empty, unsorted or non-finite.
    InvalidGrid(&'static str),
    /// Matrix/vector dimensions do not line up.
    ShapeMismatch(&'static str),
    /// The source correlation matrix is not symmetric.
    AsymmetricCorrelation { max_dev: f64 },
    /// The drift matrix has an eigenvalue with non-positive real part.
    UnstableDrift { scenario: String },
    /// The steady state handed to the engine does not match the scenario.
    InconsistentSteadyState(&'static str),
    /// The event sampler only supports pump regularity in [0, 1].
    PumpRegularityOutOfRange { value: f64 },
    /// An event train without events cannot be binned or estimated.
    EmptyTrain,
    /// Bin width too coarse for the requested analysis band.
    BinWidthTooCoarse { dt: f64, max: f64 },
    /// Welch segment length must be a power of two (and at least 64).
    BadSegmentLength { n: usize },
    /// Not enough segments for a meaningful averaged periodogram.
    TooFewSegments { have: usize, need: usize },
    /// The binned record has zero mean count; nothing to normalize by.
    ZeroMeanCount,
    /// Two curves that must share a grid do not.
    GridMismatch,
    /// Merging requires either all curves or none to carry confidence bounds.
    MixedConfidenceInfo,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter {
                name,
                value,
                reason,
            } => write!(f, "invalid parameter {name} = {value}: {reason}"),
            Error::InvalidGrid(why) => write!(f, "invalid frequency grid: {why}"),
            Error::ShapeMismatch(what) => write!(f, "shape mismatch: {what}"),
            Error::AsymmetricCorrelation { max_dev } => {
                write!(f, "source correlation matrix is not symmetric (max deviation {max_dev:e})")
            }
            Error::UnstableDrift { scenario } => {
                write!(f, "unstable drift matrix for scenario {scenario}")
            }
            Error::InconsistentSteadyState(what) => {
                write!(f, "steady state inconsistent with scenario: {what}")
            }
            Error::PumpRegularityOutOfRange { value } => write!(
                f,
                "pump regularity {value} outside [0, 1]: the event sampler cannot realize it"
            ),
            Error::EmptyTrain => write!(f, "event train contains no events"),
            Error::BinWidthTooCoarse { dt, max } => {
                write!(f, "bin width {dt} too coarse, need dt <= {max}")
            }
            Error::BadSegmentLength { n } => {
                write!(f, "segment length {n} is not a power of two >= 64")
            }
            Error::TooFewSegments { have, need } => {
                write!(f, "only {have} Welch segments available, need at least {need}")
            }
            Error::ZeroMeanCount => write!(f, "binned record has zero mean count"),
            Error::GridMismatch => write!(f, "curves do not share the same frequency grid"),
            Error::MixedConfidenceInfo => {
                write!(f, "cannot merge curves where only some carry confidence bounds")
            }
        }
    }
}

impl core::error::Error for Error {}
