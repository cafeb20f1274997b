//! Shot-normalized photocurrent noise spectra for a single-mode laser, a laser
//! inside a negative feedback loop, and a pair of strongly coupled lasers where
//! the second (three-level) laser acts as a measuring device for the first.
//!
//! The same physical quantity — the photocurrent spectral density divided by the
//! mean current, so that a Poissonian photoelectron stream sits at 1 — is
//! computed by three independent routes that cross-validate each other:
//!
//! * [`analytic`] — closed-form curves for each configuration;
//! * [`engine`] — a generic frequency-domain solver for linear Langevin systems
//!   driven by white sources with an arbitrary (possibly indefinite) correlation
//!   matrix;
//! * [`sim`] + [`estimator`] — an event-level Monte Carlo of pump, cavity loss,
//!   detection and feedback, followed by Welch spectral estimation of the
//!   photoelectron train.
//!
//! Frequencies are angular and expressed in units of the exciting laser's mode
//! width; all other rates use the same unit so that the default configuration
//! simply sets that width to 1.
//!
//! The crate is `no_std`-compatible (`default-features = false,
//! features = ["libm"]`); everything allocates through `alloc` only.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("shotspec-core requires either the `std` or the `libm` feature");

pub mod analytic;
pub mod curve;
pub mod engine;
pub mod error;
pub mod estimator;
pub mod linalg;
mod math;
pub mod params;
pub mod sim;

mod fft;

pub use curve::{CurveMeta, SpectrumCurve};
pub use error::{Error, Result};
pub use params::{CouplingParams, FeedbackParams, LaserParams, SteadyState, ThreeLevelParams};
