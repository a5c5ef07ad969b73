//! Calorimetric single-photon spectroscopy toolkit.
//!
//! Measures photon wavelengths without dispersive elements by exploiting the
//! energy resolution of transition-edge-sensor (TES) microcalorimeters:
//!
//! - [`simulate`] generates TES trace records with known ground truth,
//! - [`dsp`] turns raw traces into pulse areas via matched filtering,
//! - [`fit`] finds photon-number peaks and the detector energy response,
//! - [`spectro`] converts calibrated histograms into wavelength estimates
//!   with propagated one-sigma uncertainties,
//! - [`wgm`] predicts signal/idler tuning curves of a whispering-gallery-mode
//!   parametric source for cross-validation,
//! - [`io`] defines the trace binary format and the CSV/JSON exchange files.

pub mod config;
pub mod dsp;
pub mod error;
pub mod fit;
pub mod io;
pub mod simulate;
pub mod spectro;
pub mod units;
pub mod wgm;

mod lm;

pub use error::{Error, Result};
