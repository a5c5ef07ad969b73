//! Error types shared across the toolkit.

use thiserror::Error;

/// Toolkit-wide error type.
///
/// Variants map onto the stable CLI exit-code classes: configuration/input
/// problems, file-format violations, fit/calibration failures, and
/// out-of-range lookups.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical quantity is outside its validity window.
    #[error("domain error: {0}")]
    Domain(String),

    /// A file or in-memory structure violates its format contract.
    #[error("format error: {0}")]
    Format(String),

    /// Input data is unusable (empty, too few counts, no candidates).
    #[error("data error: {0}")]
    Data(String),

    /// Nonlinear fit failed to converge or the normal equations were singular.
    #[error("fit error after {iterations} iterations (cost {cost:.6e}): {message}")]
    Fit {
        message: String,
        iterations: usize,
        cost: f64,
    },

    /// Detector calibration could not be constructed.
    #[error("calibration error: {0}")]
    Calibration(String),

    /// A value falls outside the image of a calibrated mapping.
    #[error("range error: {0}")]
    Range(String),

    /// An iterative numerical method failed to converge.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Configuration file is invalid.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
