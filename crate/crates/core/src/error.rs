//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not Hermitian: residual {residual:.3e} exceeds {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("invalid angular momentum j = {0}; 2j must be a positive integer")]
    InvalidAngularMomentum(f64),

    #[error("unknown level label '{0}'")]
    UnknownLevel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "ambiguous frame: drives {first} and {second} share matrix element ({upper},{lower}) \
         with different residual frequencies; use a finer frame or detuning tracking"
    )]
    AmbiguousFrame {
        first: usize,
        second: usize,
        upper: String,
        lower: String,
    },

    #[error("step size violation: dt = {dt:.3e} exceeds required {required:.3e}")]
    StepSize { dt: f64, required: f64 },

    #[error("numerical contract violation: {0}")]
    NumericalContract(String),

    #[error("dressed spectrum does not split as expected: {0}")]
    SpectrumMismatch(String),

    #[error("open contour: start and end points differ by {0:.3e}")]
    OpenContour(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
