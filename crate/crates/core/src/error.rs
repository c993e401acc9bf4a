use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Malformed Touchstone structure (option line, keywords).
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    /// Malformed Touchstone data rows.
    #[error("line {line}: {message}")]
    Data { line: usize, message: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{what} {value:e} outside [{min:e}, {max:e}]")]
    OutOfRange { what: &'static str, value: f64, min: f64, max: f64 },

    #[error("degenerate dispersive pair: both states resonate at {0:e} Hz")]
    DegeneratePair(f64),

    #[error("degenerate ensemble: {0}")]
    DegenerateEnsemble(String),

    #[error(
        "calibration infeasible: target error {target:e} not bracketed by \
         error({b_low:e}) = {error_low:e} and error({b_high:e}) = {error_high:e}"
    )]
    CalibrationInfeasible { target: f64, b_low: f64, error_low: f64, b_high: f64, error_high: f64 },

    #[error("knee not bracketed: threshold {threshold:e} outside swept errors [{min_error:e}, {max_error:e}]")]
    KneeNotBracketed { threshold: f64, min_error: f64, max_error: f64 },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
