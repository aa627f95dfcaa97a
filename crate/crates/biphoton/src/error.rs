//! Error type shared across the crate.

use crate::twophoton::FitParams;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A physical argument left its documented validity range.
    #[error("{quantity} = {value:e} outside valid range [{min:e}, {max:e}]")]
    OutOfRange {
        quantity: String,
        value: f64,
        min: f64,
        max: f64,
    },

    /// Malformed or inconsistent caller input.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Configuration file problems (structure, units, unknown identifiers).
    #[error("config: {0}")]
    Config(String),

    /// Text-format parse failure with a 1-based line number.
    #[error("parse error at line {line}: {detail}")]
    Parse { line: usize, detail: String },

    /// The transverse momentum condition (or a refraction inverse) has no
    /// real solution for the requested geometry.
    #[error("geometry infeasible: {0}")]
    Geometry(String),

    /// A grid or trace is too coarse to resolve the requested feature.
    #[error("insufficient resolution: {0}")]
    Resolution(String),

    /// A root search found no sign change in the supplied interval.
    #[error("root not bracketed: {0}")]
    NotBracketed(String),

    /// Temperature-offset calibration could not reach its target.
    #[error("calibration failed: {0}")]
    Calibration(String),

    /// Nonlinear fit ran out of iterations; carries the best point reached.
    #[error("fit did not converge after {iterations} iterations (residual rms {residual_rms:.3e})")]
    FitDidNotConverge {
        iterations: usize,
        residual_rms: f64,
        best: Box<FitParams>,
    },

    /// Internal numerical failure (stalled bisection, singular system, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn out_of_range(quantity: &str, value: f64, min: f64, max: f64) -> Self {
        Error::OutOfRange {
            quantity: quantity.to_string(),
            value,
            min,
            max,
        }
    }

    /// True for errors caused by caller-supplied values, as opposed to
    /// numerical failures encountered during an otherwise valid computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::OutOfRange { .. }
                | Error::InvalidInput(_)
                | Error::Config(_)
                | Error::Parse { .. }
        )
    }
}
