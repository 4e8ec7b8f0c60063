use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A configuration field is outside its admissible range.
    #[error("parameter `{field}` out of range: {reason}")]
    Range { field: String, reason: String },

    /// A function was evaluated outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An alternating binomial sum lost too much precision to be trusted.
    #[error("cancellation error: {0}")]
    Cancellation(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Adaptive quadrature ran out of subdivisions. The best estimate is kept
    /// so callers can decide whether it is still usable.
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (value {value:e}, estimated error {est_error:e})"
    )]
    Convergence {
        value: f64,
        est_error: f64,
        subdivisions: usize,
    },
}

impl Error {
    pub(crate) fn range(field: &str, reason: impl Into<String>) -> Self {
        Error::Range {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}
