use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("time {t} is within {margin} of the kernel singular set {{kπ/2}}")]
    SingularTime { t: f64, margin: f64 },

    #[error("accuracy target missed: {0}")]
    Accuracy(String),

    #[error("degenerate system: {0}")]
    Degenerate(String),

    #[error("non-finite data: {0}")]
    Data(String),

    #[error("resolution too coarse: {0}")]
    Resolution(String),

    #[error("parameter point outside the asymptotic regime: {0}")]
    Regime(String),

    #[error("band limit exceeded: {0}")]
    BandLimit(String),

    #[error("evolution unstable at step {step}: {reason}")]
    Instability { step: usize, reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than by the numerics.
    pub fn is_configuration(&self) -> bool {
        matches!(self, Error::Parameter { .. } | Error::Shape(_))
    }
}
