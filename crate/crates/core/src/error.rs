use thiserror::Error;

/// Failure of a special-function evaluation.
///
/// Domain violations and overflow are kept apart: the first is a caller bug,
/// the second means the result exists but is not representable in `f64`.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SpecialFnError {
    #[error("{function}: argument {arg} is outside the domain")]
    Domain { function: &'static str, arg: f64 },
    #[error("{function}: result overflows f64 at argument {arg}")]
    Overflow { function: &'static str, arg: f64 },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate tap profile: powers a[{first}] and a[{second}] coincide ({value})")]
    DegenerateProfile {
        first: usize,
        second: usize,
        value: f64,
    },

    #[error(transparent)]
    Special(#[from] SpecialFnError),

    #[error("accuracy shortfall: achieved relative standard error {achieved:.3e} > target {target:.3e}")]
    AccuracyShortfall { achieved: f64, target: f64 },

    #[error("`{method}` transforms cannot be inverted numerically")]
    UnsupportedMethod { method: &'static str },

    #[error("numerical inversion failed its calibration check: {0}")]
    Calibration(String),

    #[error("quadrature did not converge: error estimate {estimate:.3e} above tolerance {tolerance:.3e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("tail truncation error {bound:.3e} exceeds tolerance {tolerance:.3e}")]
    TailTruncation { bound: f64, tolerance: f64 },

    #[error("{0}")]
    Unsupported(String),

    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
