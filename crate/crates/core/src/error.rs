use crate::argfield::ArgGradient;
use thiserror::Error;

/// Errors raised by the numeric layers of the crate.
///
/// Certification failures are not errors: they are returned as
/// [`crate::certifier::CertificateFailure`] values.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid rectangle: {0}")]
    InvalidRectangle(String),

    #[error("invalid numeric policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("evaluation hit a pole at ({sigma}, {t})")]
    PoleHit { sigma: f64, t: f64 },

    #[error("point ({sigma}, {t}) is within {distance} of a zero or pole")]
    NearSingularity { sigma: f64, t: f64, distance: f64 },

    #[error("polynomial degree {degree} exceeds the supported maximum {max}")]
    DegreeTooLarge { degree: usize, max: usize },

    #[error("argument undefined for w = {re} + {im}i (real part is zero)")]
    UndefinedArgument { re: f64, im: f64 },

    #[error(
        "gradient routes disagree at ({sigma}, {t}): fd={fd:?} logd={logd:?} factor_sum={factor_sum:?}"
    )]
    RouteDisagreement {
        sigma: f64,
        t: f64,
        fd: ArgGradient,
        logd: ArgGradient,
        factor_sum: Option<ArgGradient>,
    },

    #[error("region is empty")]
    EmptyRegion,

    #[error("region touches a zero or pole at ({sigma}, {t})")]
    RegionTouchesSingularity { sigma: f64, t: f64 },

    #[error("truncation {n} too small: {reason}")]
    TruncationTooSmall { n: usize, reason: String },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("ordinates not strictly increasing at line {line}")]
    NonMonotone { line: usize },

    #[error("off-line derivative zero at ({sigma}, {t})")]
    OffLineRoot { sigma: f64, t: f64 },

    #[error("exclusion band around the critical line could not be certified: {0}")]
    BandNotCertified(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
