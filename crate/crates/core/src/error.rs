use thiserror::Error;

/// Errors raised by the numerical routines and problem loading.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {0} is not finite")]
    NonFinite(String),

    #[error("point {0} lies outside the domain")]
    OutsideDomain(String),

    #[error("Green function pole: evaluation point coincides with the pole at {0}")]
    Pole(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid marked point data: {0}")]
    InvalidMarkedPoint(String),

    #[error("invalid gain function: {0}")]
    InvalidGain(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("invalid weight data: {0}")]
    InvalidWeight(String),

    #[error("jet order mismatch at marked point {index}: ord(g) = {divisor_order}, expected {expected}")]
    OrderMismatch {
        index: usize,
        divisor_order: usize,
        expected: usize,
    },

    #[error("weighted integrand is not integrable near {0}")]
    NonIntegrable(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("constraint system is rank deficient: {0}")]
    RankDeficient(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("operation requires the trivial weight: {0}")]
    NontrivialWeight(String),

    #[error("invalid problem file: {0}")]
    Problem(String),

    #[error("at r = {r}: {source}")]
    AtGridPoint { r: f64, source: Box<Error> },
}

impl Error {
    /// Whether the error reflects bad input rather than a numerical failure.
    pub fn is_input(&self) -> bool {
        match self {
            Error::Quadrature(_) | Error::Solver(_) | Error::RankDeficient(_) => false,
            Error::AtGridPoint { source, .. } => source.is_input(),
            _ => true,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn fmt_point(z: num_complex::Complex64) -> String {
    format!("({}, {})", z.re, z.im)
}
