use thiserror::Error;

/// Errors raised by the constants, certificate, and quadrature routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension {d}: {reason}")]
    InvalidDimension { d: usize, reason: &'static str },

    #[error("unsupported dimension {d} for {backend} (max {max})")]
    UnsupportedDimension {
        d: usize,
        backend: &'static str,
        max: usize,
    },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("point lies on the zero set of the angular factor")]
    OnBoundary,

    #[error("singular point: {0}")]
    SingularPoint(&'static str),

    #[error("outside the domain of the certificate: {0}")]
    Domain(String),

    #[error("angular factor check failed: {0}")]
    FactorCheck(String),

    #[error("trial function is not in the declared symmetry class (residual {residual:.3e})")]
    SymmetryViolation { residual: f64 },

    #[error("{bad} of {total} quadrature samples were non-finite")]
    DegenerateSamples { bad: u64, total: u64 },

    #[error("collar width must be positive for a C2 trial function")]
    NonSmooth,

    #[error("enumeration budget exceeded: d = {d} > {max}")]
    Budget { d: usize, max: usize },

    #[error("usage: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
