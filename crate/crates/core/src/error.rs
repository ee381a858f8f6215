use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Variants fall into two groups the CLI maps to different exit codes:
/// invalid user input (`InvalidArgument`, `SizeMismatch`, ...) and numeric
/// precondition failures (`SingularPoint`, `Domain`, ...).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("kernel evaluated at its singular point x = 0")]
    SingularPoint,

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature order {order} too low (need at least {min})")]
    QuadratureOrder { order: usize, min: usize },

    #[error("unsupported strain matrix: {0}")]
    UnsupportedStrain(String),

    #[error("matrix is not a symmetry of the lattice")]
    NotALatticeSymmetry,

    #[error("radius {radius} violates d_min > 2R (d_min = {d_min})")]
    RadiusTooLarge { radius: f64, d_min: f64 },

    #[error("rejection sampling gave up after {attempts} attempts")]
    SamplingFailed { attempts: usize },

    #[error("measures have different atom counts ({0} vs {1})")]
    SizeMismatch(usize, usize),

    #[error("instance of size {size} exceeds the solver cap {cap}")]
    TooLarge { size: usize, cap: usize },

    #[error("need at least {need} values, got {got}")]
    InsufficientData { need: usize, got: usize },

    #[error("i/o failure: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
