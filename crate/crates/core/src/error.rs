use thiserror::Error;

/// Errors raised by the numerical laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid geometry: {0}")]
    Geometry(String),

    #[error("fields live on different geometries")]
    GeometryMismatch,

    #[error("invalid field values: {0}")]
    InvalidField(String),

    #[error("non-integrable singularity: {0}")]
    NonIntegrable(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("axiom violation: {0}")]
    AxiomViolation(String),

    #[error("monotonicity violated at iteration {iteration}: drop {drop:e} exceeds tolerance {tolerance:e}")]
    MonotonicityViolation {
        iteration: usize,
        drop: f64,
        tolerance: f64,
    },

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
