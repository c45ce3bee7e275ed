use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("context mismatch between operands")]
    ContextMismatch,

    #[error("operation requires a Kähler context")]
    NotKahler,

    #[error("operation is not defined for a Kähler context")]
    KahlerUnsupported,

    #[error("unsupported dimension {dim}: {reason}")]
    UnsupportedDimension { dim: usize, reason: &'static str },

    #[error("unsupported signature ({p},{q}): {reason}")]
    UnsupportedSignature { p: usize, q: usize, reason: &'static str },

    #[error("{what}: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    Invariant { what: String, residual: f64, tol: f64 },

    #[error("{what}: routes disagree by {residual:.3e} (tolerance {tol:.3e})\n  recipe:  {recipe}\n  closed:  {closed}")]
    RouteMismatch {
        what: String,
        residual: f64,
        tol: f64,
        recipe: String,
        closed: String,
    },

    #[error("space {0} is the zero space in this dimension")]
    EmptySpace(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invariant(what: impl Into<String>, residual: f64, tol: f64) -> Self {
        Error::Invariant { what: what.into(), residual, tol }
    }
}

/// Fails with [`Error::Invariant`] when `residual > tol`.
pub(crate) fn ensure(what: &str, residual: f64, tol: f64) -> Result<()> {
    if residual.is_nan() || residual > tol {
        Err(Error::invariant(what, residual, tol))
    } else {
        Ok(())
    }
}
