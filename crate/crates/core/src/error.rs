use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("orthogonal states: I + Γ1Γ2 is singular")]
    OrthogonalStates,
    #[error("empty window: no particle weight inside the subsystem")]
    EmptyWindow,
    #[error("degenerate basis: A0^2 - |A1|^2 = {0:e}")]
    DegenerateBasis(f64),
    #[error("prediction undefined: edge-to-edge two-point function vanishes")]
    PredictionUndefined,
    #[error("convention error: imaginary residue {0:e}")]
    Convention(f64),
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}
