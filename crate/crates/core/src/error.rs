use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("beyond capability: {0}")]
    Capability(String),
    #[error("atoms with zero inner weight cannot be canonicalized: indices {0:?}")]
    DegenerateAtoms(Vec<usize>),
    #[error("measure has zero total weight")]
    DegenerateMeasure,
    #[error("non-finite value at x = {x:?}")]
    NonFinite { x: Vec<f64> },
    #[error("training failed: {msg}")]
    Training { msg: String, trace: Vec<f64> },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the computation itself rather than of its inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. } | Error::Training { .. } | Error::Numerical(_)
        )
    }
}
