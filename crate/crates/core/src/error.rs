use thiserror::Error;

/// Errors for geometry, spectral evaluation and optimization.
#[derive(Debug, Error)]
pub enum Error {
    #[error("manifold mismatch: {0} vs {1}")]
    ManifoldMismatch(String, String),

    #[error("cut locus: {0}")]
    CutLocus(String),

    #[error("nonsmooth point: {0}")]
    NonsmoothPoint(String),

    #[error("not a descent direction (<d, grad F> = {0:e})")]
    NotDescentDirection(f64),

    #[error("line search failed after {0} backtracking steps")]
    LineSearchFailed(usize),

    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(u32, u32),

    #[error("unsupported manifold for this operation: {0}")]
    UnsupportedManifold(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("not invertible: {0}")]
    NotInvertible(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("curve construction failed: {0}")]
    CurveConstruction(String),

    #[error("optimizer failure at iteration {iteration}: {source}")]
    Optimizer {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
