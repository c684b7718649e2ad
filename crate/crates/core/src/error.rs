use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown graph generator `{0}`")]
    UnknownGenerator(String),

    #[error("generator `{name}`: {message}")]
    GeneratorParameter { name: String, message: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph file parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix of dimension {dim} exceeds the configured cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("matrix is not Hermitian: |H[{row}][{col}] - conj(H[{col}][{row}])| = {deviation:e}")]
    NotHermitian {
        row: usize,
        col: usize,
        deviation: f64,
    },

    #[error("eigendecomposition of {name} did not converge (residual {residual:e})")]
    NonConvergence { name: String, residual: f64 },

    #[error("detection period must be positive and finite, got {0}")]
    InvalidPeriod(f64),

    #[error("graph has {nodes} nodes, automorphism search is capped at {cap}")]
    NodeCap { nodes: usize, cap: usize },

    #[error(
        "automorphism group order exceeds the limit of {limit}; \
         supply a generator-based workflow or raise the limit"
    )]
    GroupTooLarge { limit: usize },

    #[error("AUS undefined, initial state orthogonal to symmetric subspace (weight {weight:e})")]
    AusUndefined { weight: f64 },

    #[error("input states are not orthonormal (deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

impl Error {
    /// True for failures of the numerical kernels, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::AusUndefined { .. }
        )
    }
}
