use thiserror::Error;

/// Errors raised by the geometry kernels, curve constructions and experiments.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is numerically rank deficient")]
    RankDeficient,

    #[error("singular value iteration did not converge")]
    NoConvergence,

    #[error("leading {size}x{size} block is singular")]
    SingularBlock { size: usize },

    #[error("triangular factor has non-positive diagonal entry {value:e} at index {index}")]
    NegativeDiagonal { index: usize, value: f64 },

    #[error("vectorized Lyapunov system is numerically singular")]
    SingularSystem,

    #[error("structured solve limited to k <= {max}, got k = {k}")]
    DimensionTooLarge { k: usize, max: usize },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("core matrix S + M is numerically singular")]
    CoreSingular,

    #[error("requested rank {rank} exceeds the numerical rank of the input")]
    RankTooSmall { rank: usize },

    #[error("curve loses rank at t = {t}")]
    RankDrop { t: f64 },

    #[error("point is not on the manifold (residual {residual:e})")]
    InfeasiblePoint { residual: f64 },

    #[error("vector is not tangent at its base point (residual {residual:e})")]
    NotTangent { residual: f64 },

    #[error("retraction domain violated at {stage}: {reason}")]
    RetractionDomain { stage: String, reason: String },

    #[error("parameter {t} outside [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("slope needs at least 3 rows above the error floor, got {usable}")]
    SlopeUndefined { usable: usize },

    #[error("evaluation grid is empty")]
    EmptyGrid,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Re-labels a failure as a retraction-domain violation at `stage`.
    ///
    /// Nested stages compose as `outer/inner`.
    pub fn at_stage(self, stage: &str) -> Error {
        match self {
            Error::RetractionDomain { stage: inner, reason } => Error::RetractionDomain {
                stage: format!("{stage}/{inner}"),
                reason,
            },
            other => Error::RetractionDomain {
                stage: stage.to_string(),
                reason: other.to_string(),
            },
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
