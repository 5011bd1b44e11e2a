use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("self-loop at `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge `{0}`-`{1}`")]
    DuplicateEdge(String, String),
    #[error("edge `{0}`-`{1}` has invalid length {2}")]
    BadLength(String, String, f64),
    #[error("graph is not connected")]
    Disconnected,
    #[error("boundary is empty")]
    EmptyBoundary,
    #[error("dimension mismatch at `{id}`: expected {expected}, got {got}")]
    Dimension { id: String, expected: usize, got: usize },
    #[error("vertex `{0}` is on the boundary")]
    BoundaryVertex(String),
    #[error("edge `{0}`-`{1}` lies inside the boundary")]
    BoundaryEdge(String, String),
    #[error("no edge `{0}`-`{1}`")]
    NoEdge(String, String),
    #[error("extension disagrees with boundary data at `{0}`")]
    BoundaryMismatch(String),
    #[error("extension has no value at `{0}`")]
    MissingValue(String),
    #[error("non-finite value at `{0}`")]
    NonFinite(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("search budget exceeded: {needed} > {budget}")]
    Budget { needed: f64, budget: f64 },
    #[error("no feasible radial interpolant for {0}")]
    NoRadialCandidate(String),
    #[error("bracketing failed: residuals {lo} and {hi}")]
    Bracket { lo: f64, hi: f64 },
    #[error("{0} outside [{1}, {2}]")]
    OutOfRange(f64, f64, f64),
    #[error("non-removable singularity: u'' = 0 with u' and u''' nonzero")]
    Singular,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
