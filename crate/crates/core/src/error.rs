use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix must be square and non-empty, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: symmetrization residual {residual:.3e} exceeds {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("matrix is not a projection: residual {residual:.3e} exceeds {tol:.3e}")]
    NotProjection { residual: f64, tol: f64 },

    #[error("eigenvalue clustering is ambiguous: chain {lo:.6e}..{hi:.6e} spans more than {threshold:.3e}")]
    ClusterAmbiguity { lo: f64, hi: f64, threshold: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid resolution of the identity: {0}")]
    InvalidResolution(String),

    #[error("observables are not orthogonal")]
    NotOrthogonal,

    #[error("{relation}: equivalent criteria disagree ({detail})")]
    EquivalenceViolation { relation: &'static str, detail: String },

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("no upper bound: atoms {lambda} and {mu} have overlapping spectral projections (overlap {overlap:.3e})")]
    NoUpperBound { lambda: f64, mu: f64, overlap: f64 },

    #[error("no upper bound: coordinate {coordinate} carries {a} and {b}")]
    NoUpperBoundAt { coordinate: usize, a: i64, b: i64 },

    #[error("empty family")]
    EmptyFamily,

    #[error("matrix is not unitary: residual {residual:.3e}")]
    NotUnitary { residual: f64 },

    #[error("too many atoms for exhaustive enumeration: {count} > {limit}")]
    TooManyAtoms { count: usize, limit: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid tolerances: {0}")]
    InvalidTolerances(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("cannot parse Borel set {input:?}: {reason}")]
    BorelSyntax { input: String, reason: String },
}
