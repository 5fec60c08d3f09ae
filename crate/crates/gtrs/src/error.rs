//! Error types shared across the solver.

use thiserror::Error;

/// Errors produced by solver operations.
#[derive(Debug, Error)]
pub enum GtrsError {
    /// A vector or matrix dimension does not match the problem dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A scalar parameter is outside its admissible range.
    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: &'static str, message: String },

    /// Malformed problem data (bad indices, duplicates, unreadable file, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Both quadratics are identically zero.
    #[error("degenerate input: both quadratics are identically zero")]
    DegenerateInput,

    /// A matvec or objective evaluation produced a non-finite value.
    #[error("numerical error: {0}")]
    NumericalError(String),

    /// The minimum-eigenvalue probe of A1 could not certify a negative
    /// eigenvalue, so the constraint may be convex and the pencil interval
    /// is (possibly) unbounded above.
    #[error(
        "constraint possibly convex: could not certify lambda_min(A1) < 0 \
         (rayleigh {rayleigh:.3e}, accuracy {eta:.3e})"
    )]
    ConstraintPossiblyConvex { rayleigh: f64, eta: f64 },

    /// No gamma with a certifiably positive definite pencil value was found.
    #[error("pencil not certifiably definite: no definite point found down to xi = {floor:.3e}")]
    NotCertifiablyDefinite { floor: f64 },

    /// An endpoint bisection exhausted its round budget. With valid inputs
    /// this only happens when an eigensolver call failed its probabilistic
    /// guarantee.
    #[error("bisection failed after {rounds} rounds (probabilistic subroutine failure)")]
    BisectionFailed { rounds: usize },

    /// The supplied regularity certificate was refuted during the run.
    #[error(
        "certificate invalid: lambda_min(A(gamma_hat)) certified below xi \
         (rayleigh {rayleigh:.3e} < xi/2 = {threshold:.3e})"
    )]
    CertificateInvalid { rayleigh: f64, threshold: f64 },

    /// The boundary-rounding quadratic had no real root beyond tolerance.
    #[error("rounding failed: {0}")]
    RoundingFailed(String),

    /// The two-point decomposition could not produce real roots.
    #[error("decomposition failed: {0}")]
    DecompositionFailed(String),

    /// Gamma is empty: the problem value is -infinity.
    #[error("unbounded below: no gamma >= 0 makes the pencil positive semidefinite")]
    UnboundedBelow,

    /// The constraint is (certifiably) convex; the pencil pipeline does not
    /// apply and the instance is reported, not solved.
    #[error("convex constraint regime: Gamma is unbounded above; not solved by this pipeline")]
    ConvexConstraintRegime,

    /// Classification probes all landed within the ambiguity margin.
    #[error("indefinite classification: margins too small to classify ({margins})")]
    IndefiniteClassification { margins: String },

    /// Dense oracle was asked for a dimension above its cap.
    #[error("oracle dimension cap exceeded: n = {n} > {cap}")]
    OracleCapExceeded { n: usize, cap: usize },

    /// The oracle's two routes disagreed beyond tolerance.
    #[error("oracle inconsistency: {0}")]
    OracleInconsistency(String),

    /// Instance generation exhausted its resampling budget.
    #[error("generation failed: resampling cap ({cap}) exceeded")]
    GenerationFailed { cap: usize },

    /// The oracle regime precondition does not hold.
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    /// I/O failure while reading or writing problem/result files.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error("format error: {0}")]
    Format(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GtrsError>;

impl GtrsError {
    pub fn invalid_param(name: &'static str, message: impl Into<String>) -> Self {
        GtrsError::InvalidParameter {
            name,
            message: message.into(),
        }
    }

    /// Process exit code for the CLI, frozen by the interface contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            GtrsError::UnboundedBelow => 2,
            GtrsError::ConvexConstraintRegime => 5,
            GtrsError::DimensionMismatch { .. }
            | GtrsError::InvalidParameter { .. }
            | GtrsError::InvalidInput(_)
            | GtrsError::DegenerateInput
            | GtrsError::OracleCapExceeded { .. }
            | GtrsError::RegimeMismatch(_)
            | GtrsError::Io(_)
            | GtrsError::Format(_) => 3,
            _ => 4,
        }
    }
}
