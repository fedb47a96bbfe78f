//! Crate-wide error type.

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Point sets or functionals too degenerate to separate (e.g. duplicate
    /// points, or a tie that survives the retry budget).
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    /// An internal geometric invariant failed (sector containment, diameter
    /// budget, coverage, nonnegativity certification, ...).
    #[error("geometry violation: {0}")]
    Geometry(String),

    /// The modulus specification cannot produce a usable resolution.
    #[error("unusable modulus: {0}")]
    UnusableModulus(String),

    /// The target function returned a non-finite value.
    #[error("target evaluation failed at {point:?}: {reason}")]
    TargetEval { point: Vec<f64>, reason: String },

    /// A non-finite value appeared while running a network forward.
    #[error("non-finite value in layer {layer}")]
    NonFinite { layer: usize },

    /// The analyzer only handles networks whose hidden widths all equal the
    /// input dimension (and scalar output for certification).
    #[error("network out of scope: {0}")]
    OutOfScopeNet(String),

    /// Malformed or inconsistent serialized artifact.
    #[error("schema error: {0}")]
    Schema(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Parse(#[from] crate::expr::ParseError),

    #[error(transparent)]
    Eval(#[from] crate::expr::EvalError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
