use thiserror::Error;

/// Errors produced by signature fitting, algebra, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A requested monomial basis would exceed the configured size cap.
    #[error("monomial basis for dim {dim}, degree {degree} has {size} elements, exceeding cap {cap}")]
    BasisTooLarge {
        dim: usize,
        degree: u32,
        size: u128,
        cap: usize,
    },

    /// An arithmetic bound (degree or count) overflowed.
    #[error("arithmetic overflow computing {what}")]
    Overflow { what: String },

    /// Dimension mismatch between operands.
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: String,
        expected: usize,
        got: usize,
    },

    /// Input data was structurally invalid (empty cloud, ragged rows, NaN…).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// CSV parsing or serialisation failure.
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// Filesystem I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialisation failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// An iterative routine failed to converge within its budget.
    #[error("{routine} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        routine: String,
        iterations: usize,
        residual: f64,
    },

    /// Two signatures cannot be combined (different bases or projections).
    #[error("incompatible signatures: {0}")]
    Incompatible(String),

    /// A numeric routine produced an unusable result.
    #[error("numeric failure: {0}")]
    Numeric(String),
}
