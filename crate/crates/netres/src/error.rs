//! Crate-wide error type and result alias.

use thiserror::Error;

/// Errors produced by parsing, stamping, spectral analysis and solving.
#[derive(Debug, Error)]
pub enum Error {
    /// Netlist syntax or semantic error, with 1-based line number.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// An element whose node assignment makes its stamp meaningless.
    #[error("degenerate element: {0}")]
    DegenerateElement(String),

    /// A node name that does not exist in the resolved node map.
    #[error("unknown node '{0}'")]
    UnknownNode(String),

    /// Malformed structured input (matrix shape, node listing, encoding).
    #[error("invalid input: {0}")]
    InvalidMatrix(String),

    /// Kirchhoff structure violated beyond the hard validation limit.
    #[error("not a valid Laplacian: {0}")]
    Structure(String),

    /// Eigenvector matrix too ill-conditioned to invert meaningfully.
    #[error(
        "non-diagonalizable within tolerance: cond(Psi) = {cond:.6e} exceeds {limit:.6e}"
    )]
    NonDiagonalizable { cond: f64, limit: f64 },

    /// More than one eigenvalue inside the zero-mode tolerance band.
    #[error("zero eigenvalue not simple: {count} eigenvalues within |lambda| <= {tol:.6e}")]
    MultipleZeroModes { count: usize, tol: f64 },

    /// No eigenvalue inside the zero-mode tolerance band.
    #[error("no zero eigenvalue within |lambda| <= {tol:.6e}; matrix is not a Kirchhoff Laplacian")]
    NoZeroMode { tol: f64 },

    /// The resistance sum retained an imaginary residue beyond tolerance.
    #[error("non-real resistance: imaginary residue {residual:.6e} exceeds {tol:.6e}")]
    NonRealResult { residual: f64, tol: f64 },

    /// The requested shift coincides with an eigenvalue of the spectrum.
    #[error("epsilon = {epsilon:.6e} lies on an eigenvalue pole (|lambda_{index} + eps| = {gap:.6e})")]
    Pole {
        epsilon: f64,
        index: usize,
        gap: f64,
    },

    /// Two-point queries require two distinct nodes.
    #[error("nodes must be distinct: {0}")]
    SameNode(String),

    /// The grounded reduced system has no unique solution.
    #[error("singular reduced system: {0}")]
    SingularSystem(String),

    /// A failure while evaluating one pair of an all-pairs sweep.
    #[error("pair ({alpha}, {beta}): {source}")]
    AtPair {
        alpha: String,
        beta: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    LinAlg(#[from] ndarray_linalg::error::LinalgError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
