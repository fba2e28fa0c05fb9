use thiserror::Error;

/// Errors produced across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("quadrature did not converge within max_depth: achieved tolerance {achieved:.3e}, requested {requested:.3e}")]
    QuadratureNonConvergence { achieved: f64, requested: f64 },

    #[error("quadrature oracle unsupported above dimension 3 (got dim {0})")]
    UnsupportedDimension(usize),

    #[error("divergent integral: tilt norm {tilt:.3} is not dominated by decay rate {decay:.3}")]
    DivergentIntegral { tilt: f64, decay: f64 },

    #[error("landmark search failure: {0}")]
    LandmarkFailure(String),

    #[error("density construction rejected: {0}")]
    DegenerateDensity(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no sign change for t_p in bracket [{lo:.6e}, {hi:.6e}]")]
    NoRoot { lo: f64, hi: f64 },

    #[error("finite-difference step {step:.3e} underflows against tolerance {tol:.3e}")]
    StepSize { step: f64, tol: f64 },

    #[error("unknown body kind: {0}")]
    UnknownBodyKind(String),

    #[error("region is unbounded or empty: witness direction {witness:?}")]
    UnboundedRegion { witness: Vec<f64> },

    #[error("covariance estimate is rank deficient (min eigenvalue {min_eig:.3e})")]
    RankDeficient { min_eig: f64 },

    #[error("exact sampling unsupported for kind {0}; use the hit-and-run chain")]
    ExactSamplingUnsupported(String),

    #[error("membership oracle inconsistent: {context} at {witness:?}")]
    OracleInconsistency { context: String, witness: Vec<f64> },

    #[error("net cardinality budget exceeded: projected {projected:.3e} points > {budget:.1e}")]
    NetBudget { projected: f64, budget: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate batch: {0}")]
    DegenerateBatch(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("i/o error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
