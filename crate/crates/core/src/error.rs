use thiserror::Error;

/// Failures raised by the library.
///
/// Input-class errors ([`Error::InvalidInput`], [`Error::Precondition`])
/// indicate a caller mistake; the remaining variants are numeric failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("value outside numeric domain: {0}")]
    NumericDomain(String),

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error(
        "degenerate Fermi level: single-particle energies {below} and {above} are closer than {gap_tol:e}; \
         perturb the hoppings, change the filling or switch boundary conditions"
    )]
    DegenerateFermiLevel { below: f64, above: f64, gap_tol: f64 },

    #[error("leg-factor solve failed at N={n}: {reason}")]
    LegFactorSolve { n: usize, reason: String },

    #[error("mirror cross-check failed for block {mask:#b}: direct {direct} vs mirrored {mirrored}")]
    MirrorMismatch { mask: u32, direct: f64, mirrored: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for caller errors (bad arguments, malformed files), false for
    /// numeric failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::Precondition(_) | Error::Io(_) | Error::Json(_)
        )
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
