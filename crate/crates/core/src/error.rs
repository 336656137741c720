use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    /// The selected eigenpair failed the realness certificate.
    #[error("eigenpair {index} is not real (imaginary defect {defect:.3e})")]
    NotReal { index: usize, defect: f64 },

    /// The r-th and (r+1)-th eigenvalues are tied in modulus.
    #[error("degenerate spectrum: |lambda_{r}| and |lambda_{next}| differ by {gap:.3e}", next = r + 1)]
    DegenerateSpectrum { r: usize, gap: f64 },

    #[error("no left eigenvalue within {tol:.3e} of right eigenvalue {lambda}")]
    UnmatchedLeft { lambda: f64, tol: f64 },

    #[error("rank {r} out of range 1..={max}")]
    RankOutOfRange { r: usize, max: usize },

    #[error("u + w vanishes for eigenpair {index}; sign convention broken")]
    SignConvention { index: usize },

    #[error("w'u = {value:.3e} is below the de-biasing guard")]
    DegenerateDenominator { value: f64 },

    #[error("eigenvalue must be nonzero")]
    ZeroEigenvalue,

    #[error("alignment targets infeasible: squared norm {0} exceeds 1")]
    InfeasibleTargets(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{failed} of {total} trials failed (first: {first})")]
    TooManyFailures {
        failed: usize,
        total: usize,
        first: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Regime violations are numerical outcomes of the data, not caller mistakes.
    pub fn is_regime_violation(&self) -> bool {
        matches!(
            self,
            Error::NotReal { .. }
                | Error::DegenerateSpectrum { .. }
                | Error::UnmatchedLeft { .. }
                | Error::SignConvention { .. }
                | Error::DegenerateDenominator { .. }
                | Error::NoConvergence { .. }
                | Error::TooManyFailures { .. }
        )
    }
}
