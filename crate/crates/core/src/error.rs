use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("degenerate point: {0}")]
    DegeneratePoint(String),

    #[error("wall proximity: {0}")]
    WallProximity(String),

    #[error("outside trivialization: {0}")]
    OutsideChamber(String),

    #[error("grading mismatch: {0}")]
    GradingMismatch(String),

    #[error("charge {0} has zero cone degree")]
    ZeroDegree(String),

    #[error("charge {0} is not in the cone")]
    NotInCone(String),

    #[error("R too small: {0}")]
    RTooSmall(String),

    #[error("iteration did not converge after {iterations} steps (residual history {history:?})")]
    NonConvergence { iterations: usize, history: Vec<f64> },

    #[error("log(1 - X) domain left: {0}")]
    LogDomain(String),

    #[error("zeta on a BPS ray, directed limit required: {0}")]
    DirectedLimitRequired(String),

    #[error("side-limit extrapolation residual {residual:.3e} above tolerance {tolerance:.3e}")]
    Extrapolation { residual: f64, tolerance: f64 },

    #[error("tree enumeration exceeds budget of {0} trees")]
    BudgetExceeded(usize),

    #[error("higher Laurent terms present (residual {0:.3e})")]
    LaurentResidual(f64),

    #[error("triple not hyperkähler at this point: {0}")]
    NotHyperkahler(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("model mismatch: {0}")]
    ModelMismatch(String),
}

impl Error {
    /// Short machine-parseable tag used by the command-line front end.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::InvalidLattice(_) => "invalid-lattice",
            Error::DegeneratePoint(_) => "degenerate-point",
            Error::WallProximity(_) => "wall-proximity",
            Error::OutsideChamber(_) => "outside-chamber",
            Error::GradingMismatch(_) => "grading-mismatch",
            Error::ZeroDegree(_) => "zero-degree",
            Error::NotInCone(_) => "not-in-cone",
            Error::RTooSmall(_) => "r-too-small",
            Error::NonConvergence { .. } => "non-convergence",
            Error::LogDomain(_) => "log-domain",
            Error::DirectedLimitRequired(_) => "directed-limit-required",
            Error::Extrapolation { .. } => "extrapolation",
            Error::BudgetExceeded(_) => "budget-exceeded",
            Error::LaurentResidual(_) => "laurent-residual",
            Error::NotHyperkahler(_) => "not-hyperkahler",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::Unsupported(_) => "unsupported",
            Error::Parse(_) => "parse",
            Error::ModelMismatch(_) => "model-mismatch",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
