use thiserror::Error;

/// Every failure the toolkit can report.
///
/// Display strings start with the variant name so that callers (and the CLI)
/// can surface the violated invariant verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("NonHermitian: max |X - X^dagger| = {defect:e}")]
    NonHermitian { defect: f64 },

    #[error("SingularMatrix: smallest eigenvalue {min_eig:e} is not positive")]
    SingularMatrix { min_eig: f64 },

    #[error("NotAState: {0}")]
    NotAState(String),

    #[error("RankDeficient: smallest eigenvalue {min_eig:e} does not exceed 1e-12")]
    RankDeficient { min_eig: f64 },

    #[error("UnsupportedOrder: {family} divergence is undefined at s = {order}")]
    UnsupportedOrder { family: &'static str, order: f64 },

    #[error("ConvergenceFailure: {0}")]
    ConvergenceFailure(String),

    #[error("EmptySequence: cannot take the type of an empty sequence")]
    EmptySequence,

    #[error("TooManyTypes: {count:.0} type classes exceed the budget of {budget:.0}")]
    TooManyTypes { count: f64, budget: f64 },

    #[error("OverlappingSets: delta = {delta} must be below half the sup-distance {half_gap}")]
    OverlappingSets { delta: f64, half_gap: f64 },

    #[error("InvalidThresholds: {0}")]
    InvalidThresholds(String),

    #[error("DimensionBudget: dimension {dim} exceeds the dense budget of {budget}")]
    DimensionBudget { dim: usize, budget: usize },

    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),

    #[error("InvalidInput: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code under the CLI contract (2 input, 3 numerical, 4 budget).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SingularMatrix { .. } | Error::ConvergenceFailure(_) => 3,
            Error::TooManyTypes { .. } | Error::DimensionBudget { .. } => 4,
            _ => 2,
        }
    }
}
