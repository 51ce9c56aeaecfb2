use thiserror::Error;

/// Errors raised by the lab. Every variant maps to a CLI exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("degree {0} lies strictly between 0 and 1; no such series exists (it would be unbounded on a vertical line inside its half-plane of absolute convergence)")]
    EmptyDegreeRange(f64),
    #[error("argument {0} is a pole of the gamma function")]
    PoleAtInput(String),
    #[error("singular point: {0}")]
    Singularity(String),
    #[error("least-squares fit failed: {0}")]
    FitFailure(String),
    #[error("coefficient magnitude overflow at n = {0}")]
    Overflow(u64),
    #[error("source carries no Euler product data")]
    NoEulerData,
    #[error("truncation failure: {0}")]
    TruncationFailure(String),
    #[error("integration contour passes through a pole: {0}")]
    ContourThroughPole(String),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("pole at {0} has order > 1 and no Laurent data")]
    MissingLaurentData(String),
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("boundary degeneracy: {0}")]
    BoundaryDegeneracy(String),
    #[error("no analytic continuation available: {0}")]
    NoContinuation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    /// 1 for I/O and parse problems, 2 for validation, 3 for numerical
    /// non-convergence, 4 for violated preconditions.
    pub fn exit_code(&self) -> i32 {
        use LabError::*;
        match self {
            Invalid(_) | Parse(_) | Io(_) => 1,
            Validation(_) | EmptyDegreeRange(_) => 2,
            FitFailure(_) | Overflow(_) | TruncationFailure(_) | NonConvergence(_) => 3,
            PoleAtInput(_) | Singularity(_) | NoEulerData | ContourThroughPole(_)
            | Precondition(_) | MissingLaurentData(_) | DegreeMismatch(_) | SingularSystem(_)
            | BoundaryDegeneracy(_) | NoContinuation(_) => 4,
        }
    }
}
