use crate::C64;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input documents or measure data that fail structural validation.
    #[error("parse error: {0}")]
    Parse(String),

    /// A mathematical precondition of an operation is not met
    /// (zero variance, missing moment, evaluation off the upper half plane, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An iterative solver ran out of iterations.
    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e} at {last})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        last: C64,
    },

    /// A recovered density carries materially less than unit mass.
    #[error("mass deficit: recovered mass {mass:.12} outside tolerance {tol:.1e}")]
    MassDeficit { mass: f64, tol: f64 },

    /// Root selection between branch candidates found no (or several) matches.
    #[error("ambiguous root selection: {0}")]
    AmbiguousRoot(String),

    /// A verification suite measured a value outside its required bound.
    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI contract: 2 parse, 3 solver/mass,
    /// 4 precondition, 5 verification failure, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 2,
            Error::NonConvergence { .. } | Error::MassDeficit { .. } | Error::AmbiguousRoot(_) => 3,
            Error::Precondition(_) => 4,
            Error::Verification(_) => 5,
            Error::Io(_) => 1,
        }
    }
}
