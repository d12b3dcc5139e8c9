use thiserror::Error;

pub type Result<T> = std::result::Result<T, NeAdmmError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NeAdmmError {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("subproblem solver failed at iteration {iteration}: {reason}")]
    SubproblemFailure { iteration: usize, reason: String },
    #[error("non-finite iterate detected at iteration {iteration} ({what})")]
    NonFiniteIterate { iteration: usize, what: &'static str },
    #[error("all polynomial coefficients are zero")]
    DegenerateAllZero,
    #[error("invalid bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("no admissible candidate: {0}")]
    NoCandidate(String),
    #[error("optimum reference is required for {0}")]
    MissingReference(&'static str),
    #[error("trace is empty")]
    EmptyTrace,
    #[error("variational-inequality checks require a constant penalty, saw rho {first} and {other}")]
    NonConstantRho { first: f64, other: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("malformed CSV: {0}")]
    Csv(String),
}

impl From<std::io::Error> for NeAdmmError {
    fn from(e: std::io::Error) -> Self {
        NeAdmmError::Io(e.to_string())
    }
}

impl From<csv::Error> for NeAdmmError {
    fn from(e: csv::Error) -> Self {
        match e.kind() {
            csv::ErrorKind::Io(_) => NeAdmmError::Io(e.to_string()),
            _ => NeAdmmError::Csv(e.to_string()),
        }
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(NeAdmmError::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
