use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid age grid: {0}")]
    InvalidAgeGrid(String),
    #[error("invalid rate {value} at age group index {index}")]
    InvalidRate { index: usize, value: f64 },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("degenerate trend: mortality index is zero in every period")]
    DegenerateTrend,
    #[error("singular computation: {0}")]
    Singular(String),
    #[error("target e0 {target} is outside the achievable range [{min_e0}, {max_e0}]")]
    UnbracketedTarget { target: f64, min_e0: f64, max_e0: f64 },
    #[error("bisection did not converge after {iterations} iterations (last e0 error {residual})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("invalid fertility pattern: {0}")]
    InvalidPattern(String),
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }

    /// Innermost error, with all context layers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}

pub(crate) trait ResultExt<T> {
    fn context_with(self, f: impl FnOnce() -> String) -> Result<T>;
}

impl<T> ResultExt<T> for Result<T> {
    fn context_with(self, f: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| e.context(f()))
    }
}
