use thiserror::Error;

/// Errors raised by oracles, bookkeeping and the solvers built on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A function value that had to be finite was `+inf`.
    #[error("infinite value: {0}")]
    InfiniteValue(String),
    /// An oracle was queried outside the domain of its subdifferential.
    #[error("oracle `{oracle}` failed: {reason}")]
    Domain {
        oracle: &'static str,
        reason: String,
    },
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid construction: {0}")]
    Construction(String),
    #[error("value out of range: {0}")]
    Range(String),
    /// A bookkeeping operation was used before its hypotheses hold
    /// (for instance a gap recursion without a unit first step).
    #[error("invalid state: {0}")]
    State(String),
    #[error("line search failed: {0}")]
    LineSearch(String),
    #[error("rate fit failed: {0}")]
    Fit(String),
    #[error("Fenchel-Young check failed for {oracle}: residual {residual:e}")]
    FenchelYoung { oracle: &'static str, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(oracle: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            oracle,
            reason: reason.into(),
        }
    }

    pub(crate) fn check_dim(context: &'static str, expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::Dimension {
                context,
                expected,
                got,
            })
        }
    }
}
