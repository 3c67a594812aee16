use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("unknown initial condition `{0}` (expected one of: trivial, bump, sinusoid, high-frequency, high-energy)")]
    UnknownInitialCondition(String),

    /// A jump-rate exponent left the representable range.
    #[error("stiff state: rate exponent {exponent:.6e} on mode {mode} exceeds cap {cap}")]
    Stiffness { mode: usize, exponent: f64, cap: f64 },

    #[error("log-density is not finite at the current state ({0})")]
    NonFiniteLogDensity(f64),

    #[error("step budget of {budget} events exhausted at t = {t:.6e} (target horizon {horizon:.6e})")]
    BudgetExceeded { budget: u64, t: f64, horizon: f64 },

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("{failed} of {replicas} replicas failed (limit 1%); first failure: {first}")]
    TooManyFailures {
        failed: usize,
        replicas: usize,
        first: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, got })
    }
}
