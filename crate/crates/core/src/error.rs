use thiserror::Error;

use crate::expr::{EvalError, ParseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },
    #[error("singular velocity Hessian (|det| = {det:e})")]
    SingularHessian { det: f64 },
    #[error("Newton inversion did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("step size underflow at t = {t} (h = {h:e}); the flow is approaching a singularity")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step budget of {steps} exhausted at t = {t}")]
    StepLimit { steps: usize, t: f64 },
    #[error("point lies in the excluded region (H = {h}, M12 = {m12})")]
    ExcludedRegion { h: f64, m12: f64 },
    #[error("chart domain violated: {0}")]
    ChartDomain(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
}

impl Error {
    /// Usage and configuration problems, as opposed to numeric failures.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Parse(_) | Error::Config(_) | Error::InvalidArgument(_) | Error::Dimension { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
