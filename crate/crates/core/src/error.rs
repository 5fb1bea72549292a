use serde::{Deserialize, Serialize};
use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// What we know about a coverage sum that ran past its budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Extrapolation {
    /// The series diverges; `log10_n0` estimates how many terms are needed.
    DivergesEventually { log10_n0: f64 },
    /// The series converges and can never exceed `supremum`.
    BoundedAbove { supremum: f64 },
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub what: String,
    pub required: f64,
    pub achieved: f64,
    pub terms: u64,
    pub extrapolation: Extrapolation,
}

impl fmt::Display for BudgetReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: required {:.6e}, reached {:.6e} after {} terms",
            self.what, self.required, self.achieved, self.terms
        )?;
        match &self.extrapolation {
            Extrapolation::DivergesEventually { log10_n0 } => {
                write!(f, "; diverges, needs about 10^{log10_n0:.2} terms")
            }
            Extrapolation::BoundedAbove { supremum } => {
                write!(f, "; bounded above by {supremum:.6e}")
            }
            Extrapolation::Unknown => Ok(()),
        }
    }
}

#[derive(Clone, Debug, thiserror::Error)]
pub enum Error {
    #[error("target polynomial must be non-zero")]
    ZeroTarget,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("gap violation: {0}")]
    GapViolation(String),
    #[error("degree violation: {0}")]
    DegreeViolation(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(Box<BudgetReport>),
    #[error("certification failure: {0}")]
    CertificationFailure(String),
    #[error("sequence exhausted after {0} terms")]
    SequenceExhausted(usize),
    #[error("margin exhausted: {0}")]
    MarginExhausted(String),
    #[error("no witness found: {0}")]
    NotFound(String),
    #[error("eps0 must lie in (0,1), got {0}")]
    InvalidEps(f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("refusing to materialize a polynomial of degree {0}")]
    MaterializationLimit(u64),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Error {
        Error::InvalidParameter(msg.into())
    }
}
