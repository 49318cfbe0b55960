use std::fmt;

use thiserror::Error;

/// A single problem found while validating structured input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    /// Dotted path of the offending field, e.g. `cm_orders[2].delta`.
    pub path: String,
    pub message: String,
}

impl ValidationIssue {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument must be positive, got 0")]
    ZeroArgument,

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("{0} is not a squarefree integer different from 0 and 1")]
    NotSquarefree(i64),

    #[error("expected a negative radicand, got {0}")]
    NotImaginary(i64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("prime {prime} is not known to order {label}")]
    UnknownPrime { label: String, prime: String },

    #[error("local order at {0} is not an Eichler order of squarefree level; an explicit m_p override is required")]
    MissingOverride(String),

    #[error("class number datum of {0} is symbolic and must be resolved first")]
    UnresolvedClassDatum(String),

    #[error("Eichler invariant e_p = 0 at {0}: orders with a vanishing Eichler invariant are outside the supported case (the spinor trace formula is not known to hold there)")]
    ZeroEichlerInvariant(String),

    #[error("{quantity} evaluated to the non-integer {value}\n{dump}")]
    NonIntegral {
        quantity: String,
        value: String,
        dump: String,
    },

    #[error("inconsistent data: {0}")]
    Inconsistent(String),

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("p = {p} exceeds the configured ceiling {ceiling}")]
    AboveCeiling { p: u64, ceiling: u64 },

    #[error("invalid configuration:\n{}", format_issues(.0))]
    Validation(Vec<ValidationIssue>),

    #[error("check failed at p = {p}: {detail}")]
    CheckFailed { p: u64, detail: String },
}

impl Error {
    /// True for errors caused by bad caller input, as opposed to internal
    /// consistency failures.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::NonIntegral { .. } | Error::Inconsistent(_) | Error::CheckFailed { .. }
        )
    }
}

fn format_issues(issues: &[ValidationIssue]) -> String {
    issues.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n")
}

pub type Result<T> = std::result::Result<T, Error>;
