use std::fmt;

use thiserror::Error;

/// A single validation failure, naming the offending field and the rule it broke.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub rule: String,
}

impl Violation {
    pub fn new(field: &'static str, rule: impl Into<String>) -> Self {
        Self {
            field,
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// The config document could not be parsed at all.
    #[error("config parse error: {0}")]
    Parse(String),

    /// The config parsed but one or more field invariants do not hold.
    #[error("config validation failed: {}", format_violations(.0))]
    Validation(Vec<Violation>),

    /// An operation was called outside its numeric domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The trusted part of the excess noise exceeds the total; the
    /// measurement or configuration is self-contradictory.
    #[error("inconsistent budget: {0}")]
    InconsistentBudget(String),

    /// Covariance-matrix inputs produced an unphysical spectrum.
    #[error("nonphysical parameters: {0}")]
    NonPhysical(String),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(Violation::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
