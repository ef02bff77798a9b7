use thiserror::Error;

use crate::forms::FormReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("index error: indices start at 1, got {0}")]
    Index(u64),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("resource error: {what} needs {requested} entries, support cap is {cap}")]
    Resource {
        what: String,
        requested: u128,
        cap: u64,
    },

    #[error("feasibility error: {0}")]
    Feasibility(Infeasible),

    #[error(
        "identity violated: |D - W - R| = {:e} exceeds {:e} (D = {}, W = {}, R = {})",
        .0.residual.abs(), .0.tolerance, .0.dirichlet, .0.weighted, .0.remainder
    )]
    IdentityViolation(Box<FormReport>),

    #[error("internal consistency error: {0}")]
    InternalConsistency(String),

    #[error("assertion failed: {0}")]
    Assertion(String),
}

/// Why a witness level cannot be materialized.
#[derive(Debug, Clone, PartialEq)]
pub struct Infeasible {
    /// `epsilon * k` for the requested perturbation.
    pub strength: f64,
    /// Natural log of the smallest admissible cutoff level, `4 / strength`.
    pub log_min_level: f64,
    /// The level itself when it fits in a `u64`.
    pub min_level: Option<u64>,
    pub reason: String,
}

impl std::fmt::Display for Infeasible {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.min_level {
            Some(n) => write!(
                f,
                "{}; minimum level N = {n} (= ceil(exp({})))",
                self.reason, self.log_min_level
            ),
            None => write!(
                f,
                "{}; minimum level N = ceil(exp({})), beyond any materializable support",
                self.reason, self.log_min_level
            ),
        }
    }
}
