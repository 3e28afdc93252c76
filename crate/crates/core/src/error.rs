use thiserror::Error;

use crate::ode::IntegrationError;
use crate::profile::ValidationReport;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("malformed segment list: {0}")]
    Structural(String),
    #[error("profile violates its invariants: {0}")]
    Invalid(ValidationReport),
    #[error("{0}")]
    Domain(String),
    #[error("cannot read profile spec: {0}")]
    Spec(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("{0}")]
    Domain(String),
    #[error("mode {mode}: radial solution vanishes at the boundary (u(0) = 0)")]
    Degenerate { mode: usize },
    #[error("mode {mode}: {source}")]
    Integration {
        mode: usize,
        #[source]
        source: IntegrationError,
    },
    #[error("mode {mode}: finite-difference system is singular")]
    SingularSystem { mode: usize },
    #[error("consistency check failed: {0}")]
    Consistency(String),
}
