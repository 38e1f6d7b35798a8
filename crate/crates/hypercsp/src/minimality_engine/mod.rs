//! Instances over orbit relations, (k,l)-minimality by explicit
//! propagation, triviality and reduction to injective instances.

mod format;
mod injectivize;
mod instance;
mod propagate;

use thiserror::Error;

pub use injectivize::{injectivize, Injectivized};
pub use instance::{Constraint, Instance};
pub use propagate::{
    is_kl_minimal, kl_minimalize, kl_minimalize_with, proj_instance, restore_minimality, MinimalityViolation, Schedule,
};

use crate::orbit_algebra::OrbitError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MinError {
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("variable index {0} out of range")]
    UnknownVariable(usize),
    #[error("constraint scope repeats a variable")]
    RepeatedScope,
    #[error("scope has {scope} variables, relation has arity {arity}")]
    ArityMismatch { scope: usize, arity: usize },
    #[error("orbits over k={found} in an instance over k={expected}")]
    KMismatch { expected: usize, found: usize },
    #[error("need 1 <= k <= l, got k={k}, l={ell}")]
    BadLevels { k: usize, ell: usize },
    #[error("instance is not stamped as minimal")]
    NotMinimal,
    #[error("instance is trivial")]
    Trivial,
    #[error("tuple of length {len} is longer than k={k}")]
    TupleTooLong { len: usize, k: usize },
    #[error("no constraint covers the tuple")]
    NotCovered,
}
