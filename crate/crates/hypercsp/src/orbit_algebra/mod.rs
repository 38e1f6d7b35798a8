//! Exact finite representation of the ground structure: orbits as equality
//! patterns plus hyperedge flags, relations as orbit unions, and
//! realizability of finite fragments by finite duality.

pub mod combinatorics;
mod descriptor;
mod fragment;
mod relation;
mod universe;

pub use descriptor::{flag_count, OrbitDescriptor};
pub use fragment::Fragment;
pub use relation::Relation;
pub use universe::{Bound, Universe};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrbitError {
    #[error("index {index} out of range for arity {arity}")]
    IndexOutOfRange { index: usize, arity: usize },
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("pattern {0:?} is not a restricted growth string")]
    InvalidPattern(Vec<u8>),
    #[error("expected {expected} flags, found {found}")]
    FlagCount { expected: usize, found: usize },
    #[error("empty tuple")]
    EmptyTuple,
    #[error("cannot parse orbit {0:?}")]
    Syntax(String),
    #[error("unknown point {0}")]
    UnknownPoint(String),
    #[error("fragment is not total on the tuple")]
    PartialFragment,
    #[error("flags are keyed by k distinct points")]
    NotAKSubset,
    #[error("universe arity must be at least 2, got {0}")]
    BadArity(usize),
    #[error("bound has an edge of the wrong size or with repeated points")]
    MalformedBound,
    #[error("bounds are not closed under homomorphic images (image of bound {bound} missing)")]
    BoundsNotClosed { bound: usize },
}

/// Projection of a single orbit onto positions.
pub fn proj_orbit(o: &OrbitDescriptor, positions: &[usize]) -> Result<OrbitDescriptor, OrbitError> {
    o.project(positions)
}
