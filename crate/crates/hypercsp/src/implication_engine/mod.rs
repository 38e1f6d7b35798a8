//! Implications between orbit relations: checking, composition, mapping-pair
//! digraphs, complete implications, bounded implication graphs and the
//! critical / equality-implication detectors.

mod compose;
mod detect;
mod digraph;
pub mod fixtures;
mod graph;
mod implication;

use thiserror::Error;

pub use compose::{compose_implications, impl_properties_check, relational_compose, PropertyReport};
pub use detect::{
    detect_critical, detect_equality_implication, injective_witness, overlapping_reduction, witness_set,
    CriticalCertificate, Detection, EqualityCertificate, WitnessOutcome, WitnessSet,
};
pub use digraph::{completize, is_complete, CompletizeConfig, ImplDigraph};
pub use graph::{
    build_implication_graph, is_implicationally_simple, GraphSearch, ImplicationGraph, SimplicityReport, Vertex,
};
pub use implication::{
    check_implication, check_pre_implication, mapping_pairs, CheckResult, ImplFailure, Implication, OrbitPairs,
};

use crate::orbit_algebra::OrbitError;
use crate::pp_engine::PpError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImplError {
    #[error(transparent)]
    Pp(#[from] PpError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error("projection mismatch: {0}")]
    ProjectionMismatch(String),
    #[error("not a (C,C)-implication with equal projections: {0}")]
    NotSelfImplication(String),
    #[error("power search exceeded its cap of {0} steps")]
    PowerCapExceeded(usize),
    #[error("no complete implication: {0}")]
    Incomplete(String),
    #[error("composition is not a pre-implication: {0}")]
    NotPreImplication(ImplFailure),
}
