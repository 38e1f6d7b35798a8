//! Deciding instances: the minimality / injectivization / sink pruning
//! pipeline with witness extraction, and an exhaustive oracle.

mod brute;
mod one_orbit;
mod pipeline;
mod prune;

use std::fmt;

use thiserror::Error;

pub use brute::{
    all_solutions, brute_force_solve, count_solutions, for_each_solution, same_solutions, DEFAULT_SIZE_CAP,
};
pub use one_orbit::one_orbit_solve;
pub use pipeline::{solve, Inconclusive, Outcome, SolveConfig, SolveReport, Solver};
pub use prune::prune_sinks;

use crate::implication_engine::ImplError;
use crate::minimality_engine::{Instance, MinError};
use crate::orbit_algebra::{Fragment, OrbitDescriptor, OrbitError, Universe};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Min(#[from] MinError),
    #[error(transparent)]
    Impl(#[from] ImplError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error("instance has {vars} variables, cap is {cap}")]
    CapExceeded { vars: usize, cap: usize },
    #[error("ill-formed input: {0}")]
    IllFormed(String),
    #[error("implication graph has a cycle of length {0}")]
    Cyclic(usize),
    #[error("round {round}: no prunable sink ({detail})")]
    NoSink { round: usize, detail: String },
    #[error("{0}")]
    Falsification(FalsificationEvent),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FalsificationKind {
    /// a pruning round lost minimality or emptied a constraint
    PruneBroke,
    /// the one-orbit structure contains a forbidden bound
    BoundEmbedding,
    /// a produced witness fails a constraint
    WitnessViolates,
}

impl fmt::Display for FalsificationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FalsificationKind::PruneBroke => "prune-broke",
            FalsificationKind::BoundEmbedding => "bound-embedding",
            FalsificationKind::WitnessViolates => "witness-violates",
        })
    }
}

/// An outcome that the bounded strict width hypothesis rules out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FalsificationEvent {
    pub kind: FalsificationKind,
    pub detail: String,
}

impl fmt::Display for FalsificationEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "falsification kind={} detail={:?}", self.kind, self.detail)
    }
}

pub(crate) fn falsified(kind: FalsificationKind, detail: impl Into<String>) -> SolveError {
    SolveError::Falsification(FalsificationEvent { kind, detail: detail.into() })
}

/// A total fragment and an assignment of the variables to its points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub fragment: Fragment,
    pub assignment: Vec<usize>,
}

impl Solution {
    /// The solution realizing a labeling of all variables on its classes.
    pub fn from_labeling(o: &OrbitDescriptor) -> Self {
        Solution {
            fragment: Fragment::from_descriptor(o),
            assignment: o.pattern().iter().map(|&c| c as usize).collect(),
        }
    }

    /// The orbit of the variable tuple under the assignment.
    pub fn labeling(&self) -> Result<OrbitDescriptor, OrbitError> {
        self.fragment.orbit_of(&self.assignment)
    }

    /// Re-checks realizability and every constraint.
    pub fn verify(&self, inst: &Instance, universe: &Universe) -> Result<(), SolveError> {
        if !universe.realizable(&self.fragment) {
            return Err(falsified(FalsificationKind::BoundEmbedding, "witness fragment embeds a bound"));
        }
        inst.check_assignment(&self.fragment, &self.assignment)
            .map_err(|i| falsified(FalsificationKind::WitnessViolates, format!("constraint {i} is violated")))
    }

    /// Witness file: points, hyperedges, then the assignment.
    pub fn to_text(&self, inst: &Instance) -> String {
        let names = self.fragment.names();
        let mut out = format!("points {}\n", names.join(" "));
        for e in self.fragment.edges() {
            let pts: Vec<&str> = e.iter().map(|&p| names[p].as_str()).collect();
            out.push_str(&format!("edge {}\n", pts.join(" ")));
        }
        for (v, &p) in inst.vars().iter().zip(&self.assignment) {
            out.push_str(&format!("assign {v} {}\n", names[p]));
        }
        out
    }
}

/// One line of the machine-readable trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    Minimalized { stage: &'static str, vars: usize, constraints: usize, trivial: bool },
    Injectivized { vars: usize, merged: Vec<(String, String)> },
    Graph { vertices: usize, arcs: usize, truncated: bool, simple: bool },
    PruneSkip { round: usize, scope: Vec<String>, orbit: String, reason: String },
    Prune { round: usize, scope: Vec<String>, kept: String, before: String },
    Witness { points: usize },
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Minimalized { stage, vars, constraints, trivial } => {
                write!(f, "minimalize stage={stage} vars={vars} constraints={constraints} trivial={trivial}")
            }
            TraceEvent::Injectivized { vars, merged } => {
                let m: Vec<String> = merged.iter().map(|(a, b)| format!("{a}={b}")).collect();
                write!(f, "injectivize vars={vars} merged=[{}]", m.join(","))
            }
            TraceEvent::Graph { vertices, arcs, truncated, simple } => {
                write!(f, "graph vertices={vertices} arcs={arcs} truncated={truncated} simple={simple}")
            }
            TraceEvent::PruneSkip { round, scope, orbit, reason } => {
                write!(f, "skip round={round} scope=({}) orbit={orbit} reason={reason:?}", scope.join(","))
            }
            TraceEvent::Prune { round, scope, kept, before } => {
                write!(f, "prune round={round} scope=({}) keep={kept} from={before}", scope.join(","))
            }
            TraceEvent::Witness { points } => write!(f, "witness points={points}"),
        }
    }
}
