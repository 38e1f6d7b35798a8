use std::fmt;
use std::sync::OnceLock;

use crate::implication_engine::{
    build_implication_graph, is_implicationally_simple, GraphSearch, ImplicationGraph, SimplicityReport,
};
use crate::minimality_engine::{injectivize, kl_minimalize, Instance};
use crate::pp_engine::Evaluator;
use crate::template::Template;

use super::{one_orbit_solve, prune_sinks, FalsificationEvent, Solution, SolveError, TraceEvent};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SolveConfig {
    /// defaults to `max(k + 1, b_B)`
    pub ell: Option<usize>,
    pub search: GraphSearch,
}

/// Why no verdict was reached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Inconclusive {
    Cycle(SimplicityReport),
    Truncated,
    /// injectivization emptied a constraint
    InjectiveTrivial,
    NoSink(String),
    Falsified(FalsificationEvent),
}

impl fmt::Display for Inconclusive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inconclusive::Cycle(r) => {
                let labels: Vec<String> = r.cycle.iter().map(|v| v.label()).collect();
                write!(f, "implication cycle: {}", labels.join(" -> "))
            }
            Inconclusive::Truncated => f.write_str("implication graph search truncated"),
            Inconclusive::InjectiveTrivial => f.write_str("injective instance is trivial"),
            Inconclusive::NoSink(d) => write!(f, "no prunable sink: {d}"),
            Inconclusive::Falsified(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Solved(Solution),
    Unsat,
    Inconclusive(Inconclusive),
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Solved(_) => "SOLVED",
            Outcome::Unsat => "UNSAT",
            Outcome::Inconclusive(_) => "INCONCLUSIVE",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveReport {
    pub outcome: Outcome,
    pub trace: Vec<TraceEvent>,
    pub falsifications: Vec<FalsificationEvent>,
}

/// A template with its bounded injective implication graph, built on
/// first use and shared by every instance solved.
pub struct Solver<'t> {
    template: &'t Template,
    ev: Evaluator<'t>,
    config: SolveConfig,
    graph: OnceLock<ImplicationGraph>,
}

impl<'t> Solver<'t> {
    pub fn new(template: &'t Template, config: SolveConfig) -> Self {
        Solver { template, ev: Evaluator::new(template), config, graph: OnceLock::new() }
    }

    pub fn graph(&self) -> &ImplicationGraph {
        self.graph.get_or_init(|| build_implication_graph(&self.ev, &self.config.search, true))
    }

    pub fn ell(&self) -> usize {
        self.config.ell.unwrap_or_else(|| self.template.universe().default_ell())
    }

    pub fn solve(&self, inst: &Instance) -> Result<SolveReport, SolveError> {
        let mut trace = Vec::new();
        let outcome = match self.run(inst, &mut trace) {
            Ok(o) => o,
            Err(SolveError::Falsification(e)) => {
                let outcome = Outcome::Inconclusive(Inconclusive::Falsified(e.clone()));
                return Ok(SolveReport { outcome, trace, falsifications: vec![e] });
            }
            Err(e) => return Err(e),
        };
        Ok(SolveReport { outcome, trace, falsifications: Vec::new() })
    }

    fn run(&self, inst: &Instance, trace: &mut Vec<TraceEvent>) -> Result<Outcome, SolveError> {
        let universe = self.template.universe();
        let k = universe.k();
        let ell = self.ell();
        let stamp = |stage, i: &Instance, trace: &mut Vec<TraceEvent>| {
            trace.push(TraceEvent::Minimalized {
                stage,
                vars: i.var_count(),
                constraints: i.constraints().len(),
                trivial: i.is_trivial(),
            });
        };
        let m = kl_minimalize(inst, universe, k, ell)?;
        stamp("input", &m, trace);
        if m.is_trivial() {
            return Ok(Outcome::Unsat);
        }
        let inj = injectivize(&m, universe)?;
        let merged = (0..inst.var_count())
            .filter(|&x| inj.instance.vars()[inj.map[x]] != inst.vars()[x])
            .map(|x| (inst.vars()[x].clone(), inj.instance.vars()[inj.map[x]].clone()))
            .collect();
        trace.push(TraceEvent::Injectivized { vars: inj.instance.var_count(), merged });
        let j = kl_minimalize(&inj.instance, universe, k, ell)?;
        stamp("injective", &j, trace);
        if j.is_trivial() {
            return Ok(Outcome::Inconclusive(Inconclusive::InjectiveTrivial));
        }
        let graph = self.graph();
        let report = is_implicationally_simple(graph);
        trace.push(TraceEvent::Graph {
            vertices: graph.vertices.len(),
            arcs: graph.arcs.len(),
            truncated: graph.truncated,
            simple: report.simple,
        });
        if !report.simple {
            return Ok(Outcome::Inconclusive(Inconclusive::Cycle(report)));
        }
        if graph.truncated {
            return Ok(Outcome::Inconclusive(Inconclusive::Truncated));
        }
        let pruned = match prune_sinks(&j, universe, graph, trace) {
            Ok(p) => p,
            Err(SolveError::NoSink { round, detail }) => {
                return Ok(Outcome::Inconclusive(Inconclusive::NoSink(format!("round {round}: {detail}"))))
            }
            Err(e) => return Err(e),
        };
        let sol = one_orbit_solve(&pruned, universe)?;
        let assignment = inj.map.iter().map(|&y| sol.assignment[y]).collect();
        let sol = Solution { fragment: sol.fragment, assignment };
        sol.verify(inst, universe)?;
        trace.push(TraceEvent::Witness { points: sol.fragment.len() });
        Ok(Outcome::Solved(sol))
    }
}

pub fn solve(inst: &Instance, template: &Template, config: SolveConfig) -> Result<SolveReport, SolveError> {
    Solver::new(template, config).solve(inst)
}
