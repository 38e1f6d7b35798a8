use std::collections::BTreeSet;

use crate::implication_engine::{is_implicationally_simple, ImplicationGraph, Vertex};
use crate::minimality_engine::{is_kl_minimal, proj_instance, restore_minimality, Constraint, Instance};
use crate::orbit_algebra::combinatorics::{k_subsets, permutations};
use crate::orbit_algebra::{Relation, Universe};

use super::{falsified, FalsificationKind, SolveError, TraceEvent};

fn strip(r: &Relation) -> Relation {
    Relation::new(r.arity(), r.iter().cloned()).expect("same arity")
}

/// Every ordering of the tuple.
fn orderings(w: &[usize]) -> Vec<Vec<usize>> {
    permutations(w.len()).into_iter().map(|p| p.iter().map(|&i| w[i]).collect()).collect()
}

/// Keeps, in every constraint covering `w`, the orbits projecting into `f`.
fn restrict(inst: &Instance, w: &[usize], f: &Relation) -> Result<Instance, SolveError> {
    let mut out = Instance::new(inst.k(), inst.vars().iter().cloned());
    for c in inst.constraints() {
        let c = match c.positions(w) {
            Some(pos) => {
                let kept = c.allowed().iter().filter(|o| f.contains(&o.project_unchecked(&pos))).cloned();
                Constraint::new(c.scope().to_vec(), Relation::new(c.arity(), kept)?)?
            }
            None => c.clone(),
        };
        out.push(c)?;
    }
    Ok(out)
}

/// Restricts multi-orbit projections one sink at a time until every
/// projection onto `k` variables is a single orbit.
///
/// A candidate `(proj_w, {o})` is taken when the graph has no arc from it
/// to another vertex of the current instance and the restriction, after
/// re-establishing minimality, changes no other projection except into
/// the same vertex. Candidates are tried in canonical order.
pub fn prune_sinks(
    inst: &Instance,
    universe: &Universe,
    graph: &ImplicationGraph,
    trace: &mut Vec<TraceEvent>,
) -> Result<Instance, SolveError> {
    let (k, ell) = inst.level().ok_or(crate::minimality_engine::MinError::NotMinimal)?;
    if inst.is_trivial() {
        return Err(SolveError::IllFormed("instance is trivial".into()));
    }
    let report = is_implicationally_simple(graph);
    if !report.simple {
        return Err(SolveError::Cyclic(report.cycle.len()));
    }
    let n = inst.var_count();
    let names = |w: &[usize], i: &Instance| w.iter().map(|&v| i.vars()[v].clone()).collect::<Vec<_>>();
    let subsets = if n >= k { k_subsets(n, k) } else { Vec::new() };
    let mut cur = inst.clone();
    let mut round = 0;
    loop {
        let projs: Vec<Relation> =
            subsets.iter().map(|w| proj_instance(&cur, w).map(|r| strip(&r))).collect::<Result<_, _>>()?;
        if projs.iter().all(|p| p.len() <= 1) {
            return Ok(cur);
        }
        round += 1;
        let mut present: BTreeSet<Relation> = BTreeSet::new();
        for w in &subsets {
            for t in orderings(w) {
                present.insert(strip(&proj_instance(&cur, &t)?));
            }
        }
        let mut chosen = None;
        'search: for (wi, w) in subsets.iter().enumerate() {
            if projs[wi].len() <= 1 {
                continue;
            }
            for o in projs[wi].iter() {
                let f = Relation::singleton(o.clone());
                let vertex = Vertex::new(&projs[wi], &f);
                let skip = |reason: String, trace: &mut Vec<TraceEvent>| {
                    trace.push(TraceEvent::PruneSkip { round, scope: names(w, &cur), orbit: o.to_string(), reason });
                };
                if let Some(s) = graph.successors(&vertex).find(|s| **s != vertex && present.contains(&s.c1)) {
                    skip(format!("arc to {}", s.label()), trace);
                    continue;
                }
                let next = restore_minimality(&restrict(&cur, w, &f)?, universe, k, ell)?;
                if next.is_trivial() {
                    skip("restriction empties a constraint".into(), trace);
                    continue;
                }
                let mut implied = None;
                for (wj, w2) in subsets.iter().enumerate() {
                    if wj == wi || strip(&proj_instance(&next, w2)?) == projs[wj] {
                        continue;
                    }
                    let same_vertex = orderings(w2).iter().any(|t| {
                        let before = proj_instance(&cur, t).map(|r| strip(&r));
                        let after = proj_instance(&next, t).map(|r| strip(&r));
                        matches!((before, after), (Ok(b), Ok(a)) if Vertex::new(&b, &a) == vertex)
                    });
                    if !same_vertex {
                        implied = Some(w2.clone());
                        break;
                    }
                }
                if let Some(w2) = implied {
                    skip(format!("restricts ({})", names(&w2, &cur).join(",")), trace);
                    continue;
                }
                trace.push(TraceEvent::Prune {
                    round,
                    scope: names(w, &cur),
                    kept: o.to_string(),
                    before: projs[wi].to_string(),
                });
                chosen = Some(next);
                break 'search;
            }
        }
        let Some(next) = chosen else {
            return Err(SolveError::NoSink { round, detail: "every candidate has an outgoing arc".into() });
        };
        if let Err(v) = is_kl_minimal(&next, k, ell) {
            return Err(falsified(FalsificationKind::PruneBroke, format!("round {round}: {v:?}")));
        }
        cur = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimality_engine::{injectivize, kl_minimalize};
    use crate::solver::one_orbit_solve;

    fn rel(s: &str, arity: usize) -> Relation {
        Relation::parse_orbits(3, arity, s).unwrap()
    }

    #[test]
    fn single_orbits_are_a_fixpoint() {
        let u = Universe::hypergraph(3);
        let inst = Instance::with_vars(3, 3).constrain(&[0, 1, 2], rel("012:1", 3)).unwrap();
        let m = injectivize(&kl_minimalize(&inst, &u, 3, 4).unwrap(), &u).unwrap().instance;
        let m = kl_minimalize(&m, &u, 3, 4).unwrap();
        let mut trace = Vec::new();
        let out = prune_sinks(&m, &u, &ImplicationGraph::default(), &mut trace).unwrap();
        assert_eq!(out, m);
        assert!(trace.is_empty());
    }

    #[test]
    fn two_orbit_projections_are_pruned() {
        let u = Universe::hypergraph(3);
        let inst = Instance::with_vars(3, 5)
            .constrain(&[0, 1, 2], rel("012:1 012:0", 3))
            .unwrap()
            .constrain(&[2, 3, 4], rel("012:0", 3))
            .unwrap();
        let m = injectivize(&kl_minimalize(&inst, &u, 3, 4).unwrap(), &u).unwrap().instance;
        let m = kl_minimalize(&m, &u, 3, 4).unwrap();
        let mut trace = Vec::new();
        let out = prune_sinks(&m, &u, &ImplicationGraph::default(), &mut trace).unwrap();
        for w in k_subsets(5, 3) {
            assert_eq!(proj_instance(&out, &w).unwrap().len(), 1);
        }
        assert!(trace.iter().any(|t| matches!(t, TraceEvent::Prune { .. })));
        one_orbit_solve(&out, &u).unwrap().verify(&inst, &u).unwrap();
    }
}
