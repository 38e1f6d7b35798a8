use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::orbit_algebra::combinatorics::{injective_tuples, k_subsets};
use crate::orbit_algebra::Relation;
use crate::pp_engine::{Evaluator, PPFormula};

use super::compose::compose_implications;
use super::implication::{check_implication, Implication, OrbitPairs};

/// Bounds of the candidate search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphSearch {
    pub max_atoms: usize,
    pub max_vars: usize,
    pub closure_depth: usize,
    /// Cap on candidate checks; hitting it marks the graph truncated.
    pub budget: usize,
}

impl Default for GraphSearch {
    fn default() -> Self {
        GraphSearch { max_atoms: 2, max_vars: 4, closure_depth: 1, budget: 200_000 }
    }
}

/// A vertex `(C1, C)` with `∅ ≠ C ⊊ C1`; relation names are dropped.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    pub c1: Relation,
    pub c: Relation,
}

impl Vertex {
    pub fn new(c1: &Relation, c: &Relation) -> Self {
        let strip = |r: &Relation| Relation::new(r.arity(), r.iter().cloned()).expect("same arity");
        Vertex { c1: strip(c1), c: strip(c) }
    }

    pub fn label(&self) -> String {
        format!("({{{}}},{{{}}})", self.c1.orbit_list(), self.c.orbit_list())
    }
}

/// A bounded under-approximation of the (injective) implication graph.
/// Every arc carries the implication that witnesses it.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ImplicationGraph {
    pub injective: bool,
    pub vertices: BTreeSet<Vertex>,
    pub arcs: BTreeMap<(Vertex, Vertex), Implication>,
    pub truncated: bool,
}

impl ImplicationGraph {
    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn successors<'a>(&'a self, v: &'a Vertex) -> impl Iterator<Item = &'a Vertex> + 'a {
        self.arcs.range((v.clone(), min_vertex())..).take_while(move |((a, _), _)| a == v).map(|((_, b), _)| b)
    }

    fn add(&mut self, imp: Implication) -> bool {
        let from = Vertex::new(&imp.c1, &imp.c);
        let to = Vertex::new(&imp.d1, &imp.d);
        if self.injective && from == to {
            return false;
        }
        if self.arcs.contains_key(&(from.clone(), to.clone())) {
            return false;
        }
        self.vertices.insert(from.clone());
        self.vertices.insert(to.clone());
        self.arcs.insert((from, to), imp);
        true
    }

    /// DOT export; every arc carries its witnessing formula and tuples.
    pub fn to_dot(&self) -> String {
        let index: BTreeMap<&Vertex, usize> = self.vertices.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut out = String::from("digraph implications {\n");
        for (v, i) in &index {
            let _ = writeln!(out, "  v{i} [label=\"{}\"];", v.label());
        }
        for (w, ((a, b), imp)) in self.arcs.iter().enumerate() {
            let names = |t: &[usize]| t.iter().map(|&x| imp.formula.vars()[x].as_str()).collect::<Vec<_>>().join(",");
            let _ = writeln!(
                out,
                "  v{} -> v{} [label=\"w{w}\", formula=\"{}\", u=\"{}\", v=\"{}\"];",
                index[a],
                index[b],
                imp.formula,
                names(&imp.u),
                names(&imp.v)
            );
        }
        out.push_str("}\n");
        out
    }
}

/// Sorts before every real vertex: arity 0 is below any relation arity.
fn min_vertex() -> Vertex {
    Vertex { c1: Relation::empty(0), c: Relation::empty(0) }
}

/// Acyclicity verdict with a witness cycle on failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicityReport {
    pub simple: bool,
    /// `cycle[i] -> cycle[i + 1]` and the last vertex back to the first
    pub cycle: Vec<Vertex>,
    pub witnesses: Vec<Implication>,
}

pub fn is_implicationally_simple(g: &ImplicationGraph) -> SimplicityReport {
    let none = SimplicityReport { simple: true, cycle: Vec::new(), witnesses: Vec::new() };
    let Some(cycle) = find_cycle(g) else { return none };
    let witnesses =
        (0..cycle.len()).map(|i| g.arcs[&(cycle[i].clone(), cycle[(i + 1) % cycle.len()].clone())].clone()).collect();
    SimplicityReport { simple: false, cycle, witnesses }
}

/// Shortest cycle through the least vertex lying on any cycle.
fn find_cycle(g: &ImplicationGraph) -> Option<Vec<Vertex>> {
    for start in &g.vertices {
        let mut prev: BTreeMap<&Vertex, &Vertex> = BTreeMap::new();
        let mut queue: VecDeque<&Vertex> = VecDeque::from([start]);
        let mut seen: BTreeSet<&Vertex> = BTreeSet::new();
        while let Some(x) = queue.pop_front() {
            for y in g.successors(x) {
                if y == start {
                    let mut path = vec![x.clone()];
                    let mut cur = x;
                    while cur != start {
                        cur = prev[cur];
                        path.push(cur.clone());
                    }
                    path.reverse();
                    return Some(path);
                }
                if seen.insert(y) {
                    prev.insert(y, x);
                    queue.push_back(y);
                }
            }
        }
    }
    None
}

/// Conjunctions of signature atoms with pairwise distinct arguments, in a
/// canonical form: variables are numbered by first occurrence and atoms are
/// sorted. Formulas with fewer than `min_vars` variables are skipped.
pub(super) fn candidates(ev: &Evaluator<'_>, search: &GraphSearch, min_vars: usize) -> Vec<PPFormula> {
    let t = ev.template();
    let sig: Vec<(String, usize)> = t
        .signature()
        .into_iter()
        .filter(|(_, r)| r.arity() <= search.max_vars && r.arity() >= 1)
        .map(|(n, r)| (n.to_string(), r.arity()))
        .collect();
    let mut out = Vec::new();
    let mut atoms: Vec<(usize, Vec<usize>)> = Vec::new();
    extend(&sig, search, min_vars, 0, &mut atoms, &mut out);
    out
}

fn extend(
    sig: &[(String, usize)],
    search: &GraphSearch,
    min_vars: usize,
    used: usize,
    atoms: &mut Vec<(usize, Vec<usize>)>,
    out: &mut Vec<PPFormula>,
) {
    if used >= min_vars && !atoms.is_empty() {
        let mut phi = PPFormula::with_vars(used);
        for (r, args) in atoms.iter() {
            phi = phi.atom(&sig[*r].0, args);
        }
        out.push(phi);
    }
    if atoms.len() == search.max_atoms {
        return;
    }
    for (ri, (_, arity)) in sig.iter().enumerate() {
        if atoms.last().is_some_and(|(last, _)| *last > ri) {
            continue;
        }
        let avail = (used + arity).min(search.max_vars);
        if *arity > avail {
            continue;
        }
        for args in injective_tuples(avail, *arity) {
            // new variables enter in order
            let mut next = used;
            let fresh_ok = args.iter().all(|&a| {
                if a < next {
                    true
                } else if a == next {
                    next += 1;
                    true
                } else {
                    false
                }
            });
            if !fresh_ok {
                continue;
            }
            if atoms.last().is_some_and(|(last, prev)| *last == ri && *prev >= args) {
                continue;
            }
            atoms.push((ri, args));
            extend(sig, search, min_vars, next, atoms, out);
            atoms.pop();
        }
    }
}

/// Arcs found from one candidate: at most one witness per arc, in
/// discovery order, plus the number of checks spent.
struct Found {
    cost: usize,
    arcs: Vec<Implication>,
    targets: Vec<Relation>,
}

fn search_candidate(ev: &Evaluator<'_>, phi: &PPFormula, injective: bool, pool: &[Relation], budget: usize) -> Found {
    let k = ev.template().k();
    let n = phi.var_count();
    let mut found = Found { cost: 0, arcs: Vec::new(), targets: Vec::new() };
    let mut keys: BTreeSet<(Vertex, Vertex)> = BTreeSet::new();
    for size in k + 1..=n.min(2 * k) {
        for f in k_subsets(n, size) {
            let keep: BTreeSet<usize> = f.iter().copied().collect();
            let mut phi_f = phi.clone().exists_except(&keep);
            if injective {
                phi_f = phi_f.all_distinct();
            }
            let Ok(rel) = ev.evaluate(&phi_f).map(|l| l.relation) else { continue };
            if rel.is_empty() || !separating(&rel, size) {
                continue;
            }
            // positions within the free tuple, which is `f` in order
            for u in injective_tuples(size, k) {
                for v in injective_tuples(size, k) {
                    let cover: BTreeSet<usize> = u.iter().chain(&v).copied().collect();
                    if cover.len() != size {
                        continue;
                    }
                    let pairs: OrbitPairs =
                        rel.iter().map(|o| (o.project_unchecked(&u), o.project_unchecked(&v))).collect();
                    let c1 = Relation::new(k, pairs.iter().map(|(a, _)| a.clone())).expect("arity k");
                    let d1 = Relation::new(k, pairs.iter().map(|(_, b)| b.clone())).expect("arity k");
                    let mut tried: BTreeSet<Relation> = BTreeSet::new();
                    let singles = c1.iter().cloned().map(Relation::singleton);
                    for c in singles.chain(pool.iter().map(|p| p.intersect(&c1).expect("arity k"))) {
                        if c.is_empty() || !c.is_proper_subset(&c1) || (injective && !c.is_injective()) {
                            continue;
                        }
                        if !tried.insert(c.clone()) {
                            continue;
                        }
                        found.cost += 1;
                        if found.cost > budget {
                            return found;
                        }
                        let d = Relation::new(k, pairs.iter().filter(|(a, _)| c.contains(a)).map(|(_, b)| b.clone()))
                            .expect("arity k");
                        if !d.is_proper_subset(&d1) {
                            continue;
                        }
                        let key = (Vertex::new(&c1, &c), Vertex::new(&d1, &d));
                        if injective && key.0 == key.1 {
                            continue;
                        }
                        if !keys.insert(key) {
                            continue;
                        }
                        let uu: Vec<usize> = u.iter().map(|&i| f[i]).collect();
                        let vv: Vec<usize> = v.iter().map(|&i| f[i]).collect();
                        if let Ok(Ok(imp)) = check_implication(ev, &phi_f, &uu, &vv, &c, &d) {
                            if !injective || imp.injective {
                                found.targets.push(d.clone());
                                found.arcs.push(imp);
                            }
                        }
                    }
                }
            }
        }
    }
    found
}

/// Every pair of positions is separated by some labeling.
pub(super) fn separating(rel: &Relation, arity: usize) -> bool {
    (0..arity).all(|i| (i + 1..arity).all(|j| rel.iter().any(|o| !o.same(i, j))))
}

/// Sound bounded construction of the implication graph (injective when
/// `injective`): single candidate formulas first, with source relations
/// drawn from single orbits, template relations and targets found so far,
/// then closure under composition.
pub fn build_implication_graph(ev: &Evaluator<'_>, search: &GraphSearch, injective: bool) -> ImplicationGraph {
    let mut g = ImplicationGraph { injective, ..Default::default() };
    let k = ev.template().k();
    let cands = candidates(ev, search, k + 1);
    let mut pool: Vec<Relation> = ev
        .template()
        .signature()
        .into_iter()
        .filter(|(_, r)| r.arity() == k)
        .map(|(_, r)| Relation::new(k, r.iter().cloned()).expect("arity k"))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut spent = 0usize;
    'passes: for _pass in 0..2 {
        let mut new_targets: BTreeSet<Relation> = BTreeSet::new();
        const CHUNK: usize = 64;
        for chunk in cands.chunks(CHUNK) {
            let remaining = search.budget.saturating_sub(spent);
            let results: Vec<Found> =
                chunk.par_iter().map(|phi| search_candidate(ev, phi, injective, &pool, remaining)).collect();
            for r in results {
                if spent + r.cost > search.budget {
                    g.truncated = true;
                    break 'passes;
                }
                spent += r.cost;
                for imp in r.arcs {
                    g.add(imp);
                }
                new_targets.extend(r.targets);
            }
        }
        let before = pool.len();
        pool.extend(new_targets);
        pool.sort();
        pool.dedup();
        if pool.len() == before {
            break;
        }
    }
    if !g.truncated {
        close(ev, &mut g, search, &mut spent);
    }
    g
}

fn close(ev: &Evaluator<'_>, g: &mut ImplicationGraph, search: &GraphSearch, spent: &mut usize) {
    for _ in 0..search.closure_depth {
        let arcs: Vec<Implication> = g.arcs.values().cloned().collect();
        let mut jobs: Vec<(usize, usize)> = Vec::new();
        for (a, i1) in arcs.iter().enumerate() {
            let to = Vertex::new(&i1.d1, &i1.d);
            for (b, i2) in arcs.iter().enumerate() {
                let glued = i1.formula.var_count() + i2.formula.var_count() - i1.v.len();
                if Vertex::new(&i2.c1, &i2.c) == to && glued <= ev.cap() {
                    jobs.push((a, b));
                }
            }
        }
        if *spent + jobs.len() > search.budget {
            g.truncated = true;
            jobs.truncate(search.budget.saturating_sub(*spent));
        }
        *spent += jobs.len();
        let results: Vec<Option<Implication>> = jobs
            .par_iter()
            .map(|&(a, b)| {
                let imp = compose_implications(ev, &arcs[a], &arcs[b], g.injective).ok()?;
                (imp.separating && (!g.injective || imp.injective)).then_some(imp)
            })
            .collect();
        let mut added = false;
        for imp in results.into_iter().flatten() {
            added |= g.add(imp);
        }
        if !added || g.truncated {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::implication_engine::fixtures::iff_template;
    use crate::orbit_algebra::Universe;
    use crate::template::Template;

    #[test]
    fn plain_hypergraph_has_no_injective_arcs() {
        let t = Template::plain(Universe::hypergraph(3));
        let ev = Evaluator::new(&t);
        let g = build_implication_graph(&ev, &GraphSearch::default(), true);
        assert!(g.is_empty() && !g.truncated);
        assert!(is_implicationally_simple(&g).simple);
        // equalities propagate through shared variables
        let g = build_implication_graph(&ev, &GraphSearch::default(), false);
        assert!(!g.is_empty());
        for imp in g.arcs.values() {
            assert!(check_implication(&ev, &imp.formula, &imp.u, &imp.v, &imp.c, &imp.d).unwrap().is_ok());
        }
    }

    #[test]
    fn xor_gives_an_injective_cycle() {
        let t = iff_template();
        let ev = Evaluator::new(&t);
        let g = build_implication_graph(&ev, &GraphSearch::default(), true);
        assert!(!g.truncated);
        let rep = is_implicationally_simple(&g);
        assert!(!rep.simple);
        assert!(rep.cycle.len() >= 2);
        for (i, w) in rep.witnesses.iter().enumerate() {
            assert_eq!(Vertex::new(&w.c1, &w.c), rep.cycle[i]);
            assert_eq!(Vertex::new(&w.d1, &w.d), rep.cycle[(i + 1) % rep.cycle.len()]);
        }
        for ((a, b), imp) in &g.arcs {
            let again = check_implication(&ev, &imp.formula, &imp.u, &imp.v, &imp.c, &imp.d).unwrap().unwrap();
            assert!(again.injective);
            assert_eq!((&Vertex::new(&again.c1, &again.c), &Vertex::new(&again.d1, &again.d)), (a, b));
        }
        assert!(g.to_dot().starts_with("digraph"));
    }

    #[test]
    fn tiny_budget_truncates() {
        let t = iff_template();
        let ev = Evaluator::new(&t);
        let search = GraphSearch { budget: 3, ..GraphSearch::default() };
        assert!(build_implication_graph(&ev, &search, false).truncated);
    }

    #[test]
    fn candidates_have_more_than_k_variables() {
        let t = iff_template();
        let ev = Evaluator::new(&t);
        let c = candidates(&ev, &GraphSearch::default(), 4);
        assert!(!c.is_empty());
        assert!(c.iter().all(|p| p.var_count() > 3 && p.var_count() <= 4));
        let texts: BTreeSet<String> = c.iter().map(|p| p.to_string()).collect();
        assert_eq!(texts.len(), c.len());
    }
}
