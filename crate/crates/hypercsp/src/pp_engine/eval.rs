use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use crate::orbit_algebra::combinatorics::{binom, colex_rank, first_appearance, k_subsets};
use crate::orbit_algebra::{OrbitDescriptor, Relation, Universe};
use crate::template::Template;

use super::formula::{AtomRel, PPFormula};
use super::PpError;

pub const DEFAULT_VAR_CAP: usize = 12;

/// Observed flags per leaf are enumerated exhaustively; this bounds the
/// enumeration.
const MAX_OBSERVED_FLAGS: usize = 22;

/// Number of leading variables whose choices are expanded before the
/// remaining search is handed to worker threads.
const SPLIT_VARS: usize = 3;

/// Satisfying orbit classes of a formula, projected to its free variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelingSet {
    pub vars: Vec<String>,
    pub relation: Relation,
}

/// Exact evaluator of pp-formulas over a template.
///
/// The search walks through the variables, letting each one join an
/// existing equality class or open a new one, and decides a hyperedge flag
/// only when an atom reads it. Flags nobody reads stay undecided; since
/// bounds are positive structures, a partial labeling extends to a
/// realizable one exactly when it is realizable with all undecided flags
/// false.
#[derive(Clone, Copy)]
pub struct Evaluator<'t> {
    template: &'t Template,
    cap: usize,
}

impl<'t> Evaluator<'t> {
    pub fn new(template: &'t Template) -> Self {
        Evaluator { template, cap: DEFAULT_VAR_CAP }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn template(&self) -> &'t Template {
        self.template
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Joint orbits of the observed tuples over all satisfying labelings.
    /// Observed tuples must consist of free variables.
    pub fn observe(&self, phi: &PPFormula, tuples: &[Vec<usize>]) -> Result<BTreeSet<Vec<OrbitDescriptor>>, PpError> {
        for t in tuples {
            if t.is_empty() {
                return Err(PpError::EmptyTuple);
            }
            if let Some(&v) = t.iter().find(|&&v| !phi.is_free(v)) {
                return Err(PpError::NotFree(phi.vars().get(v).cloned().unwrap_or_else(|| v.to_string())));
            }
        }
        let k = self.template.k();
        let width: usize = tuples.iter().map(|t| if t.len() >= k { binom(t.len(), k) } else { 0 }).sum();
        if width > MAX_OBSERVED_FLAGS {
            return Err(PpError::ObservationTooWide(width));
        }
        let prog = Program::compile(phi, self.template, self.cap)?;
        Ok(prog.run(&|st: &State, out: &mut BTreeSet<Vec<OrbitDescriptor>>| prog.observe_leaf(st, tuples, out)))
    }

    /// Satisfying classes on the free tuple.
    pub fn evaluate(&self, phi: &PPFormula) -> Result<LabelingSet, PpError> {
        let relation = self.proj_formula(phi, phi.free())?;
        Ok(LabelingSet { vars: phi.free().iter().map(|&v| phi.vars()[v].clone()).collect(), relation })
    }

    /// Projection of the satisfying classes onto `u`.
    pub fn proj_formula(&self, phi: &PPFormula, u: &[usize]) -> Result<Relation, PpError> {
        let obs = self.observe(phi, &[u.to_vec()])?;
        Ok(Relation::new(u.len(), obs.into_iter().map(|mut v| v.pop().expect("one observation")))?)
    }

    pub fn is_satisfiable(&self, phi: &PPFormula) -> Result<bool, PpError> {
        Ok(!self.observe(phi, &[])?.is_empty())
    }

    /// Pairs of free variables `(x, y)`, `x < y`, that take distinct values
    /// in some satisfying labeling.
    pub fn distinct_pairs(&self, phi: &PPFormula) -> Result<BTreeSet<(usize, usize)>, PpError> {
        Ok(self.pair_behaviour(phi)?.into_iter().filter(|&(_, _, same)| !same).map(|(x, y, _)| (x, y)).collect())
    }

    /// Whether every satisfying labeling is injective on the free variables.
    pub fn only_injective(&self, phi: &PPFormula) -> Result<bool, PpError> {
        Ok(self.pair_behaviour(phi)?.iter().all(|&(_, _, same)| !same))
    }

    /// Triples `(x, y, same)` over free `x < y`: `same` records that some
    /// satisfying labeling identifies them, `!same` that some separates them.
    pub fn pair_behaviour(&self, phi: &PPFormula) -> Result<BTreeSet<(usize, usize, bool)>, PpError> {
        let prog = Program::compile(phi, self.template, self.cap)?;
        let free = phi.free().to_vec();
        Ok(prog.run(&|st: &State, out: &mut BTreeSet<(usize, usize, bool)>| {
            for (a, &x) in free.iter().enumerate() {
                for &y in &free[a + 1..] {
                    out.insert((x.min(y), x.max(y), st.class_of[x] == st.class_of[y]));
                }
            }
        }))
    }

    /// One satisfying labeling of the free tuple, with every flag no atom
    /// reads set to non-edge. Deterministic: the first leaf in search order.
    pub fn witness(&self, phi: &PPFormula) -> Result<Option<OrbitDescriptor>, PpError> {
        if phi.free().is_empty() {
            return Err(PpError::EmptyTuple);
        }
        let prog = Program::compile(phi, self.template, self.cap)?;
        if prog.unsat {
            return Ok(None);
        }
        let mut st = prog.fresh_state();
        let mut found = None;
        let free = phi.free().to_vec();
        prog.rec(0, prog.steps.len(), &mut st, &mut |s| {
            let cls: Vec<u8> = free.iter().map(|&v| s.class_of[v]).collect();
            let (pattern, reps) = first_appearance(&cls);
            let distinct: Vec<usize> = reps.iter().map(|&r| cls[r] as usize).collect();
            let flags = prog.subsets[distinct.len()]
                .iter()
                .map(|sub| {
                    let mut c: Vec<usize> = sub.iter().map(|&i| distinct[i]).collect();
                    c.sort_unstable();
                    s.flags[colex_rank(&c)] == 1
                })
                .collect();
            found = Some(OrbitDescriptor::new(prog.k, pattern, flags).expect("consistent"));
            true
        });
        Ok(found)
    }

    /// Whether every satisfying labeling whose `u`-orbit lies in `t` has
    /// `x = y`.
    pub fn entails_equality(
        &self,
        phi: &PPFormula,
        t: &Relation,
        u: &[usize],
        x: usize,
        y: usize,
    ) -> Result<bool, PpError> {
        if t.arity() != u.len() {
            return Err(PpError::LengthMismatch { left: t.arity(), right: u.len() });
        }
        let obs = self.observe(phi, &[u.to_vec(), vec![x, y]])?;
        Ok(obs.iter().all(|o| !t.contains(&o[0]) || !o[1].is_injective()))
    }
}

enum Step {
    Assign(usize),
    Atom(usize),
}

struct CompiledAtom {
    args: Vec<usize>,
    /// member orbits grouped by pattern, as flag vectors
    by_pattern: HashMap<Vec<u8>, Vec<Vec<bool>>>,
}

struct Program<'t> {
    k: usize,
    steps: Vec<Step>,
    eq_with: Vec<Vec<usize>>,
    neq_with: Vec<Vec<usize>>,
    atoms: Vec<CompiledAtom>,
    subsets: Vec<Vec<Vec<usize>>>,
    universe: &'t Universe,
    has_bounds: bool,
    n_vars: usize,
    split_at: usize,
    unsat: bool,
}

#[derive(Clone)]
struct State {
    class_of: Vec<u8>,
    classes: usize,
    flags: Vec<i8>,
    trail: Vec<usize>,
}

impl State {
    fn flag(&self, sorted: &[usize]) -> bool {
        self.flags[colex_rank(sorted)] == 1
    }
}

impl<'t> Program<'t> {
    fn compile(phi: &PPFormula, template: &'t Template, cap: usize) -> Result<Program<'t>, PpError> {
        phi.check(template)?;
        let n = phi.var_count();
        if n > cap {
            return Err(PpError::CapExceeded { vars: n, cap });
        }
        let k = template.k();
        let mut atoms = Vec::new();
        let mut eqs = Vec::new();
        let mut neqs = Vec::new();
        for a in phi.atoms() {
            let rel = match &a.rel {
                AtomRel::Eq => {
                    eqs.push((a.args[0], a.args[1]));
                    continue;
                }
                AtomRel::Neq => {
                    neqs.push((a.args[0], a.args[1]));
                    continue;
                }
                AtomRel::Named(name) => {
                    template.relation(name).ok_or_else(|| PpError::UnknownRelation(name.clone()))?
                }
                AtomRel::Inline(r) => r,
            };
            let mut by_pattern: HashMap<Vec<u8>, Vec<Vec<bool>>> = HashMap::new();
            for o in rel.iter() {
                by_pattern.entry(o.pattern().to_vec()).or_default().push(o.flags().to_vec());
            }
            atoms.push(CompiledAtom { args: a.args.clone(), by_pattern });
        }

        // Assignment order: variables of each atom in turn, then the free
        // variables no atom mentions. Quantified variables that occur in no
        // atom can always be sent to fresh points and are skipped.
        let mut order: Vec<usize> = Vec::new();
        let mut seen = vec![false; n];
        let mut mentioned = vec![false; n];
        let pair_args = eqs.iter().chain(&neqs).flat_map(|&(x, y)| [x, y]);
        for v in atoms.iter().flat_map(|a| a.args.iter().copied()).chain(pair_args) {
            mentioned[v] = true;
        }
        for v in atoms.iter().flat_map(|a| a.args.iter().copied()).chain(phi.free().iter().copied()).chain(0..n) {
            if !seen[v] && (mentioned[v] || phi.is_free(v)) {
                seen[v] = true;
                order.push(v);
            }
        }
        let pos: Vec<usize> = {
            let mut p = vec![usize::MAX; n];
            for (i, &v) in order.iter().enumerate() {
                p[v] = i;
            }
            p
        };
        let mut eq_with = vec![Vec::new(); n];
        let mut neq_with = vec![Vec::new(); n];
        for &(x, y) in &eqs {
            if x != y {
                let (a, b) = if pos[x] < pos[y] { (x, y) } else { (y, x) };
                eq_with[b].push(a);
            }
        }
        let unsat = neqs.iter().any(|&(x, y)| x == y);
        for &(x, y) in &neqs {
            let (a, b) = if pos[x] < pos[y] { (x, y) } else { (y, x) };
            neq_with[b].push(a);
        }
        let mut steps = Vec::new();
        let mut split_at = 0;
        for (i, &v) in order.iter().enumerate() {
            if i == SPLIT_VARS {
                split_at = steps.len();
            }
            steps.push(Step::Assign(v));
            for (ai, a) in atoms.iter().enumerate() {
                if a.args.iter().map(|&x| pos[x]).max() == Some(i) {
                    steps.push(Step::Atom(ai));
                }
            }
        }
        if order.len() <= SPLIT_VARS {
            split_at = steps.len();
        }
        let subsets = (0..=n.max(k)).map(|m| if m >= k { k_subsets(m, k) } else { Vec::new() }).collect();
        let universe = template.universe();
        Ok(Program {
            k,
            steps,
            eq_with,
            neq_with,
            atoms,
            subsets,
            universe,
            has_bounds: !universe.bounds().is_empty(),
            n_vars: n,
            split_at,
            unsat,
        })
    }

    fn fresh_state(&self) -> State {
        let nflags = if self.n_vars >= self.k { binom(self.n_vars, self.k) } else { 0 };
        State { class_of: vec![u8::MAX; self.n_vars], classes: 0, flags: vec![-1; nflags], trail: Vec::new() }
    }

    fn realizable(&self, st: &State) -> bool {
        self.universe.admits(st.classes, &|s| st.flag(s))
    }

    fn run<T, F>(&self, visit: &F) -> BTreeSet<T>
    where
        T: Ord + Send,
        F: Fn(&State, &mut BTreeSet<T>) + Sync,
    {
        let mut st = self.fresh_state();
        if self.unsat {
            return BTreeSet::new();
        }
        if rayon::current_num_threads() <= 1 || self.split_at == self.steps.len() {
            let mut out = BTreeSet::new();
            self.rec(0, self.steps.len(), &mut st, &mut |s| {
                visit(s, &mut out);
                false
            });
            return out;
        }
        let mut frontier = Vec::new();
        self.rec(0, self.split_at, &mut st, &mut |s| {
            let mut c = s.clone();
            c.trail.clear();
            frontier.push(c);
            false
        });
        frontier
            .into_par_iter()
            .map(|mut s| {
                let mut out = BTreeSet::new();
                self.rec(self.split_at, self.steps.len(), &mut s, &mut |s| {
                    visit(s, &mut out);
                    false
                });
                out
            })
            .reduce(BTreeSet::new, |mut a, mut b| {
                if a.len() < b.len() {
                    std::mem::swap(&mut a, &mut b);
                }
                a.append(&mut b);
                a
            })
    }

    /// Depth-first search from `step`; `sink` sees every state reaching
    /// `limit` and returns true to stop the search.
    fn rec(&self, step: usize, limit: usize, st: &mut State, sink: &mut dyn FnMut(&State) -> bool) -> bool {
        if step == limit {
            return sink(st);
        }
        match self.steps[step] {
            Step::Assign(v) => {
                let choices: Vec<u8> = match self.eq_with[v].first() {
                    Some(&w) => vec![st.class_of[w]],
                    None => (0..=st.classes as u8).collect(),
                };
                for c in choices {
                    if self.eq_with[v].iter().any(|&w| st.class_of[w] != c)
                        || self.neq_with[v].iter().any(|&w| st.class_of[w] == c)
                    {
                        continue;
                    }
                    let opened = c as usize == st.classes;
                    st.class_of[v] = c;
                    if opened {
                        st.classes += 1;
                    }
                    let stop = self.rec(step + 1, limit, st, sink);
                    if opened {
                        st.classes -= 1;
                    }
                    st.class_of[v] = u8::MAX;
                    if stop {
                        return true;
                    }
                }
                false
            }
            Step::Atom(ai) => {
                let atom = &self.atoms[ai];
                let cls: Vec<u8> = atom.args.iter().map(|&a| st.class_of[a]).collect();
                let (pattern, reps) = first_appearance(&cls);
                let Some(candidates) = atom.by_pattern.get(&pattern) else {
                    return false;
                };
                let distinct: Vec<usize> = reps.iter().map(|&r| cls[r] as usize).collect();
                let ranks: Vec<usize> = self.subsets[distinct.len()]
                    .iter()
                    .map(|s| {
                        let mut c: Vec<usize> = s.iter().map(|&i| distinct[i]).collect();
                        c.sort_unstable();
                        colex_rank(&c)
                    })
                    .collect();
                for flags in candidates {
                    let consistent = ranks.iter().zip(flags).all(|(&r, &f)| st.flags[r] < 0 || (st.flags[r] == 1) == f);
                    if !consistent {
                        continue;
                    }
                    let mark = st.trail.len();
                    let mut new_edge = false;
                    for (&r, &f) in ranks.iter().zip(flags) {
                        if st.flags[r] < 0 {
                            st.flags[r] = f as i8;
                            st.trail.push(r);
                            new_edge |= f;
                        }
                    }
                    let stop =
                        (!(self.has_bounds && new_edge) || self.realizable(st)) && self.rec(step + 1, limit, st, sink);
                    while st.trail.len() > mark {
                        let r = st.trail.pop().expect("trail");
                        st.flags[r] = -1;
                    }
                    if stop {
                        return true;
                    }
                }
                false
            }
        }
    }

    fn observe_leaf(&self, st: &State, tuples: &[Vec<usize>], out: &mut BTreeSet<Vec<OrbitDescriptor>>) {
        // per tuple: pattern, and for each flag the rank of its class subset
        let shapes: Vec<(Vec<u8>, Vec<usize>)> = tuples
            .iter()
            .map(|t| {
                let cls: Vec<u8> = t.iter().map(|&v| st.class_of[v]).collect();
                let (pattern, reps) = first_appearance(&cls);
                let distinct: Vec<usize> = reps.iter().map(|&r| cls[r] as usize).collect();
                let ranks = self.subsets[distinct.len()]
                    .iter()
                    .map(|s| {
                        let mut c: Vec<usize> = s.iter().map(|&i| distinct[i]).collect();
                        c.sort_unstable();
                        colex_rank(&c)
                    })
                    .collect();
                (pattern, ranks)
            })
            .collect();
        let undecided: Vec<usize> = shapes
            .iter()
            .flat_map(|(_, r)| r.iter().copied())
            .filter(|&r| st.flags[r] < 0)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut flags = st.flags.clone();
        for mask in 0u64..1 << undecided.len() {
            for (i, &r) in undecided.iter().enumerate() {
                flags[r] = (mask >> i & 1) as i8;
            }
            if self.has_bounds
                && mask != 0
                && !self.universe.admits(st.classes, &|s: &[usize]| flags[colex_rank(s)] == 1)
            {
                continue;
            }
            let obs = shapes
                .iter()
                .map(|(pattern, ranks)| {
                    let f = ranks.iter().map(|&r| flags[r] == 1).collect();
                    OrbitDescriptor::new(self.k, pattern.clone(), f).expect("consistent shape")
                })
                .collect();
            out.insert(obs);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit_algebra::Fragment;

    fn h3() -> Template {
        Template::plain(Universe::hypergraph(3))
    }

    fn parse(s: &str) -> PPFormula {
        PPFormula::parse(s, 3).unwrap()
    }

    #[test]
    fn single_edge_atom() {
        let t = h3();
        let ev = Evaluator::new(&t);
        let r = ev.evaluate(&parse("free(x,y,z) := E(x,y,z)")).unwrap();
        assert_eq!(r.relation.orbit_list(), "012:1");
        assert!(ev.evaluate(&parse("free(x,y,z) := E(x,y,z) & N(x,y,z)")).unwrap().relation.is_empty());
    }

    #[test]
    fn quantified_edges_cover_all_pairs() {
        let t = h3();
        let ev = Evaluator::new(&t);
        let phi = parse("free(x,y) := E(x,y,z)");
        // hyperedges are on distinct points, so x = y is impossible
        assert_eq!(ev.evaluate(&phi).unwrap().relation.orbit_list(), "01");
        assert_eq!(ev.proj_formula(&phi, &[0, 0]).unwrap().orbit_list(), "00");
        let empty = parse("free(x,y,z) := true");
        assert_eq!(ev.proj_formula(&empty, &[0, 1, 2]).unwrap().len(), 6);
    }

    #[test]
    fn k3free_forbids_triangles() {
        let t = Template::plain(Universe::k3_free());
        let ev = Evaluator::new(&t);
        let tri = PPFormula::parse("free(x,y,z) := E(x,y) & E(y,z) & E(x,z)", 2).unwrap();
        assert!(!ev.is_satisfiable(&tri).unwrap());
        let path = PPFormula::parse("free(x,z) := E(x,y) & E(y,z)", 2).unwrap();
        assert_eq!(ev.evaluate(&path).unwrap().relation.orbit_list(), "00 01:0");
        let obs = PPFormula::parse("free(x,y,z) := E(x,y) & E(y,z)", 2).unwrap();
        let r = ev.evaluate(&obs).unwrap().relation;
        assert!(r.iter().all(|o| o.arity() == 3));
        assert!(!r.contains(&OrbitDescriptor::parse(2, "012:111").unwrap()));
        assert!(r.contains(&OrbitDescriptor::parse(2, "012:101").unwrap()));
    }

    #[test]
    fn entailment() {
        let t = h3();
        let ev = Evaluator::new(&t);
        let phi = parse("free(x,y,z) := x = y");
        let all = Relation::full(t.universe(), 3);
        assert!(ev.entails_equality(&phi, &all, &[0, 1, 2], 0, 1).unwrap());
        let free = parse("free(x,y,z) := true");
        assert!(!ev.entails_equality(&free, &all, &[0, 1, 2], 0, 1).unwrap());
    }

    #[test]
    fn errors() {
        let t = h3();
        let ev = Evaluator::new(&t);
        assert!(matches!(ev.evaluate(&parse("free(x) := R(x)")), Err(PpError::UnknownRelation(_))));
        assert!(matches!(ev.evaluate(&parse("free(x,y) := E(x,y)")), Err(PpError::ArityMismatch { .. })));
        let big = PPFormula::with_vars(13);
        assert!(matches!(ev.is_satisfiable(&big), Err(PpError::CapExceeded { .. })));
        let phi = parse("free(x) := E(x,y,z)");
        assert!(matches!(ev.proj_formula(&phi, &[1]), Err(PpError::NotFree(_))));
    }

    /// Brute force: every total fragment on |W| points, every assignment.
    fn brute(phi: &PPFormula, t: &Template) -> BTreeSet<OrbitDescriptor> {
        let n = phi.var_count();
        let k = t.k();
        let subsets = k_subsets(n, k);
        let mut out = BTreeSet::new();
        for mask in 0u64..1 << subsets.len() {
            let frag = Fragment::total(k, n, |s| mask >> subsets.iter().position(|x| x == s).unwrap() & 1 == 1);
            if !t.universe().realizable(&frag) {
                continue;
            }
            let mut assign = vec![0usize; n];
            loop {
                let ok = phi.atoms().iter().all(|a| {
                    let tup: Vec<usize> = a.args.iter().map(|&v| assign[v]).collect();
                    match &a.rel {
                        AtomRel::Eq => tup[0] == tup[1],
                        AtomRel::Neq => tup[0] != tup[1],
                        AtomRel::Named(name) => t.relation(name).unwrap().contains(&frag.orbit_of(&tup).unwrap()),
                        AtomRel::Inline(r) => r.contains(&frag.orbit_of(&tup).unwrap()),
                    }
                });
                if ok {
                    let tup: Vec<usize> = phi.free().iter().map(|&v| assign[v]).collect();
                    out.insert(frag.orbit_of(&tup).unwrap());
                }
                let mut i = 0;
                while i < n {
                    assign[i] += 1;
                    if assign[i] < n {
                        break;
                    }
                    assign[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
            }
        }
        out
    }

    #[test]
    fn matches_brute_force() {
        let t = h3().with_relation("R", Relation::parse_orbits(3, 3, "001 012:1").unwrap());
        let ev = Evaluator::new(&t);
        for src in [
            "free(x,y,z) := E(x,y,z)",
            "free(x,y) := R(x,y,z) & N(y,z,w)",
            "free(x,y,z,w) := R(x,y,z) & R(y,z,w)",
            "free(x,w) := E(x,y,z) & N(y,z,w) & x != w",
            "free(x,y,z) := R(x,x,y) & E(x,y,z)",
        ] {
            let phi = parse(src);
            assert_eq!(ev.evaluate(&phi).unwrap().relation.orbits(), &brute(&phi, &t), "{src}");
        }
        let g = Template::plain(Universe::k3_free());
        let ev = Evaluator::new(&g);
        for src in ["free(x,y,z) := E(x,y) & N(y,z)", "free(x,z) := E(x,y) & E(y,z) & E(z,w)"] {
            let phi = PPFormula::parse(src, 2).unwrap();
            assert_eq!(ev.evaluate(&phi).unwrap().relation.orbits(), &brute(&phi, &g), "{src}");
        }
    }
}
