use std::collections::BTreeSet;
use std::fmt::Write as _;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::orbit_algebra::combinatorics::permutations;
use crate::orbit_algebra::{OrbitDescriptor, Relation};
use crate::pp_engine::{materialize, materialized_index, syntactic_compose, syntactic_power, Composed, Evaluator};

use super::implication::{check_implication, Implication, OrbitPairs};
use super::ImplError;

/// Boolean adjacency matrix over the vertex indices of an [`ImplDigraph`].
pub type Matrix = Vec<Vec<bool>>;

/// The mapping-pair digraph of a `(C, C)`-implication: vertices are the
/// orbits of `E = proj_u = proj_v`, arcs the `OP`-mappings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImplDigraph {
    vertices: Vec<OrbitDescriptor>,
    adj: Matrix,
    in_c: Vec<bool>,
}

impl ImplDigraph {
    pub fn new(imp: &Implication) -> Result<Self, ImplError> {
        if !imp.c1.same_orbits(&imp.d1) {
            return Err(ImplError::ProjectionMismatch(format!("proj_u = {} but proj_v = {}", imp.c1, imp.d1)));
        }
        Ok(Self::from_pairs(imp.c1.iter().cloned(), &imp.pairs, &imp.c))
    }

    /// Builds the digraph on `vertices`; pairs touching other orbits are
    /// dropped.
    pub fn from_pairs(vertices: impl IntoIterator<Item = OrbitDescriptor>, pairs: &OrbitPairs, c: &Relation) -> Self {
        let vertices: Vec<OrbitDescriptor> = vertices.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let n = vertices.len();
        let index = |o: &OrbitDescriptor| vertices.binary_search(o).ok();
        let mut adj = vec![vec![false; n]; n];
        for (o, p) in pairs {
            if let (Some(i), Some(j)) = (index(o), index(p)) {
                adj[i][j] = true;
            }
        }
        let in_c = vertices.iter().map(|o| c.contains(o)).collect();
        ImplDigraph { vertices, adj, in_c }
    }

    pub fn vertices(&self) -> &[OrbitDescriptor] {
        &self.vertices
    }

    pub fn adjacency(&self) -> &Matrix {
        &self.adj
    }

    pub fn arcs(&self) -> impl Iterator<Item = (&OrbitDescriptor, &OrbitDescriptor)> + '_ {
        let n = self.vertices.len();
        (0..n).flat_map(move |i| {
            (0..n).filter(move |&j| self.adj[i][j]).map(move |j| (&self.vertices[i], &self.vertices[j]))
        })
    }

    pub fn is_smooth(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| (0..n).any(|j| self.adj[i][j]) && (0..n).any(|j| self.adj[j][i]))
    }

    /// Strongly connected components in the strict sense: a lone vertex
    /// counts only with a loop. Each component is sorted, and components
    /// are ordered by their least vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        components_of(&self.adj)
    }

    /// Every arc leaving `set` ends in `set`.
    pub fn is_sink(&self, set: &[usize]) -> bool {
        let n = self.vertices.len();
        set.iter().all(|&i| (0..n).all(|j| !self.adj[i][j] || set.contains(&j)))
    }

    /// Every arc entering `set` starts in `set`.
    pub fn is_source(&self, set: &[usize]) -> bool {
        let n = self.vertices.len();
        set.iter().all(|&j| (0..n).all(|i| !self.adj[i][j] || set.contains(&i)))
    }

    /// Sink components inside `Vert(C)` and source components inside
    /// `Vert(E \ C)`, each in canonical order; the first of each list is the
    /// deterministic choice.
    pub fn sinks_sources(&self) -> (Vec<Vec<OrbitDescriptor>>, Vec<Vec<OrbitDescriptor>>) {
        let named = |s: &[usize]| s.iter().map(|&i| self.vertices[i].clone()).collect::<Vec<_>>();
        let comps = self.components();
        let sinks = comps.iter().filter(|s| s.iter().all(|&i| self.in_c[i]) && self.is_sink(s)).map(|s| named(s));
        let sources = comps.iter().filter(|s| s.iter().all(|&i| !self.in_c[i]) && self.is_source(s)).map(|s| named(s));
        (sinks.collect(), sources.collect())
    }

    /// Every component carries all arcs, loops included.
    pub fn components_complete(&self) -> bool {
        complete_components(&self.adj)
    }

    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("digraph \"{name}\" {{\n");
        for (i, o) in self.vertices.iter().enumerate() {
            let shape = if self.in_c[i] { "doublecircle" } else { "circle" };
            let _ = writeln!(out, "  v{i} [label=\"{o}\", shape={shape}];");
        }
        let n = self.vertices.len();
        for i in 0..n {
            for j in (0..n).filter(|&j| self.adj[i][j]) {
                let _ = writeln!(out, "  v{i} -> v{j};");
            }
        }
        out.push_str("}\n");
        out
    }
}

fn components_of(adj: &Matrix) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut g = DiGraph::<(), ()>::new();
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for i in 0..n {
        for j in (0..n).filter(|&j| adj[i][j]) {
            g.add_edge(nodes[i], nodes[j], ());
        }
    }
    let mut comps: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut c: Vec<usize> = c.into_iter().map(|x| x.index()).collect();
            c.sort_unstable();
            c
        })
        .filter(|c| c.len() > 1 || adj[c[0]][c[0]])
        .collect();
    comps.sort();
    comps
}

fn complete_components(adj: &Matrix) -> bool {
    components_of(adj).iter().all(|c| c.iter().all(|&i| c.iter().all(|&j| adj[i][j])))
}

/// Boolean matrix product.
pub fn bool_product(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).any(|m| a[i][m] && b[m][j])).collect()).collect()
}

/// `a^e` for `e >= 1`.
pub fn bool_power(a: &Matrix, mut e: usize) -> Matrix {
    assert!(e >= 1, "powers start at 1");
    let mut result: Option<Matrix> = None;
    let mut sq = a.clone();
    loop {
        if e & 1 == 1 {
            result = Some(match result {
                None => sq.clone(),
                Some(r) => bool_product(&r, &sq),
            });
        }
        e >>= 1;
        if e == 0 {
            return result.expect("e >= 1");
        }
        sq = bool_product(&sq, &sq);
    }
}

/// Least `n` in `1..=cap` such that every component of `a^n` is complete
/// with loops.
pub fn saturating_exponent(a: &Matrix, cap: usize) -> Option<usize> {
    let mut p = a.clone();
    for n in 1..=cap {
        if complete_components(&p) {
            return Some(n);
        }
        p = bool_product(&p, a);
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompletizeConfig {
    /// Cap on the saturating exponent; `None` uses `|I|! * 4^|Vert(E)|`.
    pub power_cap: Option<usize>,
    /// Powers of formulas with at most this many free variables are
    /// evaluated through materialized intermediate relations.
    pub materialize_max_free: usize,
}

impl Default for CompletizeConfig {
    fn default() -> Self {
        CompletizeConfig { power_cap: None, materialize_max_free: 5 }
    }
}

fn require_self_implication(imp: &Implication) -> Result<(), ImplError> {
    if !imp.c.same_orbits(&imp.d) {
        return Err(ImplError::NotSelfImplication(format!("C = {} but D = {}", imp.c, imp.d)));
    }
    if !imp.c1.same_orbits(&imp.d1) || imp.u.len() != imp.v.len() {
        return Err(ImplError::NotSelfImplication(format!("proj_u = {} but proj_v = {}", imp.c1, imp.d1)));
    }
    Ok(())
}

/// Order of the permutation `i -> position of u_i in v` on `I_phi`, or
/// `None` if that map is not a permutation of `I_phi`.
fn index_permutation_order(u: &[usize], v: &[usize]) -> Option<usize> {
    let sigma: Vec<Option<usize>> = u.iter().map(|x| v.iter().position(|y| y == x)).collect();
    let mut order = 1usize;
    for start in (0..u.len()).filter(|&i| sigma[i].is_some()) {
        let mut len = 0;
        let mut i = start;
        loop {
            i = sigma[i]?;
            len += 1;
            if i == start {
                break;
            }
            if len > u.len() {
                return None;
            }
        }
        order = lcm(order, len);
    }
    Some(order)
}

fn lcm(a: usize, b: usize) -> usize {
    let gcd = |mut a: usize, mut b: usize| {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    };
    a / gcd(a, b) * b
}

/// `phi^{∘n}` as a formula, either syntactically or by squaring with a
/// materialized relation after every step.
fn power_formula(
    ev: &Evaluator<'_>,
    imp: &Implication,
    n: usize,
    cfg: &CompletizeConfig,
) -> Result<Composed, ImplError> {
    if imp.var_count() > cfg.materialize_max_free {
        return Ok(syntactic_power(&imp.formula, &imp.u, &imp.v, n)?);
    }
    let mat = |c: Composed| -> Result<Composed, ImplError> {
        let formula = materialize(ev, &c.formula)?;
        Ok(Composed { u: materialized_index(&c.formula, &c.u), v: materialized_index(&c.formula, &c.v), formula })
    };
    let compose = |a: &Composed, b: &Composed| -> Result<Composed, ImplError> {
        mat(syntactic_compose(&a.formula, &a.u, &a.v, &b.formula, &b.u, &b.v)?)
    };
    let mut sq = mat(Composed { formula: imp.formula.clone(), u: imp.u.clone(), v: imp.v.clone() })?;
    let mut result: Option<Composed> = None;
    let mut e = n;
    loop {
        if e & 1 == 1 {
            result = Some(match result {
                None => sq.clone(),
                Some(r) => compose(&r, &sq)?,
            });
        }
        e >>= 1;
        if e == 0 {
            return Ok(result.expect("n >= 1"));
        }
        sq = compose(&sq, &sq)?;
    }
}

/// Builds a complete injective `(C, C)`-implication from a `(C, C)`
/// implication with equal projections, by powers: first until the variable
/// count stops growing, then to the order of the index permutation, then
/// until every component of the pair digraph is complete. The power is
/// conjoined with pairwise disequalities and verified.
pub fn completize(ev: &Evaluator<'_>, imp: &Implication, cfg: &CompletizeConfig) -> Result<Implication, ImplError> {
    require_self_implication(imp)?;
    let k = imp.u.len();
    let counts: Vec<usize> = (1..=k + 1)
        .map(|n| syntactic_power(&imp.formula, &imp.u, &imp.v, n).map(|c| c.formula.free_count()))
        .collect::<Result<_, _>>()?;
    let best = *counts.iter().max().expect("k >= 1");
    let n0 = counts.iter().position(|&c| c == best).expect("max exists") + 1;
    let p0 = syntactic_power(&imp.formula, &imp.u, &imp.v, n0)?;
    let r = index_permutation_order(&p0.u, &p0.v).ok_or_else(|| {
        ImplError::NotSelfImplication("index map of the stabilized power is not a permutation".into())
    })?;
    let n1 = n0 * r;
    let base = ImplDigraph::new(imp)?;
    let b = bool_power(base.adjacency(), n1);
    let i_len = p0.u.iter().filter(|x| p0.v.contains(x)).count();
    let cap = cfg.power_cap.unwrap_or_else(|| {
        permutations(i_len)
            .len()
            .saturating_mul(1usize.checked_shl(2 * base.vertices().len() as u32).unwrap_or(usize::MAX))
    });
    let steps = saturating_exponent(&b, cap).ok_or(ImplError::PowerCapExceeded(cap))?;
    let power = power_formula(ev, imp, n1 * steps, cfg)?;
    let formula = power.formula.all_distinct();
    let mut out = check_implication(ev, &formula, &power.u, &power.v, &imp.c, &imp.c)?
        .map_err(|f| ImplError::Incomplete(format!("power {} fails: {f}", n1 * steps)))?;
    out.assumes_bounded_strict_width = true;
    if !is_complete(&out)? {
        return Err(ImplError::Incomplete(format!("power {} is not complete", n1 * steps)));
    }
    Ok(out)
}

/// The completeness conditions: `ψ∘ψ` has as many variables as `ψ`,
/// `u_i = v_i` on `I_ψ`, and every component of the pair digraph carries
/// all arcs and loops.
pub fn is_complete(imp: &Implication) -> Result<bool, ImplError> {
    if !imp.c1.same_orbits(&imp.d1) || imp.u.len() != imp.v.len() {
        return Ok(false);
    }
    let sq = syntactic_compose(&imp.formula, &imp.u, &imp.v, &imp.formula, &imp.u, &imp.v)?;
    if sq.formula.free_count() != imp.var_count() {
        return Ok(false);
    }
    if imp.index_set().iter().any(|&i| imp.u[i] != imp.v[i]) {
        return Ok(false);
    }
    Ok(ImplDigraph::new(imp)?.components_complete())
}
