use std::collections::BTreeSet;

use super::combinatorics::{k_subsets, permutations, set_partitions};
use super::descriptor::{flag_count, OrbitDescriptor};
use super::fragment::Fragment;
use super::OrbitError;

/// A finite forbidden structure: points `0..size` and a set of hyperedges,
/// each a sorted `k`-subset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bound {
    pub size: usize,
    pub edges: BTreeSet<Vec<usize>>,
}

impl Bound {
    pub fn new(size: usize, edges: impl IntoIterator<Item = Vec<usize>>) -> Self {
        let edges = edges
            .into_iter()
            .map(|mut e| {
                e.sort_unstable();
                e
            })
            .collect();
        Bound { size, edges }
    }

    /// The complete `k`-uniform hypergraph on `n` points.
    pub fn complete(n: usize, k: usize) -> Self {
        Bound::new(n, k_subsets(n, k))
    }

    /// Quotients by partitions that keep every edge on distinct blocks.
    fn homomorphic_images(&self) -> Vec<Bound> {
        let mut out = Vec::new();
        for part in set_partitions(self.size) {
            let ok = self.edges.iter().all(|e| {
                let mut blocks: Vec<u8> = e.iter().map(|&p| part[p]).collect();
                blocks.sort_unstable();
                blocks.windows(2).all(|w| w[0] != w[1])
            });
            if !ok {
                continue;
            }
            let size = part.iter().map(|&b| b as usize + 1).max().unwrap_or(0);
            let edges = self.edges.iter().map(|e| e.iter().map(|&p| part[p] as usize).collect());
            out.push(Bound::new(size, edges));
        }
        out
    }

    fn isomorphic(&self, other: &Bound) -> bool {
        if self.size != other.size || self.edges.len() != other.edges.len() {
            return false;
        }
        permutations(self.size).into_iter().any(|perm| {
            self.edges.iter().all(|e| {
                let mut img: Vec<usize> = e.iter().map(|&p| perm[p]).collect();
                img.sort_unstable();
                other.edges.contains(&img)
            })
        })
    }

    /// Searches a homomorphism into the structure on `n` points whose
    /// hyperedges are reported by `is_edge` (called with sorted subsets).
    pub fn hom_into(&self, n: usize, is_edge: &dyn Fn(&[usize]) -> bool) -> Option<Vec<usize>> {
        // edges indexed by the largest point they contain, so each edge is
        // checked as soon as its last point is mapped
        let mut by_last: Vec<Vec<&Vec<usize>>> = vec![Vec::new(); self.size];
        for e in &self.edges {
            by_last[*e.last().expect("edges are nonempty")].push(e);
        }
        let mut map = vec![usize::MAX; self.size];
        fn rec(
            i: usize,
            n: usize,
            map: &mut Vec<usize>,
            by_last: &[Vec<&Vec<usize>>],
            is_edge: &dyn Fn(&[usize]) -> bool,
        ) -> bool {
            if i == map.len() {
                return true;
            }
            for t in 0..n {
                map[i] = t;
                let fine = by_last[i].iter().all(|e| {
                    let mut img: Vec<usize> = e.iter().map(|&p| map[p]).collect();
                    img.sort_unstable();
                    img.windows(2).all(|w| w[0] != w[1]) && is_edge(&img)
                });
                if fine && rec(i + 1, n, map, by_last, is_edge) {
                    return true;
                }
            }
            false
        }
        if rec(0, n, &mut map, &by_last, is_edge) {
            Some(map)
        } else {
            None
        }
    }
}

/// The ground structure: a `k`-uniform hypergraph universe given by its
/// forbidden bounds. Built-ins are the generic hypergraphs, the generic graph
/// and the K3-free graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Universe {
    name: String,
    k: usize,
    bounds: Vec<Bound>,
    b_b: usize,
}

impl Universe {
    /// Builds a universe and checks that the bounds are closed under
    /// homomorphic images.
    pub fn new(name: impl Into<String>, k: usize, bounds: Vec<Bound>) -> Result<Self, OrbitError> {
        if k < 2 {
            return Err(OrbitError::BadArity(k));
        }
        for b in &bounds {
            if b.edges.iter().any(|e| e.len() != k || e.iter().any(|&p| p >= b.size)) {
                return Err(OrbitError::MalformedBound);
            }
            if b.edges.iter().any(|e| e.windows(2).any(|w| w[0] == w[1])) {
                return Err(OrbitError::MalformedBound);
            }
        }
        for (i, b) in bounds.iter().enumerate() {
            for img in b.homomorphic_images() {
                if !bounds.iter().any(|c| c.isomorphic(&img)) {
                    return Err(OrbitError::BoundsNotClosed { bound: i });
                }
            }
        }
        // the generic hypergraph already forbids the degenerate structures of
        // size k (non-symmetric or reflexive tuples), so b_B is at least k
        let b_b = bounds.iter().map(|b| b.size).max().unwrap_or(0).max(k);
        Ok(Universe { name: name.into(), k, bounds, b_b })
    }

    pub fn hypergraph(k: usize) -> Self {
        Universe::new(format!("hypergraph{k}"), k, Vec::new()).expect("generic hypergraph")
    }

    pub fn graph() -> Self {
        let mut u = Universe::hypergraph(2);
        u.name = "graph".into();
        u
    }

    pub fn k3_free() -> Self {
        Universe::new("k3free", 2, vec![Bound::complete(3, 2)]).expect("K3 is closed under images")
    }

    /// Resolves `hypergraph<k>`, `graph` and `k3free`.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "graph" => Some(Universe::graph()),
            "k3free" => Some(Universe::k3_free()),
            _ => {
                let k: usize = name.strip_prefix("hypergraph")?.parse().ok()?;
                (k >= 2).then(|| Universe::hypergraph(k))
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn bounds(&self) -> &[Bound] {
        &self.bounds
    }

    /// Size of the largest bound (at least `k`).
    pub fn b_b(&self) -> usize {
        self.b_b
    }

    /// Whether the structural theorems of the workbench apply (`k >= 3`).
    pub fn theorem_scope(&self) -> bool {
        self.k >= 3
    }

    /// Default second minimality parameter, `max(k + 1, b_B)`.
    pub fn default_ell(&self) -> usize {
        (self.k + 1).max(self.b_b)
    }

    /// Warning text for operations whose guarantees need `k >= 3`.
    pub fn scope_warning(&self) -> Option<String> {
        (!self.theorem_scope()).then(|| {
            format!("warning: universe {} has k={} < 3; structural guarantees do not apply", self.name, self.k)
        })
    }

    /// Finite duality test on a structure given by its hyperedge oracle.
    pub fn admits(&self, n: usize, is_edge: &dyn Fn(&[usize]) -> bool) -> bool {
        self.bounds.iter().all(|b| b.hom_into(n, is_edge).is_none())
    }

    /// Whether a total fragment embeds into the universe.
    pub fn realizable(&self, fragment: &Fragment) -> bool {
        self.admits(fragment.len(), &|s| fragment.flag(s).unwrap_or(false))
    }

    pub fn realizable_descriptor(&self, o: &OrbitDescriptor) -> bool {
        if self.bounds.is_empty() {
            return true;
        }
        let n = o.classes();
        self.admits(n, &|s| o.class_flag(s))
    }

    /// All realizable descriptors of arity `m` in canonical order.
    pub fn enumerate_orbits(&self, m: usize, injective_only: bool) -> Vec<OrbitDescriptor> {
        let mut out = Vec::new();
        for pattern in set_partitions(m) {
            let classes = pattern.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
            if injective_only && classes != m {
                continue;
            }
            let nf = flag_count(classes, self.k);
            assert!(nf < 32, "orbit enumeration beyond 2^31 flag assignments");
            for bits in 0u32..(1u32 << nf) {
                let flags: Vec<bool> = (0..nf).rev().map(|i| bits >> i & 1 == 1).collect();
                let o = OrbitDescriptor::new(self.k, pattern.clone(), flags).expect("well formed");
                if self.realizable_descriptor(&o) {
                    out.push(o);
                }
            }
        }
        out
    }
}
