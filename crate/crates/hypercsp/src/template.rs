//! Templates: a universe together with named relations over it.

use std::fmt;

use crate::orbit_algebra::{OrbitDescriptor, Relation, Universe};

/// A first-order expansion of the ground structure by finitely many named
/// orbit unions. The hyperedge relation `E` and its injective complement `N`
/// are always available.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    name: String,
    universe: Universe,
    relations: Vec<(String, Relation)>,
    edge: Relation,
    non_edge: Relation,
}

impl Template {
    pub fn new(name: impl Into<String>, universe: Universe) -> Self {
        let k = universe.k();
        let discrete: Vec<u8> = (0..k as u8).collect();
        let edge = OrbitDescriptor::new(k, discrete.clone(), vec![true]).expect("discrete k-tuple");
        let non_edge = OrbitDescriptor::new(k, discrete, vec![false]).expect("discrete k-tuple");
        let keep = |o: OrbitDescriptor| {
            if universe.realizable_descriptor(&o) {
                Relation::singleton(o)
            } else {
                Relation::empty(k)
            }
        };
        let edge = keep(edge).named("E");
        let non_edge = keep(non_edge).named("N");
        Template { name: name.into(), universe, relations: Vec::new(), edge, non_edge }
    }

    /// The template with no relations beyond the built-ins.
    pub fn plain(universe: Universe) -> Self {
        let name = format!("{}-plain", universe.name());
        Template::new(name, universe)
    }

    /// Adds or replaces a named relation.
    pub fn with_relation(mut self, name: impl Into<String>, relation: Relation) -> Self {
        self.insert(name, relation);
        self
    }

    pub fn insert(&mut self, name: impl Into<String>, relation: Relation) {
        let name = name.into();
        let relation = relation.named(name.clone());
        match self.relations.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = relation,
            None => self.relations.push((name, relation)),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn k(&self) -> usize {
        self.universe.k()
    }

    /// Declared relations in declaration order (built-ins excluded).
    pub fn relations(&self) -> &[(String, Relation)] {
        &self.relations
    }

    /// Declared relations followed by `E` and `N` unless shadowed.
    pub fn signature(&self) -> Vec<(&str, &Relation)> {
        let mut out: Vec<(&str, &Relation)> = self.relations.iter().map(|(n, r)| (n.as_str(), r)).collect();
        for (n, r) in [("E", &self.edge), ("N", &self.non_edge)] {
            if !out.iter().any(|(m, _)| *m == n) {
                out.push((n, r));
            }
        }
        out
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        if let Some((_, r)) = self.relations.iter().find(|(n, _)| n == name) {
            return Some(r);
        }
        match name {
            "E" => Some(&self.edge),
            "N" => Some(&self.non_edge),
            _ => None,
        }
    }

    pub fn edge(&self) -> &Relation {
        &self.edge
    }

    pub fn non_edge(&self) -> &Relation {
        &self.non_edge
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "template {} universe={}", self.name, self.universe.name())?;
        for (n, r) in &self.relations {
            writeln!(f, "relation {} {} : {}", n, r.arity(), r.orbit_list())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_resolve() {
        let t = Template::plain(Universe::hypergraph(3));
        assert_eq!(t.relation("E").unwrap().orbit_list(), "012:1");
        assert_eq!(t.relation("N").unwrap().orbit_list(), "012:0");
        assert!(t.relation("R").is_none());
        assert_eq!(t.signature().len(), 2);
    }

    #[test]
    fn insert_replaces_and_shadows() {
        let u = Universe::hypergraph(3);
        let r = Relation::parse_orbits(3, 2, "00").unwrap();
        let mut t = Template::plain(u).with_relation("R", r.clone());
        t.insert("R", Relation::parse_orbits(3, 2, "01").unwrap());
        assert_eq!(t.relations().len(), 1);
        assert_eq!(t.relation("R").unwrap().orbit_list(), "01");
        t.insert("E", r);
        assert_eq!(t.relation("E").unwrap().orbit_list(), "00");
        assert_eq!(t.signature().len(), 3);
    }
}
