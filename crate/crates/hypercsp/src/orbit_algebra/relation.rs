use std::collections::BTreeSet;
use std::fmt;

use super::descriptor::OrbitDescriptor;
use super::universe::Universe;
use super::OrbitError;

/// A finite union of orbits of a common arity.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Relation {
    arity: usize,
    orbits: BTreeSet<OrbitDescriptor>,
    name: Option<String>,
}

impl Relation {
    pub fn empty(arity: usize) -> Self {
        Relation { arity, orbits: BTreeSet::new(), name: None }
    }

    pub fn new(arity: usize, orbits: impl IntoIterator<Item = OrbitDescriptor>) -> Result<Self, OrbitError> {
        let orbits: BTreeSet<_> = orbits.into_iter().collect();
        if let Some(o) = orbits.iter().find(|o| o.arity() != arity) {
            return Err(OrbitError::ArityMismatch { expected: arity, found: o.arity() });
        }
        Ok(Relation { arity, orbits, name: None })
    }

    /// Every realizable orbit of the arity.
    pub fn full(universe: &Universe, arity: usize) -> Self {
        Relation { arity, orbits: universe.enumerate_orbits(arity, false).into_iter().collect(), name: None }
    }

    /// The injective tuples of the arity.
    pub fn injective(universe: &Universe, arity: usize) -> Self {
        Relation { arity, orbits: universe.enumerate_orbits(arity, true).into_iter().collect(), name: None }
    }

    pub fn singleton(o: OrbitDescriptor) -> Self {
        Relation { arity: o.arity(), orbits: std::iter::once(o).collect(), name: None }
    }

    /// Parses a whitespace separated orbit list.
    pub fn parse_orbits(k: usize, arity: usize, text: &str) -> Result<Self, OrbitError> {
        let orbits = text.split_whitespace().map(|t| OrbitDescriptor::parse(k, t)).collect::<Result<Vec<_>, _>>()?;
        Relation::new(arity, orbits)
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn orbits(&self) -> &BTreeSet<OrbitDescriptor> {
        &self.orbits
    }

    pub fn iter(&self) -> impl Iterator<Item = &OrbitDescriptor> {
        self.orbits.iter()
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    pub fn contains(&self, o: &OrbitDescriptor) -> bool {
        self.orbits.contains(o)
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.orbits.is_subset(&other.orbits)
    }

    /// Strict inclusion on orbit sets.
    pub fn is_proper_subset(&self, other: &Relation) -> bool {
        self.orbits.len() < other.orbits.len() && self.is_subset(other)
    }

    pub fn is_injective(&self) -> bool {
        self.orbits.iter().all(|o| o.is_injective())
    }

    /// Same orbits regardless of name.
    pub fn same_orbits(&self, other: &Relation) -> bool {
        self.arity == other.arity && self.orbits == other.orbits
    }

    fn check(&self, other: &Relation) -> Result<(), OrbitError> {
        if self.arity != other.arity {
            return Err(OrbitError::ArityMismatch { expected: self.arity, found: other.arity });
        }
        Ok(())
    }

    pub fn union(&self, other: &Relation) -> Result<Relation, OrbitError> {
        self.check(other)?;
        Ok(Relation { arity: self.arity, orbits: &self.orbits | &other.orbits, name: None })
    }

    pub fn intersect(&self, other: &Relation) -> Result<Relation, OrbitError> {
        self.check(other)?;
        Ok(Relation { arity: self.arity, orbits: &self.orbits & &other.orbits, name: None })
    }

    pub fn difference(&self, other: &Relation) -> Result<Relation, OrbitError> {
        self.check(other)?;
        Ok(Relation { arity: self.arity, orbits: &self.orbits - &other.orbits, name: None })
    }

    /// Complement within all realizable orbits of the arity.
    pub fn complement(&self, universe: &Universe) -> Relation {
        Relation::full(universe, self.arity).difference(self).expect("same arity")
    }

    /// Complement within the given ambient relation.
    pub fn complement_within(&self, ambient: &Relation) -> Result<Relation, OrbitError> {
        ambient.difference(self)
    }

    /// Union of the projections of every member orbit.
    pub fn project(&self, positions: &[usize]) -> Result<Relation, OrbitError> {
        let orbits = self.orbits.iter().map(|o| o.project(positions)).collect::<Result<BTreeSet<_>, _>>()?;
        Ok(Relation { arity: positions.len(), orbits, name: None })
    }

    /// Keeps the orbits with a discrete pattern.
    pub fn restrict_injective(&self) -> Relation {
        Relation {
            arity: self.arity,
            orbits: self.orbits.iter().filter(|o| o.is_injective()).cloned().collect(),
            name: None,
        }
    }

    /// Orbits whose projection onto `positions` lies in `target`.
    pub fn restrict_projection(&self, positions: &[usize], target: &Relation) -> Relation {
        Relation {
            arity: self.arity,
            orbits: self.orbits.iter().filter(|o| target.contains(&o.project_unchecked(positions))).cloned().collect(),
            name: None,
        }
    }

    /// Space separated orbit list, sorted.
    pub fn orbit_list(&self) -> String {
        self.orbits.iter().map(|o| o.to_string()).collect::<Vec<_>>().join(" ")
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = &self.name {
            write!(f, "{n}=")?;
        }
        write!(f, "{{{}}}", self.orbit_list())
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Relation/{}{}", self.arity, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h3() -> Universe {
        Universe::hypergraph(3)
    }

    fn rel(arity: usize, s: &str) -> Relation {
        Relation::parse_orbits(3, arity, s).unwrap()
    }

    #[test]
    fn complement_within_injective() {
        let e = rel(3, "012:1");
        let inj = Relation::injective(&h3(), 3);
        assert_eq!(e.complement_within(&inj).unwrap(), rel(3, "012:0"));
    }

    #[test]
    fn restrict_injective_all() {
        let all = Relation::full(&h3(), 3);
        assert_eq!(all.len(), 6);
        assert_eq!(all.restrict_injective(), Relation::injective(&h3(), 3));
        assert!(!all.is_injective());
        assert!(all.restrict_injective().is_injective());
    }

    #[test]
    fn project_all_true_quadruple() {
        assert_eq!(rel(4, "0123:1111").project(&[0, 1, 2]).unwrap(), rel(3, "012:1"));
    }

    #[test]
    fn arity_mismatch() {
        assert!(rel(3, "012:1").union(&rel(2, "01")).is_err());
        assert!(Relation::parse_orbits(3, 3, "01").is_err());
    }

    #[test]
    fn boolean_algebra_at_arity_k() {
        let u = h3();
        let all: Vec<OrbitDescriptor> = u.enumerate_orbits(3, false);
        let n = all.len();
        let subsets: Vec<Relation> = (0u32..1 << n)
            .map(|m| Relation::new(3, (0..n).filter(|i| m >> i & 1 == 1).map(|i| all[i].clone())).unwrap())
            .collect();
        for a in &subsets {
            assert_eq!(&a.complement(&u).complement(&u), a);
            for b in subsets.iter().step_by(5) {
                let lhs = a.union(b).unwrap().complement(&u);
                let rhs = a.complement(&u).intersect(&b.complement(&u)).unwrap();
                assert_eq!(lhs, rhs);
                assert_eq!(a.intersect(b).unwrap().union(&a.difference(b).unwrap()).unwrap(), *a);
            }
        }
    }
}
