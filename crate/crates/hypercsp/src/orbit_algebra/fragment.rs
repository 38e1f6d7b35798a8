use std::collections::BTreeMap;

use super::combinatorics::{first_appearance, k_subsets};
use super::descriptor::OrbitDescriptor;
use super::OrbitError;

/// A finite labeled structure: named points and flags on `k`-subsets of
/// distinct points. Stands in for a finite induced substructure of the
/// ground structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fragment {
    k: usize,
    names: Vec<String>,
    flags: BTreeMap<Vec<usize>, bool>,
}

impl Fragment {
    pub fn new(k: usize, names: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Fragment { k, names: names.into_iter().map(Into::into).collect(), flags: BTreeMap::new() }
    }

    /// Points named `p0, p1, ...`.
    pub fn with_points(k: usize, n: usize) -> Self {
        Fragment::new(k, (0..n).map(|i| format!("p{i}")))
    }

    /// A fragment with every flag decided by `flag_of`.
    pub fn total(k: usize, n: usize, mut flag_of: impl FnMut(&[usize]) -> bool) -> Self {
        let mut f = Fragment::with_points(k, n);
        for s in k_subsets(n, k) {
            let b = flag_of(&s);
            f.flags.insert(s, b);
        }
        f
    }

    /// The fragment realizing a descriptor on its classes.
    pub fn from_descriptor(o: &OrbitDescriptor) -> Self {
        Fragment::total(o.k(), o.classes(), |s| o.class_flag(s))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn point(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn add_point(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.names.len() - 1
    }

    pub fn set_flag(&mut self, points: &[usize], value: bool) -> Result<(), OrbitError> {
        let key = self.key(points)?;
        self.flags.insert(key, value);
        Ok(())
    }

    /// Flag on a set of points, `None` when undecided.
    pub fn flag(&self, points: &[usize]) -> Option<bool> {
        let mut key = points.to_vec();
        key.sort_unstable();
        self.flags.get(&key).copied()
    }

    pub fn is_total(&self) -> bool {
        self.flags.len() == super::combinatorics::binom(self.len(), self.k)
    }

    /// Hyperedges (flag true), as sorted subsets.
    pub fn edges(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.flags.iter().filter(|(_, &b)| b).map(|(s, _)| s)
    }

    fn key(&self, points: &[usize]) -> Result<Vec<usize>, OrbitError> {
        if let Some(&p) = points.iter().find(|&&p| p >= self.len()) {
            return Err(OrbitError::UnknownPoint(p.to_string()));
        }
        let mut key = points.to_vec();
        key.sort_unstable();
        key.dedup();
        if key.len() != self.k || points.len() != self.k {
            return Err(OrbitError::NotAKSubset);
        }
        Ok(key)
    }

    /// Orbit of a tuple of points: its equality pattern and the flags read
    /// off the fragment.
    pub fn orbit_of(&self, tuple: &[usize]) -> Result<OrbitDescriptor, OrbitError> {
        if tuple.is_empty() {
            return Err(OrbitError::EmptyTuple);
        }
        if let Some(&p) = tuple.iter().find(|&&p| p >= self.len()) {
            return Err(OrbitError::UnknownPoint(p.to_string()));
        }
        let (pattern, reps) = first_appearance(tuple);
        let flags = if reps.len() >= self.k {
            k_subsets(reps.len(), self.k)
                .iter()
                .map(|s| {
                    let pts: Vec<usize> = s.iter().map(|&c| tuple[reps[c]]).collect();
                    self.flag(&pts).ok_or(OrbitError::PartialFragment)
                })
                .collect::<Result<Vec<_>, _>>()?
        } else {
            Vec::new()
        };
        OrbitDescriptor::new(self.k, pattern, flags)
    }

    /// `orbit_of` addressed by point names.
    pub fn orbit_of_named(&self, tuple: &[&str]) -> Result<OrbitDescriptor, OrbitError> {
        let idx = tuple
            .iter()
            .map(|n| self.point(n).ok_or_else(|| OrbitError::UnknownPoint(n.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        self.orbit_of(&idx)
    }

    /// Renames points by a bijection `perm` (old index to new index).
    pub fn relabel(&self, perm: &[usize]) -> Fragment {
        let mut names = vec![String::new(); self.len()];
        for (old, &new) in perm.iter().enumerate() {
            names[new] = self.names[old].clone();
        }
        let flags = self
            .flags
            .iter()
            .map(|(s, &b)| {
                let mut t: Vec<usize> = s.iter().map(|&p| perm[p]).collect();
                t.sort_unstable();
                (t, b)
            })
            .collect();
        Fragment { k: self.k, names, flags }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle_free_path() -> Fragment {
        let mut f = Fragment::new(2, ["a", "b", "c"]);
        f.set_flag(&[0, 1], true).unwrap();
        f.set_flag(&[1, 2], true).unwrap();
        f.set_flag(&[0, 2], false).unwrap();
        f
    }

    #[test]
    fn orbit_of_repeated_points() {
        let f = Fragment::total(3, 3, |_| true);
        let o = f.orbit_of(&[0, 0, 1]).unwrap();
        assert_eq!(o.to_string(), "001");
        assert_eq!(f.orbit_of(&[0, 1, 2]).unwrap().to_string(), "012:1");
    }

    #[test]
    fn orbit_of_reads_flags_in_tuple_order() {
        // only {a,b,c} is an edge
        let f = Fragment::total(3, 4, |s| s == [0, 1, 2]);
        // (c,b,a,d): subsets 012 -> {c,b,a}, 013 -> {c,b,d}, 023 -> {c,a,d}, 123 -> {b,a,d}
        assert_eq!(f.orbit_of(&[2, 1, 0, 3]).unwrap().to_string(), "0123:1000");
        assert_eq!(f.orbit_of(&[3, 2, 1, 0]).unwrap().to_string(), "0123:0001");
    }

    #[test]
    fn errors() {
        let f = triangle_free_path();
        assert!(matches!(f.orbit_of(&[0, 7]), Err(OrbitError::UnknownPoint(_))));
        let mut partial = Fragment::new(2, ["a", "b"]);
        assert!(matches!(partial.orbit_of(&[0, 1]), Err(OrbitError::PartialFragment)));
        partial.set_flag(&[1, 0], true).unwrap();
        assert!(partial.is_total());
        assert!(partial.set_flag(&[0, 0], true).is_err());
    }

    #[test]
    fn named_lookup() {
        let f = triangle_free_path();
        assert_eq!(f.orbit_of_named(&["c", "b"]).unwrap().to_string(), "01:1");
        assert_eq!(f.orbit_of_named(&["a", "c"]).unwrap().to_string(), "01:0");
        assert!(f.orbit_of_named(&["z"]).is_err());
    }
}
