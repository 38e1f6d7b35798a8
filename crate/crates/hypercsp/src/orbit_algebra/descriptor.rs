use std::fmt;

use super::combinatorics::{class_count, is_restricted_growth, k_subsets, lex_rank};
use super::OrbitError;

/// Finite name of an orbit of `m`-tuples: an equality pattern over the
/// positions plus one hyperedge flag per `k`-subset of pattern classes.
///
/// The pattern is a restricted growth string, so classes are numbered by
/// their least position. Flags are listed over the `k`-subsets of classes in
/// lexicographic order and exist only when there are at least `k` classes.
/// The derived ordering is lexicographic on `(pattern, flags)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrbitDescriptor {
    pattern: Vec<u8>,
    flags: Vec<bool>,
    k: u8,
}

impl OrbitDescriptor {
    pub fn new(k: usize, pattern: Vec<u8>, flags: Vec<bool>) -> Result<Self, OrbitError> {
        if pattern.is_empty() {
            return Err(OrbitError::EmptyTuple);
        }
        if !is_restricted_growth(&pattern) {
            return Err(OrbitError::InvalidPattern(pattern));
        }
        let expected = flag_count(class_count(&pattern), k);
        if flags.len() != expected {
            return Err(OrbitError::FlagCount { expected, found: flags.len() });
        }
        Ok(OrbitDescriptor { pattern, flags, k: k as u8 })
    }

    /// Descriptor of the constant tuple of length `m`.
    pub fn constant(k: usize, m: usize) -> Self {
        OrbitDescriptor { pattern: vec![0; m], flags: Vec::new(), k: k as u8 }
    }

    /// The injective arity-`m` descriptor whose flags are given by `flag_of`
    /// evaluated on each sorted `k`-subset of positions.
    pub fn injective_with(k: usize, m: usize, mut flag_of: impl FnMut(&[usize]) -> bool) -> Self {
        let pattern = (0..m as u8).collect();
        let flags = if m >= k { k_subsets(m, k).iter().map(|s| flag_of(s)).collect() } else { Vec::new() };
        OrbitDescriptor { pattern, flags, k: k as u8 }
    }

    pub fn arity(&self) -> usize {
        self.pattern.len()
    }

    pub fn k(&self) -> usize {
        self.k as usize
    }

    pub fn pattern(&self) -> &[u8] {
        &self.pattern
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn classes(&self) -> usize {
        class_count(&self.pattern)
    }

    pub fn is_injective(&self) -> bool {
        self.classes() == self.arity()
    }

    /// True when positions `i` and `j` carry the same element.
    pub fn same(&self, i: usize, j: usize) -> bool {
        self.pattern[i] == self.pattern[j]
    }

    /// Flag on a sorted `k`-subset of class indices.
    pub fn class_flag(&self, classes: &[usize]) -> bool {
        self.flags[lex_rank(self.classes(), classes)]
    }

    /// Flag on the elements at the given positions, or `None` when they do not
    /// span `k` distinct classes.
    pub fn flag_at(&self, positions: &[usize]) -> Option<bool> {
        let mut cls: Vec<usize> = positions.iter().map(|&p| self.pattern[p] as usize).collect();
        cls.sort_unstable();
        cls.dedup();
        if cls.len() != self.k() || positions.len() != self.k() {
            return None;
        }
        Some(self.class_flag(&cls))
    }

    /// Descriptor of the subtuple picking the given positions (repetitions allowed).
    pub fn project(&self, positions: &[usize]) -> Result<OrbitDescriptor, OrbitError> {
        if positions.is_empty() {
            return Err(OrbitError::EmptyTuple);
        }
        if let Some(&bad) = positions.iter().find(|&&p| p >= self.arity()) {
            return Err(OrbitError::IndexOutOfRange { index: bad, arity: self.arity() });
        }
        Ok(self.project_unchecked(positions))
    }

    pub(crate) fn project_unchecked(&self, positions: &[usize]) -> OrbitDescriptor {
        let old: Vec<u8> = positions.iter().map(|&p| self.pattern[p]).collect();
        let mut map: Vec<u8> = Vec::new();
        let mut pattern = Vec::with_capacity(old.len());
        for &c in &old {
            match map.iter().position(|&o| o == c) {
                Some(i) => pattern.push(i as u8),
                None => {
                    pattern.push(map.len() as u8);
                    map.push(c);
                }
            }
        }
        let k = self.k();
        let n_old = self.classes();
        let flags = if map.len() >= k {
            k_subsets(map.len(), k)
                .iter()
                .map(|s| {
                    let mut cls: Vec<usize> = s.iter().map(|&i| map[i] as usize).collect();
                    cls.sort_unstable();
                    self.flags[lex_rank(n_old, &cls)]
                })
                .collect()
        } else {
            Vec::new()
        };
        OrbitDescriptor { pattern, flags, k: self.k }
    }

    /// Parses the compact text form `<pattern>[:<flags>]`, for example `012:1`.
    pub fn parse(k: usize, text: &str) -> Result<Self, OrbitError> {
        let (pat, bits) = match text.split_once(':') {
            Some((p, b)) => (p, b),
            None => (text, ""),
        };
        let pattern: Vec<u8> = pat
            .chars()
            .map(|c| c.to_digit(36).map(|d| d as u8))
            .collect::<Option<_>>()
            .ok_or_else(|| OrbitError::Syntax(text.to_string()))?;
        let flags: Vec<bool> = bits
            .chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<_>>()
            .ok_or_else(|| OrbitError::Syntax(text.to_string()))?;
        OrbitDescriptor::new(k, pattern, flags)
    }
}

/// Number of flags carried by a descriptor with `classes` classes.
pub fn flag_count(classes: usize, k: usize) -> usize {
    if classes >= k {
        super::combinatorics::binom(classes, k)
    } else {
        0
    }
}

impl fmt::Display for OrbitDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.pattern {
            write!(f, "{}", std::char::from_digit(c as u32, 36).unwrap_or('?'))?;
        }
        if !self.flags.is_empty() {
            f.write_str(":")?;
            for &b in &self.flags {
                f.write_str(if b { "1" } else { "0" })?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for OrbitDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Orbit({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(k: usize, s: &str) -> OrbitDescriptor {
        OrbitDescriptor::parse(k, s).unwrap()
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["0", "01", "001", "012:1", "0123:1010", "0102:1"] {
            assert_eq!(d(3, s).to_string(), s);
        }
    }

    #[test]
    fn rejects_malformed() {
        assert!(OrbitDescriptor::parse(3, "10").is_err());
        assert!(OrbitDescriptor::parse(3, "012").is_err());
        assert!(OrbitDescriptor::parse(3, "01:1").is_err());
        assert!(OrbitDescriptor::parse(3, "").is_err());
    }

    #[test]
    fn discrete_k_tuple_has_one_flag() {
        assert_eq!(d(3, "012:0").flags().len(), 1);
        assert_eq!(d(2, "01:1").flags().len(), 1);
    }

    #[test]
    fn projection_reads_flags() {
        // flags over 012, 013, 023, 123
        let o = d(3, "0123:1000");
        assert_eq!(o.project(&[0, 1, 2]).unwrap(), d(3, "012:1"));
        assert_eq!(o.project(&[1, 2, 3]).unwrap(), d(3, "012:0"));
        assert_eq!(o.project(&[2, 1, 0]).unwrap(), d(3, "012:1"));
        assert_eq!(o.project(&[1, 1]).unwrap(), d(3, "00"));
        assert_eq!(o.project(&[0, 1, 2, 3]).unwrap(), o);
        assert!(o.project(&[4]).is_err());
    }

    #[test]
    fn projection_of_non_injective() {
        let o = d(3, "0102:0");
        assert_eq!(o.classes(), 3);
        assert_eq!(o.flags().len(), 1);
        assert_eq!(o.project(&[0, 2]).unwrap(), d(3, "00"));
        assert_eq!(o.project(&[3, 1, 0]).unwrap(), d(3, "012:0"));
    }

    #[test]
    fn order_is_pattern_then_flags() {
        let mut v = vec![d(3, "012:1"), d(3, "000"), d(3, "012:0"), d(3, "001")];
        v.sort();
        let s: Vec<String> = v.iter().map(|o| o.to_string()).collect();
        assert_eq!(s, ["000", "001", "012:0", "012:1"]);
    }
}
