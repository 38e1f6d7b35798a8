//! Primitive positive formulas: representation, text syntax, exact
//! evaluation and syntactic composition.

mod eval;
mod formula;
mod parse;

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

pub use eval::{Evaluator, LabelingSet, DEFAULT_VAR_CAP};
pub use formula::{Atom, AtomRel, PPFormula};

use crate::orbit_algebra::OrbitError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PpError {
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error("relation {relation} has arity {expected}, atom has {found} arguments")]
    ArityMismatch { relation: String, expected: usize, found: usize },
    #[error("formula has {vars} variables, cap is {cap}")]
    CapExceeded { vars: usize, cap: usize },
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("variable {0} is not free")]
    NotFree(String),
    #[error("free variable list has repeats or out-of-range entries")]
    BadFreeList,
    #[error("tuple lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty observation tuple")]
    EmptyTuple,
    #[error("observed tuples carry {0} flags, too many to enumerate")]
    ObservationTooWide(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
}

/// Result of gluing two formulas: the composed formula and the images of
/// the outer tuples `u1` and `v2` in it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Composed {
    pub formula: PPFormula,
    pub u: Vec<usize>,
    pub v: Vec<usize>,
}

/// `phi1 ∘ phi2`: renames `phi2` so that `u2` becomes `v1` and nothing else
/// is shared, conjoins, and quantifies everything outside
/// `scope(u1) ∪ scope(v2)`.
pub fn syntactic_compose(
    phi1: &PPFormula,
    u1: &[usize],
    v1: &[usize],
    phi2: &PPFormula,
    u2: &[usize],
    v2: &[usize],
) -> Result<Composed, PpError> {
    if v1.len() != u2.len() {
        return Err(PpError::LengthMismatch { left: v1.len(), right: u2.len() });
    }
    for (phi, t) in [(phi1, u1), (phi1, v1), (phi2, u2), (phi2, v2)] {
        if let Some(&x) = t.iter().find(|&&x| !phi.is_free(x)) {
            return Err(PpError::NotFree(phi.vars().get(x).cloned().unwrap_or_else(|| x.to_string())));
        }
    }
    let mut names: Vec<String> = phi1.vars().to_vec();
    let mut taken: HashSet<String> = names.iter().cloned().collect();
    let mut map = vec![usize::MAX; phi2.var_count()];
    for (i, &x) in u2.iter().enumerate() {
        if map[x] != usize::MAX && map[x] != v1[i] {
            return Err(PpError::Parse("u2 repeats a variable that v1 does not".into()));
        }
        map[x] = v1[i];
    }
    for (j, slot) in map.iter_mut().enumerate() {
        if *slot == usize::MAX {
            let base = phi2.vars()[j].trim_end_matches(|c: char| c.is_ascii_digit() || c == '_').to_string();
            let base = if base.is_empty() { "x".to_string() } else { base };
            let mut n = names.len();
            let name = loop {
                let cand = format!("{base}_{n}");
                if !taken.contains(&cand) {
                    break cand;
                }
                n += 1;
            };
            taken.insert(name.clone());
            names.push(name);
            *slot = names.len() - 1;
        }
    }
    let mut atoms: Vec<Atom> = phi1.atoms().to_vec();
    atoms.extend(
        phi2.atoms().iter().map(|a| Atom { rel: a.rel.clone(), args: a.args.iter().map(|&x| map[x]).collect() }),
    );
    let v: Vec<usize> = v2.iter().map(|&x| map[x]).collect();
    let free: BTreeSet<usize> = u1.iter().chain(&v).copied().collect();
    let formula = PPFormula::from_parts(names, atoms, free.into_iter().collect());
    Ok(Composed { formula, u: u1.to_vec(), v })
}

/// `phi^{∘n}` for a formula whose `u` and `v` have equal length.
pub fn syntactic_power(phi: &PPFormula, u: &[usize], v: &[usize], n: usize) -> Result<Composed, PpError> {
    assert!(n >= 1, "powers start at 1");
    let mut acc = Composed { formula: phi.clone(), u: u.to_vec(), v: v.to_vec() };
    for _ in 1..n {
        acc = syntactic_compose(&acc.formula, &acc.u, &acc.v, phi, u, v)?;
    }
    Ok(acc)
}

/// Replaces a formula by one atom carrying its evaluated relation on the
/// free variables. The result defines the same relation.
pub fn materialize(ev: &Evaluator<'_>, phi: &PPFormula) -> Result<PPFormula, PpError> {
    let rel = ev.evaluate(phi)?.relation;
    let names: Vec<String> = phi.free().iter().map(|&x| phi.vars()[x].clone()).collect();
    let n = names.len();
    let args: Vec<usize> = (0..n).collect();
    let mut out = PPFormula::new(names).inline(rel, &args);
    if let Some(name) = phi.name() {
        out = out.named(name);
    }
    Ok(out)
}

/// Renames a tuple of variables of `phi` to the matching indices in
/// `materialize(phi)`.
pub fn materialized_index(phi: &PPFormula, tuple: &[usize]) -> Vec<usize> {
    tuple.iter().map(|x| phi.free().iter().position(|f| f == x).expect("free variable")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit_algebra::Universe;
    use crate::template::Template;

    fn t() -> Template {
        Template::plain(Universe::hypergraph(3))
    }

    #[test]
    fn compose_shares_only_the_glued_tuple() {
        let phi = PPFormula::parse("free(x0,x1,x2,x3) := E(x0,x1,x2) & N(x1,x2,x3)", 3).unwrap();
        let c = syntactic_compose(&phi, &[0, 1, 2], &[3, 1, 2], &phi, &[0, 1, 2], &[3, 1, 2]).unwrap();
        assert_eq!(c.formula.var_count(), 5);
        assert_eq!(c.formula.free_count(), 4);
        assert_eq!(c.u, vec![0, 1, 2]);
        assert_eq!(c.v, vec![4, 1, 2]);
        assert!(!c.formula.is_free(3));
        assert_eq!(c.formula.atoms().len(), 4);
    }

    #[test]
    fn power_counts_and_associativity() {
        let tt = t();
        let ev = Evaluator::new(&tt);
        let phi = PPFormula::parse("free(a,b,c,d) := E(a,b,c) & N(b,c,d)", 3).unwrap();
        let (u, v) = (vec![0, 1, 2], vec![3, 1, 2]);
        let p3 = syntactic_power(&phi, &u, &v, 3).unwrap();
        assert_eq!(p3.formula.var_count(), 6);
        assert_eq!(p3.formula.free_count(), 4);
        let p2 = syntactic_power(&phi, &u, &v, 2).unwrap();
        let right = syntactic_compose(&phi, &u, &v, &p2.formula, &p2.u, &p2.v).unwrap();
        let obs = |c: &Composed| ev.observe(&c.formula, &[c.u.clone(), c.v.clone()]).unwrap();
        assert_eq!(obs(&p3), obs(&right));
    }

    #[test]
    fn materialize_preserves_relation() {
        let tt = t();
        let ev = Evaluator::new(&tt);
        let phi = PPFormula::parse("free(x,y,w) := E(x,y,z) & N(y,z,w)", 3).unwrap();
        let m = materialize(&ev, &phi).unwrap();
        assert_eq!(ev.evaluate(&phi).unwrap(), ev.evaluate(&m).unwrap());
        assert_eq!(materialized_index(&phi, &[2, 0]), vec![2, 0]);
    }

    #[test]
    fn compose_length_mismatch() {
        let phi = PPFormula::with_vars(3);
        assert!(syntactic_compose(&phi, &[0], &[1, 2], &phi, &[0], &[1]).is_err());
    }
}
