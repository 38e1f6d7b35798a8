use std::collections::{BTreeMap, BTreeSet};

use crate::orbit_algebra::OrbitDescriptor;

use crate::pp_engine::{syntactic_compose, Evaluator};

use super::implication::{check_pre_implication, Implication, OrbitPairs};
use super::ImplError;

/// `{(a, c) : (a, b) ∈ first, (b, c) ∈ second}`.
pub fn relational_compose(first: &OrbitPairs, second: &OrbitPairs) -> OrbitPairs {
    let mut by_source: BTreeMap<&OrbitDescriptor, Vec<&OrbitDescriptor>> = BTreeMap::new();
    for (b, c) in second {
        by_source.entry(b).or_default().push(c);
    }
    first
        .iter()
        .flat_map(|(a, b)| by_source.get(b).into_iter().flatten().map(move |c| (a.clone(), (*c).clone())))
        .collect()
}

/// `i1 ∘ i2` as a `(C1, u1, D2, v2)`-pre-implication, upgraded to an
/// implication when item (1) holds.
///
/// In injective mode the composed formula is conjoined with pairwise
/// disequalities of its free variables. That the result still reaches every
/// pair of the relational composition rests on the bounded strict width of
/// the template, so the result is flagged instead of assumed.
pub fn compose_implications(
    ev: &Evaluator<'_>,
    i1: &Implication,
    i2: &Implication,
    injective: bool,
) -> Result<Implication, ImplError> {
    if !i1.d.same_orbits(&i2.c) {
        return Err(ImplError::ProjectionMismatch(format!("target {} differs from source {}", i1.d, i2.c)));
    }
    if !i1.d1.same_orbits(&i2.c1) {
        return Err(ImplError::ProjectionMismatch(format!("proj_v1 = {} but proj_u2 = {}", i1.d1, i2.c1)));
    }
    let comp = syntactic_compose(&i1.formula, &i1.u, &i1.v, &i2.formula, &i2.u, &i2.v)?;
    let formula = if injective { comp.formula.all_distinct() } else { comp.formula };
    let mut imp =
        check_pre_implication(ev, &formula, &comp.u, &comp.v, &i1.c, &i2.d)?.map_err(ImplError::NotPreImplication)?;
    imp.assumes_bounded_strict_width = injective || i1.assumes_bounded_strict_width || i2.assumes_bounded_strict_width;
    Ok(imp)
}

/// Outcome of the three composition properties on one composition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyReport {
    pub p: usize,
    pub p1: usize,
    pub p2: usize,
    /// `p >= max(p1, p2)`
    pub monotone: bool,
    /// equal variable counts exactly when the three scope intersections agree
    pub intersections: bool,
    /// index closure, `None` when the factors differ or `p != p1`
    pub index_closure: Option<bool>,
}

impl PropertyReport {
    pub fn holds(&self) -> bool {
        self.monotone && self.intersections && self.index_closure != Some(false)
    }
}

/// Checks the variable-count properties of `composed = i1 ∘ i2`.
///
/// Variables of `i1` keep their indices in the composed formula, and the
/// renamed `u2` is `v1`, so the intersections are taken there.
pub fn impl_properties_check(i1: &Implication, i2: &Implication, composed: &Implication) -> PropertyReport {
    let (p, p1, p2) = (composed.var_count(), i1.var_count(), i2.var_count());
    let set = |t: &[usize]| t.iter().copied().collect::<BTreeSet<usize>>();
    let (u1, v1, v2) = (set(&i1.u), set(&i1.v), set(&composed.v));
    let a: BTreeSet<usize> = u1.intersection(&v2).copied().collect();
    let b: BTreeSet<usize> = u1.intersection(&v1).copied().collect();
    let c: BTreeSet<usize> = b.intersection(&v2).copied().collect();
    let intersections = (p == p1 && p1 == p2) == (a == b && b == c);
    let same_factor = i1.formula == i2.formula && i1.u == i2.u && i1.v == i2.v;
    let index_closure =
        (same_factor && p == p1).then(|| i1.v.iter().zip(&i1.u).all(|(vi, ui)| !b.contains(vi) || b.contains(ui)));
    PropertyReport { p, p1, p2, monotone: p >= p1.max(p2), intersections, index_closure }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::implication_engine::check_implication;
    use crate::orbit_algebra::{Relation, Universe};
    use crate::pp_engine::PPFormula;
    use crate::template::Template;

    fn o(s: &str) -> OrbitDescriptor {
        OrbitDescriptor::parse(3, s).unwrap()
    }

    #[test]
    fn relational_composition_small() {
        let a: OrbitPairs = [(o("012:1"), o("012:0"))].into();
        let b: OrbitPairs = [(o("012:0"), o("012:1")), (o("012:1"), o("012:1"))].into();
        let ab = relational_compose(&a, &b);
        assert_eq!(ab, [(o("012:1"), o("012:1"))].into());
        let brute: OrbitPairs = a
            .iter()
            .flat_map(|(x, y)| b.iter().filter(move |(y2, _)| y2 == y).map(move |(_, z)| (x.clone(), z.clone())))
            .collect();
        assert_eq!(ab, brute);
    }

    fn iff_template() -> Template {
        let u = Universe::hypergraph(3);
        let r = Relation::new(
            4,
            u.enumerate_orbits(4, true).into_iter().filter(|o| o.flag_at(&[0, 1, 2]) == o.flag_at(&[3, 1, 2])),
        )
        .unwrap();
        let xor = Relation::new(
            4,
            u.enumerate_orbits(4, true).into_iter().filter(|o| o.flag_at(&[0, 1, 2]) != o.flag_at(&[3, 1, 2])),
        )
        .unwrap();
        Template::plain(u).with_relation("Q", r).with_relation("X", xor)
    }

    #[test]
    fn identity_composition_keeps_pairs() {
        let t = iff_template();
        let ev = Evaluator::new(&t);
        let e = t.edge().clone();
        let n = t.non_edge().clone();
        let q = PPFormula::parse("free(a,b,c,d) := Q(a,b,c,d)", 3).unwrap();
        let x = PPFormula::parse("free(a,b,c,d) := X(a,b,c,d)", 3).unwrap();
        let iq = check_implication(&ev, &q, &[0, 1, 2], &[3, 1, 2], &e, &e).unwrap().unwrap();
        let ix = check_implication(&ev, &x, &[0, 1, 2], &[3, 1, 2], &e, &n).unwrap().unwrap();
        let c = compose_implications(&ev, &iq, &ix, false).unwrap();
        assert_eq!(c.pairs, ix.pairs);
        assert_eq!(c.pairs, relational_compose(&iq.pairs, &ix.pairs));
        let r = impl_properties_check(&iq, &ix, &c);
        assert!(r.holds());
        assert_eq!((r.p, r.p1, r.p2), (4, 4, 4));
        // X ∘ X maps E back to E
        let ix2 = check_implication(&ev, &x, &[0, 1, 2], &[3, 1, 2], &n, &e).unwrap().unwrap();
        let c = compose_implications(&ev, &ix, &ix2, true).unwrap();
        assert!(c.assumes_bounded_strict_width && c.injective);
        assert_eq!(c.pairs, relational_compose(&ix.pairs, &ix2.pairs));
    }

    #[test]
    fn mismatched_relations_are_rejected() {
        let t = iff_template();
        let ev = Evaluator::new(&t);
        let e = t.edge().clone();
        let n = t.non_edge().clone();
        let q = PPFormula::parse("free(a,b,c,d) := Q(a,b,c,d)", 3).unwrap();
        let iq = check_implication(&ev, &q, &[0, 1, 2], &[3, 1, 2], &e, &e).unwrap().unwrap();
        let iqn = check_implication(&ev, &q, &[0, 1, 2], &[3, 1, 2], &n, &n).unwrap().unwrap();
        assert!(matches!(compose_implications(&ev, &iq, &iqn, false), Err(ImplError::ProjectionMismatch(_))));
    }

    #[test]
    fn disjoint_tuples_give_full_count() {
        let t = iff_template();
        let ev = Evaluator::new(&t);
        let e = t.edge().clone();
        let phi = PPFormula::parse("free(a,b,c,d,e,f) := Q(a,b,c,d) & Q(b,d,c,e) & Q(c,d,e,f)", 3).unwrap();
        let imp = check_implication(&ev, &phi, &[0, 1, 2], &[3, 4, 5], &e, &e).unwrap().unwrap();
        let c = compose_implications(&ev, &imp, &imp, false).unwrap();
        assert_eq!(c.pairs, relational_compose(&imp.pairs, &imp.pairs));
        let r = impl_properties_check(&imp, &imp, &c);
        assert_eq!((r.p, r.index_closure), (6, Some(true)));
        assert!(r.holds());
    }
}
