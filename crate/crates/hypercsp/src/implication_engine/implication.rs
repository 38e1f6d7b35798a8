use std::collections::BTreeSet;
use std::fmt;

use crate::orbit_algebra::{OrbitDescriptor, Relation};
use crate::pp_engine::{Evaluator, PPFormula};

use super::ImplError;

pub type OrbitPairs = BTreeSet<(OrbitDescriptor, OrbitDescriptor)>;

/// A verified (pre-)implication together with its computed data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Implication {
    pub formula: PPFormula,
    pub u: Vec<usize>,
    pub v: Vec<usize>,
    pub c: Relation,
    pub d: Relation,
    /// projection of the satisfying set onto `u`
    pub c1: Relation,
    /// projection of the satisfying set onto `v`
    pub d1: Relation,
    /// orbit pairs `(O, P)` such that some satisfying labeling is an
    /// `OP`-mapping
    pub pairs: OrbitPairs,
    /// item (1) holds, so this is an implication and not only a
    /// pre-implication
    pub separating: bool,
    /// every satisfying labeling is injective
    pub injective: bool,
    /// produced by a step whose validity rests on the bounded strict width
    /// hypothesis rather than on a check
    pub assumes_bounded_strict_width: bool,
}

impl Implication {
    /// Number of free variables.
    pub fn var_count(&self) -> usize {
        self.formula.free_count()
    }

    /// Positions `i` with `u_i` in the scope of `v`.
    pub fn index_set(&self) -> Vec<usize> {
        (0..self.u.len()).filter(|&i| self.v.contains(&self.u[i])).collect()
    }

    /// Orbits `P` reachable from orbits of `from`.
    pub fn image(&self, from: &Relation) -> BTreeSet<OrbitDescriptor> {
        self.pairs.iter().filter(|(o, _)| from.contains(o)).map(|(_, p)| p.clone()).collect()
    }
}

impl fmt::Display for Implication {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |t: &[usize]| t.iter().map(|&x| self.formula.vars()[x].as_str()).collect::<Vec<_>>().join(",");
        write!(
            f,
            "({}, ({}), {}, ({}))-{}implication: {}",
            self.c,
            names(&self.u),
            self.d,
            names(&self.v),
            if self.separating { "" } else { "pre-" },
            self.formula
        )
    }
}

/// The first violated requirement of a failed check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImplFailure {
    /// 0 for a violated precondition, otherwise the item number 1 to 5
    pub item: u8,
    pub detail: String,
}

impl fmt::Display for ImplFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.item == 0 {
            write!(f, "precondition violated: {}", self.detail)
        } else {
            write!(f, "item ({}) violated: {}", self.item, self.detail)
        }
    }
}

pub type CheckResult = Result<Implication, ImplFailure>;

fn fail(item: u8, detail: impl Into<String>) -> CheckResult {
    Err(ImplFailure { item, detail: detail.into() })
}

/// Orbit pairs of `(u, v)` over all satisfying labelings.
pub fn mapping_pairs(ev: &Evaluator<'_>, phi: &PPFormula, u: &[usize], v: &[usize]) -> Result<OrbitPairs, ImplError> {
    let obs = ev.observe(phi, &[u.to_vec(), v.to_vec()])?;
    Ok(obs
        .into_iter()
        .map(|mut o| {
            let p = o.pop().expect("two observations");
            let q = o.pop().expect("two observations");
            (q, p)
        })
        .collect())
}

/// Checks items (1) to (5).
pub fn check_implication(
    ev: &Evaluator<'_>,
    phi: &PPFormula,
    u: &[usize],
    v: &[usize],
    c: &Relation,
    d: &Relation,
) -> Result<CheckResult, ImplError> {
    check(ev, phi, u, v, c, d, true)
}

/// Checks items (2) to (5).
pub fn check_pre_implication(
    ev: &Evaluator<'_>,
    phi: &PPFormula,
    u: &[usize],
    v: &[usize],
    c: &Relation,
    d: &Relation,
) -> Result<CheckResult, ImplError> {
    check(ev, phi, u, v, c, d, false)
}

fn check(
    ev: &Evaluator<'_>,
    phi: &PPFormula,
    u: &[usize],
    v: &[usize],
    c: &Relation,
    d: &Relation,
    item1: bool,
) -> Result<CheckResult, ImplError> {
    let injective = |t: &[usize]| t.iter().collect::<BTreeSet<_>>().len() == t.len();
    if u.is_empty() || v.is_empty() || !injective(u) || !injective(v) {
        return Ok(fail(0, "u and v must be nonempty injective tuples"));
    }
    let free: BTreeSet<usize> = phi.free().iter().copied().collect();
    let scope: BTreeSet<usize> = u.iter().chain(v).copied().collect();
    if scope != free {
        return Ok(fail(0, "scope(u) and scope(v) must cover exactly the free variables"));
    }
    if u.len() >= free.len() || v.len() >= free.len() {
        return Ok(fail(0, "u and v must be shorter than the variable set"));
    }
    if c.arity() != u.len() || d.arity() != v.len() {
        return Ok(fail(0, "relation arities must match the tuples"));
    }
    if c.is_empty() || d.is_empty() {
        return Ok(fail(0, "C and D must be nonempty"));
    }
    let pairs = mapping_pairs(ev, phi, u, v)?;
    let c1 = Relation::new(u.len(), pairs.iter().map(|(o, _)| o.clone()))?;
    let d1 = Relation::new(v.len(), pairs.iter().map(|(_, p)| p.clone()))?;
    let behaviour = ev.pair_behaviour(phi)?;
    let separated: BTreeSet<(usize, usize)> =
        behaviour.iter().filter(|&&(_, _, same)| !same).map(|&(x, y, _)| (x, y)).collect();
    let injective_only = behaviour.iter().all(|&(_, _, same)| !same) && !pairs.is_empty();
    let mut separating = true;
    let fv: Vec<usize> = free.iter().copied().collect();
    'outer: for (a, &x) in fv.iter().enumerate() {
        for &y in &fv[a + 1..] {
            if !separated.contains(&(x, y)) {
                separating = false;
                if item1 {
                    let n = |z: usize| phi.vars()[z].clone();
                    return Ok(fail(1, format!("{} and {} are always equal", n(x), n(y))));
                }
                break 'outer;
            }
        }
    }
    if !c.is_proper_subset(&c1) {
        return Ok(fail(2, format!("C={c} is not a proper subset of proj_u={c1}")));
    }
    if !d.is_proper_subset(&d1) {
        return Ok(fail(3, format!("D={d} is not a proper subset of proj_v={d1}")));
    }
    if let Some((o, p)) = pairs.iter().find(|(o, p)| c.contains(o) && !d.contains(p)) {
        return Ok(fail(4, format!("a {o}{p}-mapping leaves D")));
    }
    let reached: BTreeSet<&OrbitDescriptor> = pairs.iter().filter(|(o, _)| c.contains(o)).map(|(_, p)| p).collect();
    if let Some(p) = d.iter().find(|p| !reached.contains(p)) {
        return Ok(fail(5, format!("orbit {p} of D is not reached from C")));
    }
    Ok(Ok(Implication {
        formula: phi.clone(),
        u: u.to_vec(),
        v: v.to_vec(),
        c: c.clone(),
        d: d.clone(),
        c1,
        d1,
        pairs,
        separating,
        injective: injective_only,
        assumes_bounded_strict_width: false,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit_algebra::Universe;
    use crate::template::Template;

    fn rel(s: &str, arity: usize) -> Relation {
        Relation::parse_orbits(3, arity, s).unwrap()
    }

    /// Orbit equivalence of the triples (a,b,c) and (d,b,c).
    fn equivalence() -> (Template, PPFormula) {
        let u = Universe::hypergraph(3);
        let orbits = u.enumerate_orbits(4, true);
        let r =
            Relation::new(4, orbits.into_iter().filter(|o| o.flag_at(&[0, 1, 2]) == o.flag_at(&[3, 1, 2]))).unwrap();
        let t = Template::plain(u).with_relation("Q", r);
        let phi = PPFormula::parse("free(a,b,c,d) := Q(a,b,c,d)", 3).unwrap();
        (t, phi)
    }

    #[test]
    fn orbit_equivalence_is_implication() {
        let (t, phi) = equivalence();
        let ev = Evaluator::new(&t);
        let e = rel("012:1", 3);
        let imp = check_implication(&ev, &phi, &[0, 1, 2], &[3, 1, 2], &e, &e).unwrap().unwrap();
        assert!(imp.separating && imp.injective);
        let diag: Vec<_> = imp.pairs.iter().map(|(o, p)| o == p).collect();
        assert!(diag.iter().all(|&b| b));
        assert_eq!(imp.pairs.len(), 2);
    }

    #[test]
    fn coordinatewise_equality_fails_item_one() {
        let t = Template::plain(Universe::hypergraph(3));
        let ev = Evaluator::new(&t);
        let phi = PPFormula::parse("free(a,b,c,d,e,f) := a = d & b = e & c = f", 3).unwrap();
        let e = rel("012:1", 3);
        let r = check_implication(&ev, &phi, &[0, 1, 2], &[3, 4, 5], &e, &e).unwrap();
        assert_eq!(r.unwrap_err().item, 1);
        // as a pre-implication it only fails strictness if C = proj
        let r = check_pre_implication(&ev, &phi, &[0, 1, 2], &[3, 4, 5], &e, &e).unwrap().unwrap();
        assert!(!r.separating);
    }

    #[test]
    fn strictness_and_item_four() {
        let (t, phi) = equivalence();
        let ev = Evaluator::new(&t);
        let both = rel("012:0 012:1", 3);
        let r = check_implication(&ev, &phi, &[0, 1, 2], &[3, 1, 2], &both, &both).unwrap();
        assert_eq!(r.unwrap_err().item, 2);
        let e = rel("012:1", 3);
        let n = rel("012:0", 3);
        let r = check_implication(&ev, &phi, &[0, 1, 2], &[3, 1, 2], &e, &n).unwrap();
        assert_eq!(r.unwrap_err().item, 4);
    }

    #[test]
    fn preconditions() {
        let (t, phi) = equivalence();
        let ev = Evaluator::new(&t);
        let e = rel("012:1", 3);
        assert_eq!(check_implication(&ev, &phi, &[0, 0, 2], &[3, 1, 2], &e, &e).unwrap().unwrap_err().item, 0);
        assert_eq!(check_implication(&ev, &phi, &[0, 1, 2], &[2, 1, 0], &e, &e).unwrap().unwrap_err().item, 0);
    }
}
