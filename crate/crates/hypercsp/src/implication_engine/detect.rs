use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::orbit_algebra::combinatorics::{injective_tuples, k_subsets};
use crate::orbit_algebra::{Fragment, OrbitDescriptor, Relation};
use crate::pp_engine::{AtomRel, Evaluator, PPFormula};

use super::graph::{candidates, separating, GraphSearch};
use super::implication::{check_implication, Implication};
use super::ImplError;

/// Results of a bounded detection run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Detection<T> {
    pub certificates: Vec<T>,
    /// the budget ran out before every candidate was examined
    pub truncated: bool,
}

/// A `(C, u, C, v)`-implication together with a disjoint `D` that is
/// strictly inside both projections and reaches itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalCertificate {
    pub implication: Implication,
    pub d: Relation,
}

impl CriticalCertificate {
    pub fn c(&self) -> &Relation {
        &self.implication.c
    }
}

/// An implication from an injective relation `T` on `u` to `{00}` on a
/// pair `v`, over `ell + 1` or `ell + 2` free variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqualityCertificate {
    pub ell: usize,
    pub t: Relation,
    pub implication: Implication,
}

impl EqualityCertificate {
    pub fn var_count(&self) -> usize {
        self.implication.var_count()
    }

    /// Whether `u` and `v` share a variable (the `ell + 1` shape).
    pub fn overlapping(&self) -> bool {
        self.var_count() == self.ell + 1
    }
}

/// A finite set of points realizing the chain of atoms attached to an
/// equality certificate, with the relation tuples that a local operation
/// on it has to respect.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessSet {
    pub fragment: Fragment,
    /// `point_of[i]` is the point of the `i`-th variable of `formula`
    pub point_of: Vec<usize>,
    /// the atom chain the points satisfy, all variables free
    pub formula: PPFormula,
    /// the certificate formula, possibly conjoined with `T` on extra
    /// variables, with every variable free
    pub pattern: PPFormula,
    /// assignments of the variables of `pattern` to points, one per tuple
    /// of the obstruction argument
    pub columns: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessOutcome {
    Found(OrbitDescriptor),
    /// no injective satisfying labeling agrees with the given orbit; under
    /// the bounded strict width hypothesis this cannot happen
    Falsified(String),
}

/// Source and target pools: single injective orbits and injective template
/// relations of arity `m`.
fn injective_pool(ev: &Evaluator<'_>, m: usize) -> Vec<Relation> {
    let t = ev.template();
    let mut pool: BTreeSet<Relation> =
        t.universe().enumerate_orbits(m, true).into_iter().map(Relation::singleton).collect();
    for (_, r) in t.signature() {
        if r.arity() == m && !r.is_empty() && r.is_injective() {
            pool.insert(Relation::new(m, r.iter().cloned()).expect("same arity"));
        }
    }
    pool.into_iter().collect()
}

fn run_chunks<T: Send>(
    cands: &[PPFormula],
    budget: usize,
    f: impl Fn(&PPFormula, usize) -> (usize, Vec<T>) + Sync,
) -> Detection<T> {
    let mut out = Detection { certificates: Vec::new(), truncated: false };
    let mut spent = 0usize;
    for chunk in cands.chunks(64) {
        let remaining = budget.saturating_sub(spent);
        let results: Vec<(usize, Vec<T>)> = chunk.par_iter().map(|phi| f(phi, remaining)).collect();
        for (cost, certs) in results {
            if spent + cost > budget {
                out.truncated = true;
                return out;
            }
            spent += cost;
            out.certificates.extend(certs);
        }
    }
    out
}

fn orbit_set(arity: usize, it: impl Iterator<Item = OrbitDescriptor>) -> Relation {
    Relation::new(arity, it).expect("projection arity")
}

/// Searches the candidate formulas for critical implications.
pub fn detect_critical(ev: &Evaluator<'_>, search: &GraphSearch) -> Detection<CriticalCertificate> {
    let k = ev.template().k();
    let pool = injective_pool(ev, k);
    let cands: Vec<PPFormula> = candidates(ev, search, k + 1);
    let mut det = run_chunks(&cands, search.budget, |phi, budget| critical_in(ev, phi, &pool, budget));
    let mut seen = BTreeSet::new();
    det.certificates.retain(|c| {
        let i = &c.implication;
        seen.insert((i.formula.to_string(), i.formula.free().to_vec(), i.c.clone(), c.d.clone()))
    });
    det
}

fn critical_in(
    ev: &Evaluator<'_>,
    phi: &PPFormula,
    pool: &[Relation],
    budget: usize,
) -> (usize, Vec<CriticalCertificate>) {
    let k = ev.template().k();
    let n = phi.var_count();
    let mut cost = 0;
    let mut out = Vec::new();
    if n < k + 1 {
        return (0, out);
    }
    for f in k_subsets(n, k + 1) {
        let keep: BTreeSet<usize> = f.iter().copied().collect();
        let plain = phi.clone().exists_except(&keep);
        for phi_f in [plain.clone(), plain.all_distinct()] {
            cost += 1;
            if cost > budget {
                return (cost, out);
            }
            let Ok(rel) = ev.evaluate(&phi_f).map(|l| l.relation) else { continue };
            if rel.is_empty() || !separating(&rel, k + 1) {
                continue;
            }
            for u in injective_tuples(k + 1, k) {
                for v in injective_tuples(k + 1, k) {
                    let cover: BTreeSet<usize> = u.iter().chain(&v).copied().collect();
                    if cover.len() != k + 1 || v.contains(&u[0]) || u.contains(&v[0]) {
                        continue;
                    }
                    let pairs: BTreeSet<(OrbitDescriptor, OrbitDescriptor)> =
                        rel.iter().map(|o| (o.project_unchecked(&u), o.project_unchecked(&v))).collect();
                    let c1 = orbit_set(k, pairs.iter().map(|(a, _)| a.clone()));
                    let d1 = orbit_set(k, pairs.iter().map(|(_, b)| b.clone()));
                    if !c1.is_injective() || !d1.is_injective() {
                        continue;
                    }
                    let image = |from: &Relation| -> Relation {
                        orbit_set(k, pairs.iter().filter(|(a, _)| from.contains(a)).map(|(_, b)| b.clone()))
                    };
                    for c in pool {
                        if !c.is_proper_subset(&c1) || !c.is_proper_subset(&d1) || !image(c).same_orbits(c) {
                            continue;
                        }
                        for d in pool {
                            if d.iter().any(|o| c.contains(o)) {
                                continue;
                            }
                            if !d.is_proper_subset(&c1) || !d.is_proper_subset(&d1) || !d.is_subset(&image(d)) {
                                continue;
                            }
                            cost += 1;
                            let uu: Vec<usize> = u.iter().map(|&i| f[i]).collect();
                            let vv: Vec<usize> = v.iter().map(|&i| f[i]).collect();
                            if let Ok(Ok(imp)) = check_implication(ev, &phi_f, &uu, &vv, c, c) {
                                out.push(CriticalCertificate { implication: imp, d: d.clone() });
                            }
                        }
                    }
                }
            }
        }
    }
    (cost, out)
}

/// Searches the candidate formulas for implications from an injective
/// `T` on `ell` variables to equality on a pair, for `2 <= ell <= k`.
pub fn detect_equality_implication(ev: &Evaluator<'_>, search: &GraphSearch) -> Detection<EqualityCertificate> {
    let k = ev.template().k();
    let pools: Vec<(usize, Vec<Relation>)> = (2..=k).map(|l| (l, injective_pool(ev, l))).collect();
    let cands = candidates(ev, search, 3);
    run_chunks(&cands, search.budget, |phi, budget| equality_in(ev, phi, &pools, budget))
}

fn equality_in(
    ev: &Evaluator<'_>,
    phi: &PPFormula,
    pools: &[(usize, Vec<Relation>)],
    budget: usize,
) -> (usize, Vec<EqualityCertificate>) {
    let k = ev.template().k();
    let n = phi.var_count();
    let eq = Relation::singleton(OrbitDescriptor::constant(k, 2));
    let mut cost = 0;
    let mut out = Vec::new();
    for (ell, pool) in pools {
        let ell = *ell;
        for size in [ell + 1, ell + 2] {
            if size > n {
                continue;
            }
            for f in k_subsets(n, size) {
                let keep: BTreeSet<usize> = f.iter().copied().collect();
                let phi_f = phi.clone().exists_except(&keep);
                cost += 1;
                if cost > budget {
                    return (cost, out);
                }
                let Ok(rel) = ev.evaluate(&phi_f).map(|l| l.relation) else { continue };
                if rel.is_empty() || !separating(&rel, size) {
                    continue;
                }
                for u in injective_tuples(size, ell) {
                    for v in k_subsets(size, 2) {
                        let cover: BTreeSet<usize> = u.iter().chain(&v).copied().collect();
                        if cover.len() != size {
                            continue;
                        }
                        let pairs: BTreeSet<(OrbitDescriptor, OrbitDescriptor)> =
                            rel.iter().map(|o| (o.project_unchecked(&u), o.project_unchecked(&v))).collect();
                        for t in pool {
                            let reached: BTreeSet<&OrbitDescriptor> =
                                pairs.iter().filter(|(a, _)| t.contains(a)).map(|(_, b)| b).collect();
                            if reached.len() != 1 || !eq.contains(reached.iter().next().expect("one")) {
                                continue;
                            }
                            cost += 1;
                            let uu: Vec<usize> = u.iter().map(|&i| f[i]).collect();
                            let vv: Vec<usize> = v.iter().map(|&i| f[i]).collect();
                            if let Ok(Ok(imp)) = check_implication(ev, &phi_f, &uu, &vv, t, &eq) {
                                out.push(EqualityCertificate { ell, t: t.clone(), implication: imp });
                            }
                        }
                    }
                }
            }
        }
    }
    (cost, out)
}

/// Builds a formula whose variables are all free, appending atoms by name.
struct Chain {
    phi: PPFormula,
}

impl Chain {
    fn new() -> Self {
        Chain { phi: PPFormula::new(Vec::<String>::new()) }
    }

    fn vars(&mut self, base: &str, n: usize) -> Vec<usize> {
        (1..=n).map(|i| self.phi.add_var(format!("{base}{i}"))).collect()
    }

    fn inline(&mut self, rel: &Relation, args: &[usize]) {
        self.phi.push(AtomRel::Inline(rel.clone()), args.to_vec());
    }

    fn distinct(&mut self, args: &[usize]) {
        for (i, &x) in args.iter().enumerate() {
            for &y in &args[i + 1..] {
                self.phi.push(AtomRel::Neq, vec![x, y]);
            }
        }
    }

    /// Copies the atoms of `src`, sending its free variable `src.free()[i]`
    /// to `assign[i]` and each quantified variable to a fresh free one.
    /// Returns the image of every variable of `src`.
    fn copy(&mut self, src: &PPFormula, assign: &[usize]) -> Vec<usize> {
        let mut map = vec![usize::MAX; src.var_count()];
        for (i, &x) in src.free().iter().enumerate() {
            map[x] = assign[i];
        }
        for (j, slot) in map.iter_mut().enumerate() {
            if *slot == usize::MAX {
                let id = self.phi.var_count();
                *slot = self.phi.add_var(format!("{}_{id}", src.vars()[j]));
            }
        }
        for a in src.atoms() {
            self.phi.push(a.rel.clone(), a.args.iter().map(|&x| map[x]).collect());
        }
        map
    }
}

/// A disjoint certificate whose formula also forces `T(u) => x_i = x_j`
/// for some `x_i` in `u` and `x_j` in `v`, restricted to `u` and `x_j`.
pub fn overlapping_reduction(
    ev: &Evaluator<'_>,
    cert: &EqualityCertificate,
) -> Result<Option<EqualityCertificate>, ImplError> {
    let imp = &cert.implication;
    if cert.overlapping() {
        return Ok(None);
    }
    let eq = Relation::singleton(OrbitDescriptor::constant(ev.template().k(), 2));
    for &xi in &imp.u {
        for &xj in &imp.v {
            if !ev.entails_equality(&imp.formula, &cert.t, &imp.u, xi, xj)? {
                continue;
            }
            let keep: BTreeSet<usize> = imp.u.iter().copied().chain([xj]).collect();
            let phi = imp.formula.clone().exists_except(&keep);
            if let Ok(reduced) = check_implication(ev, &phi, &imp.u, &[xi, xj], &cert.t, &eq)? {
                return Ok(Some(EqualityCertificate { ell: cert.ell, t: cert.t.clone(), implication: reduced }));
            }
        }
    }
    Ok(None)
}

/// Realizes the atom chain for an equality certificate as a finite set of
/// points. `None` when the chain is unsatisfiable.
///
/// The columns are, in order, the tuples `t_a`, `t_b` and `t_ab` of the
/// obstruction argument. In the disjoint shape the pattern also carries the
/// `T` atom, on `a`, `(c1, a2, ...)` and `(b1, d2, ...)` respectively. A
/// disjoint certificate with an [`overlapping_reduction`] is realized
/// through the reduction.
pub fn witness_set(ev: &Evaluator<'_>, cert: &EqualityCertificate) -> Result<Option<WitnessSet>, ImplError> {
    if let Some(reduced) = overlapping_reduction(ev, cert)? {
        return witness_set(ev, &reduced);
    }
    let imp = &cert.implication;
    let phi = &imp.formula;
    let ell = cert.ell;
    let nf = phi.free_count();
    let pos = |x: usize| phi.free().iter().position(|&f| f == x).expect("free variable");
    let mut ch = Chain::new();
    let mut maps = Vec::new();
    let pattern;
    if cert.overlapping() {
        let (x, y) = (imp.v[0], imp.v[1]);
        let (s, w) = if imp.u.contains(&x) { (x, y) } else { (y, x) };
        let sp = imp.u.iter().position(|&z| z == s).expect("shared variable");
        let order: Vec<usize> = (0..ell).filter(|&i| i != sp).chain([sp]).collect();
        let u2: Vec<usize> = order.iter().map(|&i| imp.u[i]).collect();
        let t2 = cert.t.project(&order)?;
        pattern = phi.clone();
        let a = ch.vars("a", ell);
        let b = ch.vars("b", ell);
        let (al, bl) = (a[ell - 1], b[ell - 1]);
        let mut copy = |ch: &mut Chain, uvals: Vec<usize>, wval: usize| {
            let mut full = vec![usize::MAX; nf];
            for (i, &var) in u2.iter().enumerate() {
                full[pos(var)] = uvals[i];
            }
            full[pos(w)] = wval;
            maps.push(ch.copy(&pattern, &full));
        };
        let ta = a.clone();
        let mut tb: Vec<usize> = a[..ell - 1].to_vec();
        tb.push(bl);
        let mut tab: Vec<usize> = b[..ell - 1].to_vec();
        tab.push(al);
        ch.inline(&t2, &ta);
        ch.inline(&t2, &tb);
        copy(&mut ch, ta, al);
        copy(&mut ch, tb, bl);
        copy(&mut ch, tab, bl);
        ch.phi.push(AtomRel::Neq, vec![al, bl]);
    } else {
        let (x, y) = (imp.v[0], imp.v[1]);
        // phi together with T on ell extra variables
        let mut psi = phi.clone();
        let ys: Vec<usize> = (1..=ell).map(|i| psi.add_var(format!("t{i}"))).collect();
        psi.push(AtomRel::Inline(cert.t.clone()), ys.clone());
        let a = ch.vars("a", ell + 1);
        let b = ch.vars("b", ell + 1);
        let c1 = ch.phi.add_var("c1");
        let d: Vec<usize> = (2..=ell).map(|i| ch.phi.add_var(format!("d{i}"))).collect();
        let (al, bl) = (a[ell], b[ell]);
        let mut copy = |ch: &mut Chain, uvals: &[usize], xv: usize, yv: usize, tvals: &[usize]| {
            let mut full = vec![usize::MAX; nf + ell];
            for (i, &var) in imp.u.iter().enumerate() {
                full[pos(var)] = uvals[i];
            }
            full[pos(x)] = xv;
            full[pos(y)] = yv;
            full[nf..].copy_from_slice(tvals);
            maps.push(ch.copy(&psi, &full));
        };
        let mut ca: Vec<usize> = vec![c1];
        ca.extend_from_slice(&a[1..ell]);
        let mut bd = vec![b[0]];
        bd.extend_from_slice(&d);
        copy(&mut ch, &a[..ell], al, al, &a[..ell]);
        copy(&mut ch, &ca, bl, bl, &ca);
        copy(&mut ch, &b[..ell], al, bl, &bd);
        ch.distinct(&a);
        let mut cab = ca.clone();
        cab.push(bl);
        ch.distinct(&cab);
        ch.phi.push(AtomRel::Neq, vec![al, bl]);
        pattern = psi;
    }
    let formula = ch.phi;
    let local = Evaluator::new(ev.template()).with_cap(ev.cap().max(formula.var_count()));
    let Some(o) = local.witness(&formula)? else { return Ok(None) };
    let point_of: Vec<usize> = (0..formula.var_count()).map(|i| o.pattern()[i] as usize).collect();
    let mut names = vec![String::new(); o.classes()];
    for (i, &p) in point_of.iter().enumerate() {
        if names[p].is_empty() {
            names[p] = formula.vars()[i].clone();
        }
    }
    let mut fragment = Fragment::new(o.k(), names);
    for s in k_subsets(o.classes(), o.k()) {
        fragment.set_flag(&s, o.class_flag(&s))?;
    }
    let columns = maps.iter().map(|m| m.iter().map(|&v| point_of[v]).collect()).collect();
    let all = (0..pattern.var_count()).collect();
    let pattern = pattern.with_free(all)?;
    Ok(Some(WitnessSet { fragment, point_of, formula, pattern, columns }))
}

/// An injective satisfying labeling of `phi` agreeing with `g` on every
/// injective subtuple of length `k`.
pub fn injective_witness(
    ev: &Evaluator<'_>,
    phi: &PPFormula,
    g: &OrbitDescriptor,
) -> Result<WitnessOutcome, ImplError> {
    let k = ev.template().k();
    let free = phi.free().to_vec();
    if g.arity() != free.len() {
        return Err(ImplError::ProjectionMismatch(format!(
            "orbit has arity {}, formula has {} free variables",
            g.arity(),
            free.len()
        )));
    }
    let behaviour = ev.pair_behaviour(phi)?;
    if let Some(&(x, y, _)) = behaviour.iter().find(|&&(x, y, same)| same && !behaviour.contains(&(x, y, false))) {
        return Err(ImplError::Incomplete(format!(
            "{} and {} are equal in every satisfying labeling",
            phi.vars()[x],
            phi.vars()[y]
        )));
    }
    let mut w = phi.clone();
    if k >= 2 {
        for s in k_subsets(free.len(), k) {
            let sub = g.project(&s)?;
            if sub.is_injective() {
                let args: Vec<usize> = s.iter().map(|&i| free[i]).collect();
                w.push(AtomRel::Inline(Relation::singleton(sub)), args);
            }
        }
    }
    let w = w.all_distinct();
    Ok(match ev.witness(&w)? {
        Some(h) => WitnessOutcome::Found(h),
        None => WitnessOutcome::Falsified(format!("no injective labeling of {phi} agrees with {g}")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::implication_engine::fixtures::{iff_template, q3_template, q4_template, q5_template};
    use crate::orbit_algebra::Universe;
    use crate::template::Template;

    fn rel(s: &str, arity: usize) -> Relation {
        Relation::parse_orbits(3, arity, s).unwrap()
    }

    #[test]
    fn iff_is_critical() {
        let t = iff_template();
        let ev = Evaluator::new(&t);
        let det = detect_critical(&ev, &GraphSearch::default());
        assert!(!det.truncated);
        let (e, n) = (rel("012:1", 3), rel("012:0", 3));
        let hit = det.certificates.iter().find(|c| {
            c.c().same_orbits(&e) && c.d.same_orbits(&n) && c.implication.u == [0, 1, 2] && c.implication.v == [3, 1, 2]
        });
        assert!(hit.is_some(), "{:?}", det.certificates.iter().map(|c| c.implication.to_string()).collect::<Vec<_>>());
    }

    #[test]
    fn plain_hypergraph_has_no_certificates() {
        let t = Template::plain(Universe::hypergraph(3));
        let ev = Evaluator::new(&t);
        assert!(detect_critical(&ev, &GraphSearch::default()).certificates.is_empty());
        assert!(detect_equality_implication(&ev, &GraphSearch::default()).certificates.is_empty());
    }

    #[test]
    fn q3_witness_has_three_points() {
        let t = q3_template();
        let ev = Evaluator::new(&t);
        let det = detect_equality_implication(&ev, &GraphSearch::default());
        let cert = det
            .certificates
            .iter()
            .find(|c| {
                c.ell == 2
                    && c.implication.formula.atoms().len() == 1
                    && c.implication.u == [0, 1]
                    && c.implication.v == [1, 2]
            })
            .expect("certificate");
        assert!(cert.overlapping());
        let w = witness_set(&ev, cert).unwrap().expect("satisfiable chain");
        assert_eq!(w.fragment.len(), 3);
        let p = |name: &str| w.point_of[w.formula.var(name).unwrap()];
        assert_eq!(p("a2"), p("b1"));
        assert_ne!(p("a1"), p("a2"));
        assert_ne!(p("a2"), p("b2"));
        assert_eq!(w.columns.len(), 3);
        assert_eq!(w.columns[0], [p("a1"), p("a2"), p("a2")]);
    }

    #[test]
    fn q4_overlapping_certificate() {
        let t = q4_template();
        let ev = Evaluator::new(&t);
        let det = detect_equality_implication(&ev, &GraphSearch::default());
        let cert = det.certificates.iter().find(|c| c.ell == 3).expect("certificate");
        assert!(cert.overlapping());
        assert!(cert.t.same_orbits(&rel("012:1", 3)));
        let w = witness_set(&ev, cert).unwrap().expect("satisfiable chain");
        assert!(t.universe().realizable(&w.fragment));
    }

    #[test]
    fn q5_disjoint_certificate() {
        let t = q5_template();
        let ev = Evaluator::new(&t);
        let search = GraphSearch { max_atoms: 1, max_vars: 5, ..GraphSearch::default() };
        let det = detect_equality_implication(&ev, &search);
        let cert = det.certificates.iter().find(|c| c.ell == 3 && !c.overlapping()).expect("certificate");
        let w = witness_set(&ev, cert).unwrap().expect("satisfiable chain");
        assert_eq!(w.formula.var_count(), 3 * 3 + 2);
        assert_eq!(w.columns.len(), 3);
        assert_eq!(w.pattern.atoms().len(), 2);
        let p = |name: &str| w.point_of[w.formula.var(name).unwrap()];
        assert_ne!(p("a4"), p("b4"));
    }

    #[test]
    fn injective_witness_follows_the_orbit() {
        let t = Template::plain(Universe::hypergraph(3));
        let ev = Evaluator::new(&t);
        let phi = PPFormula::parse("free(a,b,c,d) := E(a,b,c) & N(b,c,d)", 3).unwrap();
        let g = OrbitDescriptor::parse(3, "0123:1000").unwrap();
        match injective_witness(&ev, &phi, &g).unwrap() {
            WitnessOutcome::Found(h) => assert_eq!(h, g),
            other => panic!("{other:?}"),
        }
        let bad = OrbitDescriptor::parse(3, "0123:0000").unwrap();
        assert!(matches!(injective_witness(&ev, &phi, &bad).unwrap(), WitnessOutcome::Falsified(_)));
        let eq = PPFormula::parse("free(a,b) := a = b", 3).unwrap();
        assert!(injective_witness(&ev, &eq, &OrbitDescriptor::parse(3, "01").unwrap()).is_err());
    }
}
