use super::*;
use crate::implication_engine::fixtures::{q3_template, q4_template, q5_template};
use crate::implication_engine::{detect_equality_implication, witness_set, GraphSearch};
use crate::orbit_algebra::Universe;
use crate::pp_engine::Evaluator;

fn neq_template() -> Template {
    let u = Universe::hypergraph(3);
    let neq = Relation::injective(&u, 2);
    Template::plain(u).with_relation("NEQ", neq)
}

#[test]
fn disequality_template_has_a_four_ary_nu() {
    let t = neq_template();
    for edge in [false, true] {
        let d = Fragment::total(3, 3, |_| edge);
        let r = find_local_nu(&t, &d, 4, DEFAULT_BUDGET, None).unwrap();
        assert_eq!(r.status, ProbeStatus::Found, "{}", r.transcript.join("\n"));
        let op = r.operation.as_ref().unwrap();
        assert!(check_local_nu_equations(op).is_ok());
        for (_, rel) in t.signature() {
            assert!(preserves(op, rel, t.universe()).is_ok());
        }
    }
}

#[test]
fn single_point_collapses() {
    let t = neq_template();
    let d = Fragment::with_points(3, 1);
    let r = find_local_nu(&t, &d, 3, 100, None).unwrap();
    assert_eq!(r.status, ProbeStatus::Found);
    assert_eq!(r.operation.unwrap().table(), [0]);
}

#[test]
fn arity_and_size_preconditions() {
    let t = neq_template();
    let d = Fragment::with_points(3, 2);
    assert_eq!(find_local_nu(&t, &d, 2, 100, None), Err(ProbeError::ArityTooSmall(2)));
    let d = Fragment::total(3, 4, |_| false);
    assert!(matches!(find_local_nu(&t, &d, 5, 100, None), Err(ProbeError::TooLarge { .. })));
    let partial = Fragment::with_points(3, 3);
    assert_eq!(find_local_nu(&t, &partial, 3, 100, None), Err(ProbeError::PartialDomain));
}

#[test]
fn tiny_budget_is_exhausted_not_complete() {
    let t = neq_template();
    let d = Fragment::total(3, 3, |_| true);
    let r = find_local_nu(&t, &d, 4, 82, None).unwrap();
    assert_eq!(r.status, ProbeStatus::NoneExhausted);
}

#[test]
fn plain_template_has_binary_injections() {
    let t = Template::plain(Universe::hypergraph(3));
    for d in [Fragment::total(3, 3, |_| true), Fragment::total(3, 4, |s| s[0] == 0)] {
        let r = find_binary_injection(&t, &d, DEFAULT_BUDGET).unwrap();
        assert_eq!(r.status, ProbeStatus::Found, "{}", r.transcript.join("\n"));
        let op = r.operation.unwrap();
        assert_eq!(op.table().iter().unique().count(), op.table().len());
    }
}

#[test]
fn constant_pair_relation_blocks_injections() {
    let u = Universe::hypergraph(3);
    let t = Template::plain(u).with_relation("R", Relation::parse_orbits(3, 3, "001 011").unwrap());
    let d = Fragment::total(3, 2, |_| false);
    let r = find_binary_injection(&t, &d, DEFAULT_BUDGET).unwrap();
    assert_eq!(r.status, ProbeStatus::NoneComplete);
    assert!(r.transcript.iter().any(|l| l.contains("injectivity conflict in relation R")), "{:?}", r.transcript);
}

fn witness_probes(t: &Template, search: &GraphSearch) -> Vec<ProbeReport> {
    let ev = Evaluator::new(t);
    let det = detect_equality_implication(&ev, search);
    assert!(!det.certificates.is_empty());
    let mut out = Vec::new();
    for cert in &det.certificates {
        let w = witness_set(&ev, cert).unwrap().expect("satisfiable chain");
        out.extend(probe_witness(t, &w, &[3, 4, 5], DEFAULT_BUDGET).unwrap());
    }
    out
}

#[test]
fn equality_certificates_refute_local_nu() {
    let small = GraphSearch { max_atoms: 1, max_vars: 5, ..GraphSearch::default() };
    for (t, search) in [(q3_template(), GraphSearch::default()), (q4_template(), small.clone()), (q5_template(), small)]
    {
        for r in witness_probes(&t, &search) {
            assert_eq!(r.status, ProbeStatus::NoneComplete, "{}\n{}", t.name(), r.to_text());
        }
    }
}
