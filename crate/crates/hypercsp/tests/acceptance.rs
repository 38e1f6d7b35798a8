//! Acceptance suite: one PASS/FAIL line per criterion. Criteria 1 to 8 run
//! on a single worker and again on four; criterion 9 compares the digests
//! of the two runs.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};
use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use hypercsp::generate::{Generator, InstanceShape};
use hypercsp::implication_engine::fixtures::{iff_template, implies_template, q3_template, q4_template, q5_template};
use hypercsp::implication_engine::{
    build_implication_graph, check_implication, completize, compose_implications, detect_equality_implication,
    impl_properties_check, is_complete, relational_compose, witness_set, CompletizeConfig, GraphSearch, ImplDigraph,
    Implication,
};
use hypercsp::minimality_engine::{is_kl_minimal, kl_minimalize};
use hypercsp::orbit_algebra::combinatorics::{injective_tuples, k_subsets};
use hypercsp::orbit_algebra::{Fragment, Relation, Universe};
use hypercsp::polymorphism_probe::{probe_witness, ProbeStatus, DEFAULT_BUDGET};
use hypercsp::pp_engine::{Evaluator, PPFormula};
use hypercsp::solver::{brute_force_solve, one_orbit_solve, same_solutions, Outcome, SolveConfig, Solver};
use hypercsp::template::Template;

struct Verdict {
    pass: bool,
    detail: String,
    /// everything the criterion computed, for the determinism check
    log: String,
}

fn digest(s: &str) -> u64 {
    let mut h = DefaultHasher::new();
    s.hash(&mut h);
    h.finish()
}

fn minimality() -> Verdict {
    let u = Universe::hypergraph(3);
    let mut g = Generator::new(1);
    let shape = InstanceShape { min_vars: 3, max_vars: 6, ..InstanceShape::default() };
    let (mut bad, mut trivial, mut log) = (Vec::new(), 0, String::new());
    for i in 0..200 {
        let inst = g.instance(&u, &shape);
        let m = kl_minimalize(&inst, &u, 3, 4).expect("levels are valid");
        trivial += usize::from(m.is_trivial());
        let minimal = is_kl_minimal(&m, 3, 4).is_ok();
        let same = same_solutions(&inst, &m, &u, 6).expect("within the cap");
        if !(minimal && same) {
            bad.push(format!("#{i} minimal={minimal} same={same}"));
        }
        log.push_str(&m.to_text());
    }
    Verdict {
        pass: bad.is_empty(),
        detail: format!("200 instances, {trivial} trivial, {} failures {}", bad.len(), bad.join(" ")),
        log,
    }
}

fn one_orbit() -> Verdict {
    let u = Universe::hypergraph(3);
    let mut g = Generator::new(2);
    let (mut bad, mut log) = (Vec::new(), String::new());
    for i in 0..50 {
        let n = g.rng().gen_range(4..=6);
        let extra = g.rng().gen_range(0..=4);
        let (inst, _) = g.planted_single_orbit(&u, n, 4, extra).expect("planted instance");
        let ok_input = is_kl_minimal(&inst, 3, 4).is_ok() && !inst.is_trivial();
        let single = k_subsets(n, 3)
            .iter()
            .all(|s| hypercsp::minimality_engine::proj_instance(&inst, s).map_or(false, |p| p.len() == 1));
        match one_orbit_solve(&inst, &u) {
            Ok(sol) if ok_input && single && sol.verify(&inst, &u).is_ok() => log.push_str(&sol.to_text(&inst)),
            Ok(_) => bad.push(format!("#{i} minimal={ok_input} single={single} witness rejected")),
            Err(e) => bad.push(format!("#{i} {e}")),
        }
    }
    Verdict { pass: bad.is_empty(), detail: format!("50 instances, {} failures {}", bad.len(), bad.join(" ")), log }
}

/// Composable arc pairs of the bounded full implication graphs of `iff`
/// and `implies`, with both factors re-verified.
fn composable_pairs() -> Vec<(Template, Vec<(Implication, Implication)>)> {
    [iff_template(), implies_template()]
        .into_iter()
        .map(|t| {
            let ev = Evaluator::new(&t);
            let g = build_implication_graph(&ev, &GraphSearch::default(), false);
            let verified = |i: &Implication| {
                check_implication(&ev, &i.formula, &i.u, &i.v, &i.c, &i.d).map_or(false, |r| r.is_ok())
            };
            let mut pairs = Vec::new();
            for ((_, b), i1) in &g.arcs {
                for ((c, _), i2) in &g.arcs {
                    if b == c && verified(i1) && verified(i2) {
                        pairs.push((i1.clone(), i2.clone()));
                    }
                }
            }
            (t, pairs)
        })
        .collect()
}

fn compositions() -> (Verdict, Verdict) {
    let (mut n, mut pair_bad, mut prop_bad, mut log) = (0, Vec::new(), Vec::new(), String::new());
    for (t, pairs) in composable_pairs() {
        let ev = Evaluator::new(&t);
        for (i1, i2) in &pairs {
            let c = match compose_implications(&ev, i1, i2, false) {
                Ok(c) if c.var_count() <= 10 => c,
                Ok(_) => continue,
                Err(e) => {
                    pair_bad.push(format!("{}: {e}", t.name()));
                    continue;
                }
            };
            n += 1;
            if c.pairs != relational_compose(&i1.pairs, &i2.pairs) {
                pair_bad.push(format!("{}: {}", t.name(), c.formula));
            }
            let r = impl_properties_check(i1, i2, &c);
            if !r.holds() {
                prop_bad.push(format!("{}: {r:?}", t.name()));
            }
            log.push_str(&format!("{} {:?}\n", c.formula, r));
        }
    }
    let enough = n >= 100;
    (
        Verdict {
            pass: enough && pair_bad.is_empty(),
            detail: format!("{n} compositions, {} mismatches {}", pair_bad.len(), pair_bad.join("; ")),
            log: log.clone(),
        },
        Verdict {
            pass: enough && prop_bad.is_empty(),
            detail: format!("{n} compositions, {} exceptions {}", prop_bad.len(), prop_bad.join("; ")),
            log,
        },
    )
}

/// Random conjunctions of template atoms with equal projections onto two
/// triples, kept when they are `(C, C)`-implications for an injective `C`.
fn self_implications(count: usize) -> Vec<(Template, Implication)> {
    let mut g = Generator::new(5);
    let templates = [implies_template(), iff_template()];
    let mut found = Vec::new();
    let mut attempts = 0;
    while found.len() < count && attempts < 20_000 {
        attempts += 1;
        let t = templates.choose(g.rng()).expect("two templates").clone();
        let ev = Evaluator::new(&t);
        let n = g.rng().gen_range(4..=5);
        let sig: Vec<(String, usize)> = t.signature().iter().map(|(name, r)| (name.to_string(), r.arity())).collect();
        let mut phi = PPFormula::with_vars(n);
        for _ in 0..g.rng().gen_range(1..=3) {
            let (name, arity) = sig.choose(g.rng()).expect("signature").clone();
            if arity > n {
                continue;
            }
            let args = injective_tuples(n, arity).choose(g.rng()).expect("tuples").clone();
            phi = phi.atom(&name, &args);
        }
        let triples = injective_tuples(n, 3);
        let u = triples.choose(g.rng()).expect("triples").clone();
        let v = triples.choose(g.rng()).expect("triples").clone();
        let (Ok(c1), Ok(d1)) = (ev.proj_formula(&phi, &u), ev.proj_formula(&phi, &v)) else { continue };
        // only injective orbits survive in a complete injective implication
        let orbits: Vec<_> = c1.iter().filter(|o| o.is_injective()).cloned().collect();
        if !c1.same_orbits(&d1) || orbits.len() < 2 {
            continue;
        }
        let take = g.rng().gen_range(1..orbits.len());
        let c = Relation::new(3, orbits.choose_multiple(g.rng(), take).cloned()).expect("arity 3");
        if let Ok(Ok(imp)) = check_implication(&ev, &phi, &u, &v, &c, &c) {
            if !found.iter().any(|(_, i): &(Template, Implication)| *i == imp) {
                found.push((t, imp));
            }
        }
    }
    found
}

fn sink_source() -> Verdict {
    let imps = self_implications(24);
    let (mut bad, mut log) = (Vec::new(), String::new());
    for (t, imp) in &imps {
        let ev = Evaluator::new(t);
        let dg = ImplDigraph::new(imp).expect("self implication");
        let (sinks, sources) = dg.sinks_sources();
        if !dg.is_smooth() || sinks.is_empty() || sources.is_empty() {
            bad.push(format!(
                "{}: smooth={} sinks={} sources={}",
                imp.formula,
                dg.is_smooth(),
                sinks.len(),
                sources.len()
            ));
            continue;
        }
        match completize(&ev, imp, &CompletizeConfig::default()) {
            Ok(done) => {
                let complete = is_complete(&done).unwrap_or(false);
                let again = check_implication(&ev, &done.formula, &done.u, &done.v, &imp.c, &imp.c)
                    .map_or(false, |r| r.is_ok());
                if !(complete && again) {
                    bad.push(format!("{}: complete={complete} verified={again}", imp.formula));
                }
                log.push_str(&format!("{} -> {}\n", imp.formula, done.formula));
            }
            Err(e) => bad.push(format!("{}: {e}", imp.formula)),
        }
    }
    Verdict {
        pass: imps.len() >= 20 && bad.is_empty(),
        detail: format!("{} implications, {} failures {}", imps.len(), bad.len(), bad.join("; ")),
        log,
    }
}

fn end_to_end() -> Verdict {
    let u = Universe::hypergraph(3);
    let mut g = Generator::new(6);
    let mut templates = vec![Template::plain(u.clone()), implies_template()];
    for i in 0..24 {
        let rels = g.rng().gen_range(1..=2);
        templates.push(g.template(&u, &format!("random{i}"), rels, 4));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let (mut disagreements, mut falsifications, mut log) = (Vec::new(), 0, String::new());
    for t in &templates {
        let solver = Solver::new(t, SolveConfig::default());
        for j in 0..10 {
            let n = g.rng().gen_range(3..=6);
            let m = g.rng().gen_range(2..=5);
            let inst = g.template_instance(t, n, m);
            let report = match solver.solve(&inst) {
                Ok(r) => r,
                Err(e) => {
                    disagreements.push(format!("{}#{j}: error {e}", t.name()));
                    continue;
                }
            };
            falsifications += report.falsifications.len();
            *counts.entry(report.outcome.label()).or_default() += 1;
            let sat = brute_force_solve(&inst, &u, 6).expect("within the cap").is_some();
            let wrong = match &report.outcome {
                Outcome::Solved(_) => !sat,
                Outcome::Unsat => sat,
                Outcome::Inconclusive(_) => false,
            };
            if wrong {
                disagreements.push(format!(
                    "{}#{j}: {} but brute force says sat={sat}",
                    t.name(),
                    report.outcome.label()
                ));
            }
            log.push_str(&format!("{} {}\n", t, report.outcome.label()));
        }
    }
    let decided = counts.get("SOLVED").copied().unwrap_or(0) + counts.get("UNSAT").copied().unwrap_or(0);
    Verdict {
        pass: templates.len() >= 20 && decided > 0 && disagreements.is_empty() && falsifications == 0,
        detail: format!(
            "{} templates, verdicts {counts:?}, {} disagreements, {falsifications} falsifications {}",
            templates.len(),
            disagreements.len(),
            disagreements.join("; ")
        ),
        log,
    }
}

fn witness_shadow() -> Verdict {
    let small = GraphSearch { max_atoms: 1, max_vars: 5, ..GraphSearch::default() };
    let cases = [(q3_template(), GraphSearch::default()), (q4_template(), small.clone()), (q5_template(), small)];
    let (mut certs, mut probes, mut bad, mut log) = (0, 0, Vec::new(), String::new());
    for (t, search) in &cases {
        let ev = Evaluator::new(t);
        let det = detect_equality_implication(&ev, search);
        for cert in &det.certificates {
            certs += 1;
            let w = match witness_set(&ev, cert) {
                Ok(Some(w)) => w,
                other => {
                    bad.push(format!("{}: no witness set ({other:?})", t.name()));
                    continue;
                }
            };
            match probe_witness(t, &w, &[3, 4, 5], DEFAULT_BUDGET) {
                Ok(reports) => {
                    for r in reports {
                        probes += 1;
                        if r.status != ProbeStatus::NoneComplete {
                            bad.push(format!("{} m={}: {}", t.name(), r.arity, r.status));
                        }
                        log.push_str(&format!("{} {} {} {}\n", t.name(), r.arity, r.status, r.nodes));
                    }
                }
                Err(e) => bad.push(format!("{}: {e}", t.name())),
            }
        }
    }
    Verdict {
        pass: certs > 0 && bad.is_empty(),
        detail: format!("{certs} certificates, {probes} probes, {} not NONE_COMPLETE {}", bad.len(), bad.join("; ")),
        log,
    }
}

fn duality() -> Verdict {
    let k3 = Universe::k3_free();
    let mut bad = Vec::new();
    let mut log = String::new();
    for bits in 0u32..8 {
        let f = Fragment::total(2, 3, |s| bits >> (s[0] + s[1] - 1) & 1 == 1);
        let triangle = bits == 7;
        let accepted = k3.realizable(&f);
        if accepted == triangle {
            bad.push(format!("k3free flags {bits:03b} accepted={accepted}"));
        }
        log.push_str(&format!("{bits} {accepted}\n"));
    }
    let h3 = Universe::hypergraph(3);
    let mut total = 0u64;
    for n in 0..=6usize {
        let subsets = k_subsets(n, 3);
        for bits in 0u64..(1 << subsets.len()) {
            let f = Fragment::total(3, n, |s| {
                let i = subsets.iter().position(|t| t == s).expect("a 3-subset");
                bits >> i & 1 == 1
            });
            total += 1;
            if !h3.realizable(&f) {
                bad.push(format!("hypergraph3 rejects n={n} bits={bits}"));
            }
        }
    }
    log.push_str(&format!("{total}\n"));
    Verdict {
        pass: bad.is_empty(),
        detail: format!(
            "8 triangle-free cases, {total} hypergraph fragments, {} failures {}",
            bad.len(),
            bad.join("; ")
        ),
        log,
    }
}

fn run_all() -> Vec<(u8, &'static str, Verdict, f64)> {
    let mut out = Vec::new();
    let mut timed = |id, name, f: &dyn Fn() -> Verdict| {
        let t = Instant::now();
        let v = f();
        out.push((id, name, v, t.elapsed().as_secs_f64()));
    };
    timed(1, "minimality correctness", &minimality);
    timed(2, "one-orbit solving", &one_orbit);
    let t = Instant::now();
    let (c3, c4) = compositions();
    let secs = t.elapsed().as_secs_f64();
    out.push((3, "composition oracle", c3, secs));
    out.push((4, "composition properties", c4, 0.0));
    let mut timed = |id, name, f: &dyn Fn() -> Verdict| {
        let t = Instant::now();
        let v = f();
        out.push((id, name, v, t.elapsed().as_secs_f64()));
    };
    timed(5, "sinks, sources and completion", &sink_source);
    timed(6, "solver against brute force", &end_to_end);
    timed(7, "local NU refuted on witness sets", &witness_shadow);
    timed(8, "duality of bounds", &duality);
    out
}

fn on_threads(n: usize) -> Vec<(u8, &'static str, Verdict, f64)> {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().expect("thread pool").install(run_all)
}

fn main() -> ExitCode {
    let single = on_threads(1);
    let multi = on_threads(4);
    let mut all_pass = true;
    for (id, name, v, secs) in &single {
        all_pass &= v.pass;
        println!("criterion {id} {}: {name} ({secs:.1}s) {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    let differing: Vec<u8> = single
        .iter()
        .zip(&multi)
        .filter(|((_, _, a, _), (_, _, b, _))| digest(&a.log) != digest(&b.log) || a.detail != b.detail)
        .map(|((id, ..), _)| *id)
        .collect();
    let det = differing.is_empty();
    all_pass &= det;
    println!(
        "criterion 9 {}: determinism with 1 and 4 threads, {} of 8 digests equal{}",
        if det { "PASS" } else { "FAIL" },
        8 - differing.len(),
        if det { String::new() } else { format!(", differing {differing:?}") }
    );
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
