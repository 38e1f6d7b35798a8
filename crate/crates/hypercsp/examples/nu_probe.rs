//! Searching for local near-unanimity operations: on a witness set of an
//! equality implication the search is refuted. The plain template is
//! probed on a small domain for comparison.

use hypercsp::implication_engine::fixtures::q3_template;
use hypercsp::implication_engine::{detect_equality_implication, witness_set, GraphSearch};
use hypercsp::orbit_algebra::{Fragment, Universe};
use hypercsp::polymorphism_probe::{find_binary_injection, find_local_nu, probe_witness, DEFAULT_BUDGET};
use hypercsp::pp_engine::Evaluator;
use hypercsp::template::Template;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t = q3_template();
    let ev = Evaluator::new(&t);
    let det = detect_equality_implication(&ev, &GraphSearch::default());
    println!("{} equality certificates", det.certificates.len());
    if let Some(cert) = det.certificates.first() {
        println!("first: T={} via {}", cert.t, cert.implication);
        if let Some(w) = witness_set(&ev, cert)? {
            for r in probe_witness(&t, &w, &[3, 4], DEFAULT_BUDGET)? {
                println!("  witness set of {} points, arity {}: {}", w.fragment.len(), r.arity, r.status);
            }
        }
    }

    let plain = Template::plain(Universe::hypergraph(3));
    let domain = Fragment::total(3, 4, |s| s == [0, 1, 2]);
    let nu = find_local_nu(&plain, &domain, 3, DEFAULT_BUDGET, None)?;
    println!("plain template, 4 points, arity 3: {} after {} nodes", nu.status, nu.nodes);
    let inj = find_binary_injection(&plain, &domain, DEFAULT_BUDGET)?;
    println!("binary injection: {}", inj.status);
    Ok(())
}
