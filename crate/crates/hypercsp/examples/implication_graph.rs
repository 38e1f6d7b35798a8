//! Building the bounded injective implication graph of a few templates and
//! testing it for cycles.

use hypercsp::implication_engine::fixtures::{iff_template, implies_template};
use hypercsp::implication_engine::{build_implication_graph, is_implicationally_simple, GraphSearch};
use hypercsp::orbit_algebra::Universe;
use hypercsp::pp_engine::Evaluator;
use hypercsp::template::Template;

fn main() {
    let search = GraphSearch::default();
    for t in [Template::plain(Universe::hypergraph(3)), implies_template(), iff_template()] {
        let ev = Evaluator::new(&t);
        let g = build_implication_graph(&ev, &search, true);
        let report = is_implicationally_simple(&g);
        println!(
            "{}: {} vertices, {} arcs, truncated {}, simple {}",
            t.name(),
            g.vertices.len(),
            g.arcs.len(),
            g.truncated,
            report.simple
        );
        if t.name() == "iff" {
            print!("{}", g.to_dot());
        }
    }
}
