//! Parsing and exactly evaluating primitive positive formulas.

use hypercsp::implication_engine::fixtures::implies_template;
use hypercsp::orbit_algebra::Universe;
use hypercsp::pp_engine::{Evaluator, PPFormula};
use hypercsp::template::Template;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let plain = Template::plain(Universe::hypergraph(3));
    let ev = Evaluator::new(&plain);

    let phi = PPFormula::parse("pp shared free(x,y) := E(x,y,z) & E(x,y,w) & N(x,z,w) & exists(z,w)", 3)?;
    let out = ev.evaluate(&phi)?;
    println!("{phi}\n  ({}) in {}", out.vars.join(","), out.relation);

    let chain = PPFormula::parse("free(a,b,c,d) := E(a,b,c) & N(b,c,d)", 3)?;
    println!("{chain}\n  projected onto (a,d): {}", ev.proj_formula(&chain, &[0, 3])?);

    let t = implies_template();
    let ev = Evaluator::new(&t);
    let forced = PPFormula::parse("free(a,b,c,d) := P(a,b,c,d) & E(a,b,c)", 3)?;
    println!("{forced}\n  (d,b,c) in {}", ev.proj_formula(&forced, &[3, 1, 2])?);
    println!("  satisfiable: {}", ev.is_satisfiable(&forced)?);
    Ok(())
}
