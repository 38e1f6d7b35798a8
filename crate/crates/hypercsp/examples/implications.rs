//! Checking an implication, composing it with itself, and comparing the
//! result with the relational composition of its orbit pairs.

use hypercsp::implication_engine::fixtures::iff_template;
use hypercsp::implication_engine::{
    check_implication, compose_implications, impl_properties_check, relational_compose, ImplDigraph,
};
use hypercsp::orbit_algebra::Relation;
use hypercsp::pp_engine::{Evaluator, PPFormula};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t = iff_template();
    let ev = Evaluator::new(&t);
    let phi = PPFormula::parse("free(x0,x1,x2,x3) := Q(x0,x1,x2,x3) & X(x0,x1,x3,x2)", 3)?.all_distinct();
    let c = Relation::parse_orbits(3, 3, "012:0")?;
    let d = Relation::parse_orbits(3, 3, "012:1")?;

    let imp = match check_implication(&ev, &phi, &[0, 1, 2], &[0, 1, 3], &c, &d)? {
        Ok(imp) => imp,
        Err(failure) => return Err(failure.to_string().into()),
    };
    println!("{imp}");
    println!("orbit pairs: {}", imp.pairs.len());

    // the reversed implication maps d back to c, so composing gives a (c, c)-implication
    let back = check_implication(&ev, &phi, &[0, 1, 2], &[0, 1, 3], &d, &c)?.map_err(|f| f.to_string())?;
    let square = compose_implications(&ev, &imp, &back, false)?;
    println!("composed: {}", square.formula);
    println!("pairs equal relational composition: {}", square.pairs == relational_compose(&imp.pairs, &back.pairs));
    println!("properties: {:?}", impl_properties_check(&imp, &back, &square));

    let dg = ImplDigraph::new(&square)?;
    let (sinks, sources) = dg.sinks_sources();
    println!("smooth {} sinks {sinks:?} sources {sources:?}", dg.is_smooth());
    Ok(())
}
