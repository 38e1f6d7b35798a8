//! (k, l)-minimalization of a small instance, then merging variables that
//! every solution sends to the same point.

use hypercsp::minimality_engine::{injectivize, is_kl_minimal, kl_minimalize, Instance};
use hypercsp::orbit_algebra::Universe;
use hypercsp::solver::count_solutions;
use hypercsp::template::Template;

const TEXT: &str = "\
var a b c d e
constraint (a,b,c) allow E
constraint (b,c,d) allow E
constraint (b,c,e) allow N
constraint (a,d) {00}
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let u = Universe::hypergraph(3);
    let t = Template::plain(u.clone());
    let inst = Instance::parse(TEXT, &t)?;
    let m = kl_minimalize(&inst, &u, 3, 4)?;
    println!("minimal: {:?}, trivial: {}", is_kl_minimal(&m, 3, 4).is_ok(), m.is_trivial());
    println!("solution classes before {} after {}", count_solutions(&inst, &u, 6)?, count_solutions(&m, &u, 6)?);
    let inj = injectivize(&m, &u)?;
    println!("merge map {:?}", inj.map);
    print!("{}", inj.instance.to_text());
    Ok(())
}
