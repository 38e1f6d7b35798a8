//! Orbits of tuples over the generic 3-uniform hypergraph and the
//! triangle-free graph, with projections and bound checks.

use hypercsp::orbit_algebra::{Fragment, OrbitDescriptor, Relation, Universe};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let h3 = Universe::hypergraph(3);
    for m in 1..=4 {
        let all = h3.enumerate_orbits(m, false).len();
        let injective = h3.enumerate_orbits(m, true).len();
        println!("arity {m}: {all} orbits, {injective} injective");
    }

    // four distinct points where only {0,1,3} is a hyperedge
    let o = OrbitDescriptor::parse(3, "0123:0100")?;
    println!("{o} restricted to (0,1,3) is {}", o.project(&[0, 1, 3])?);
    println!("{o} restricted to (2,2,0) is {}", o.project(&[2, 2, 0])?);

    let edges = Relation::parse_orbits(3, 3, "012:1")?;
    println!("complement of {edges} is {}", edges.complement(&h3));

    let k3 = Universe::k3_free();
    let triangle = Fragment::total(2, 3, |_| true);
    let path = Fragment::total(2, 3, |s| s != [0, 2]);
    println!("triangle realizable in {}: {}", k3.name(), k3.realizable(&triangle));
    println!("path realizable in {}: {}", k3.name(), k3.realizable(&path));
    println!("injective binary orbits of {}: {}", k3.name(), Relation::injective(&k3, 2));
    Ok(())
}
