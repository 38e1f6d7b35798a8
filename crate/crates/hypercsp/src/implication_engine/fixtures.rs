//! Small engineered templates over `hypergraph3`, used by the examples,
//! the tests and the acceptance suite.

use crate::orbit_algebra::{OrbitDescriptor, Relation, Universe};
use crate::template::Template;

fn filtered(u: &Universe, arity: usize, injective: bool, keep: impl Fn(&OrbitDescriptor) -> bool) -> Relation {
    Relation::new(arity, u.enumerate_orbits(arity, injective).into_iter().filter(|o| keep(o))).unwrap()
}

/// `Q(a,b,c,d)`: the triples `abc` and `dbc` have the same flag; `X`: they
/// differ. Both on injective quadruples.
pub fn iff_template() -> Template {
    let u = Universe::hypergraph(3);
    let q = filtered(&u, 4, true, |o| o.flag_at(&[0, 1, 2]) == o.flag_at(&[3, 1, 2]));
    let x = filtered(&u, 4, true, |o| o.flag_at(&[0, 1, 2]) != o.flag_at(&[3, 1, 2]));
    Template::new("iff", u).with_relation("Q", q).with_relation("X", x)
}

/// `P(a,b,c,d)`: if `abc` is an edge then so is `dbc`, on injective
/// quadruples.
pub fn implies_template() -> Template {
    let u = Universe::hypergraph(3);
    let p = filtered(&u, 4, true, |o| o.flag_at(&[0, 1, 2]) != Some(true) || o.flag_at(&[3, 1, 2]) == Some(true));
    Template::new("implies", u).with_relation("P", p)
}

/// Ternary relation with patterns `000`, `001`, `011`: `x1 != x2` forces
/// `x2 = x3`.
pub fn q3_template() -> Template {
    let u = Universe::hypergraph(3);
    let r = Relation::parse_orbits(3, 3, "000 001 011").unwrap();
    Template::new("q3", u).with_relation("R", r)
}

/// `E(x1,x2,x3) => x3 = x4` on quadruples with `x1 x2 x3` distinct.
pub fn q4_template() -> Template {
    let u = Universe::hypergraph(3);
    let r = filtered(&u, 4, false, |o| match o.flag_at(&[0, 1, 2]) {
        Some(e) => !e || o.same(2, 3),
        None => false,
    });
    Template::new("q4", u).with_relation("R", r)
}

/// `E(x1,x2,x3) => x4 = x5` on 5-tuples with `x1 x2 x3` distinct.
pub fn q5_template() -> Template {
    let u = Universe::hypergraph(3);
    let r = filtered(&u, 5, false, |o| match o.flag_at(&[0, 1, 2]) {
        Some(e) => !e || o.same(3, 4),
        None => false,
    });
    Template::new("q5", u).with_relation("R", r)
}
