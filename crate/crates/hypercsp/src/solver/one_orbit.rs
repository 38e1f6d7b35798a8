use crate::minimality_engine::{proj_instance, Instance};
use crate::orbit_algebra::combinatorics::k_subsets;
use crate::orbit_algebra::{Fragment, OrbitDescriptor, Universe};

use super::{falsified, FalsificationKind, Solution, SolveError};

fn single(inst: &Instance, u: &[usize]) -> Result<OrbitDescriptor, SolveError> {
    let p = proj_instance(inst, u)?;
    if p.len() != 1 {
        let names: Vec<&str> = u.iter().map(|&v| inst.vars()[v].as_str()).collect();
        return Err(SolveError::IllFormed(format!("projection onto ({}) is {p}", names.join(","))));
    }
    let o = p.iter().next().expect("one orbit").clone();
    Ok(o)
}

/// The solution of a nontrivial minimal instance whose projections onto
/// sets of `k` variables are single orbits: identify variables whose pair
/// projection is constant, and read the flags off the projections.
pub fn one_orbit_solve(inst: &Instance, universe: &Universe) -> Result<Solution, SolveError> {
    if inst.is_trivial() {
        return Err(SolveError::IllFormed("instance is trivial".into()));
    }
    let n = inst.var_count();
    let k = inst.k();
    for s in k_subsets(n, k.min(n)) {
        single(inst, &s)?;
    }
    let mut class_of: Vec<usize> = vec![usize::MAX; n];
    let mut reps: Vec<usize> = Vec::new();
    for x in 0..n {
        if class_of[x] != usize::MAX {
            continue;
        }
        class_of[x] = reps.len();
        for y in x + 1..n {
            if class_of[y] == usize::MAX && single(inst, &[x, y])?.same(0, 1) {
                class_of[y] = reps.len();
            }
        }
        reps.push(x);
    }
    let mut fragment = Fragment::new(k, reps.iter().map(|&r| inst.vars()[r].clone()));
    for s in k_subsets(reps.len(), k) {
        let vars: Vec<usize> = s.iter().map(|&c| reps[c]).collect();
        let o = single(inst, &vars)?;
        if !o.is_injective() {
            return Err(SolveError::IllFormed(format!("representatives {vars:?} are not separated")));
        }
        fragment.set_flag(&s, o.flags()[0])?;
    }
    if !universe.realizable(&fragment) {
        return Err(falsified(FalsificationKind::BoundEmbedding, "the one-orbit structure embeds a bound"));
    }
    let sol = Solution { fragment, assignment: class_of };
    sol.verify(inst, universe)?;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimality_engine::kl_minimalize;
    use crate::orbit_algebra::Relation;

    #[test]
    fn single_edge() {
        let u = Universe::hypergraph(3);
        let inst = Instance::new(3, ["a", "b", "c"])
            .constrain(&[0, 1, 2], Relation::parse_orbits(3, 3, "012:1").unwrap())
            .unwrap();
        let m = kl_minimalize(&inst, &u, 3, 4).unwrap();
        let sol = one_orbit_solve(&m, &u).unwrap();
        assert_eq!(sol.fragment.len(), 3);
        assert_eq!(sol.fragment.flag(&[0, 1, 2]), Some(true));
        sol.verify(&inst, &u).unwrap();
    }

    #[test]
    fn quotient_on_a_graph_universe() {
        let u = Universe::graph();
        let inst = Instance::new(2, ["x", "y", "z"])
            .constrain(&[0, 1], Relation::parse_orbits(2, 2, "00").unwrap())
            .unwrap()
            .constrain(&[1, 2], Relation::parse_orbits(2, 2, "01:1").unwrap())
            .unwrap();
        let m = kl_minimalize(&inst, &u, 2, 3).unwrap();
        let sol = one_orbit_solve(&m, &u).unwrap();
        assert_eq!(sol.fragment.len(), 2);
        assert_eq!(sol.assignment, vec![0, 0, 1]);
    }

    #[test]
    fn rejects_two_orbit_projection() {
        let u = Universe::hypergraph(3);
        let m = kl_minimalize(&Instance::with_vars(3, 3), &u, 3, 4).unwrap();
        assert!(matches!(one_orbit_solve(&m, &u), Err(SolveError::IllFormed(_))));
    }
}
