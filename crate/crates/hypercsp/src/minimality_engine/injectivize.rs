use crate::orbit_algebra::combinatorics::first_appearance;
use crate::orbit_algebra::{OrbitDescriptor, Relation, Universe};

use super::instance::{Constraint, Instance};
use super::propagate::proj_instance;
use super::MinError;

/// An injective instance together with the identification it was built by.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Injectivized {
    pub instance: Instance,
    /// `map[x]` is the variable of `instance` that `x` was merged into
    pub map: Vec<usize>,
}

impl Injectivized {
    /// Turns a labeling of the injective instance into one of the original.
    pub fn pull_back(&self, o: &OrbitDescriptor) -> OrbitDescriptor {
        o.project_unchecked(&self.map)
    }
}

/// Merges every pair the instance forces equal and adds `x != y` for every
/// remaining pair. Any solution of the result pulls back to a solution of
/// `inst`.
pub fn injectivize(inst: &Instance, universe: &Universe) -> Result<Injectivized, MinError> {
    if inst.level().is_none() {
        return Err(MinError::NotMinimal);
    }
    if inst.is_trivial() {
        return Err(MinError::Trivial);
    }
    let n = inst.var_count();
    let k = inst.k();
    let mut rep: Vec<usize> = (0..n).collect();
    for x in 0..n {
        for y in x + 1..n {
            if rep[y] != y {
                continue;
            }
            let p = proj_instance(inst, &[x, y])?;
            if p.iter().all(|o| o.same(0, 1)) {
                rep[y] = rep[x];
            }
        }
    }
    let (_, reps) = first_appearance(&rep);
    let index_of = |x: usize| reps.iter().position(|&r| r == rep[x]).expect("representative");
    let map: Vec<usize> = (0..n).map(index_of).collect();
    let mut out = Instance::new(k, reps.iter().map(|&r| inst.vars()[r].clone()));
    for c in inst.constraints() {
        let images: Vec<usize> = c.scope().iter().map(|&v| map[v]).collect();
        let (_, firsts) = first_appearance(&images);
        let scope: Vec<usize> = firsts.iter().map(|&i| images[i]).collect();
        let allowed = c
            .allowed()
            .iter()
            .filter(|o| {
                (0..images.len()).all(|i| (i + 1..images.len()).all(|j| images[i] != images[j] || o.same(i, j)))
            })
            .map(|o| o.project_unchecked(&firsts))
            .filter(OrbitDescriptor::is_injective);
        out.push(Constraint::new(scope.clone(), Relation::new(scope.len(), allowed)?)?)?;
    }
    let neq = Relation::injective(universe, 2);
    for x in 0..out.var_count() {
        for y in x + 1..out.var_count() {
            out.push(Constraint::new(vec![x, y], neq.clone())?)?;
        }
    }
    Ok(Injectivized { instance: out, map })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimality_engine::kl_minimalize;

    fn rel(s: &str, arity: usize) -> Relation {
        Relation::parse_orbits(3, arity, s).unwrap()
    }

    #[test]
    fn forced_equality_merges() {
        let u = Universe::hypergraph(3);
        let inst = Instance::with_vars(3, 4)
            .constrain(&[0, 1, 2], rel("012:1", 3))
            .unwrap()
            .constrain(&[2, 3], rel("00", 2))
            .unwrap();
        let m = kl_minimalize(&inst, &u, 3, 4).unwrap();
        let inj = injectivize(&m, &u).unwrap();
        assert_eq!(inj.map, vec![0, 1, 2, 2]);
        assert_eq!(inj.instance.var_count(), 3);
        assert!(inj.instance.constraints().iter().all(|c| c.allowed().is_injective()));
        let sol = OrbitDescriptor::parse(3, "012:1").unwrap();
        assert!(inj.instance.satisfied_by(&sol));
        assert!(inst.satisfied_by(&inj.pull_back(&sol)));
    }

    #[test]
    fn injective_instance_only_gains_disequalities() {
        let u = Universe::hypergraph(3);
        let inst = Instance::with_vars(3, 3).constrain(&[0, 1, 2], rel("012:0", 3)).unwrap();
        let m = kl_minimalize(&inst, &u, 3, 4).unwrap();
        let inj = injectivize(&m, &u).unwrap();
        assert_eq!(inj.map, vec![0, 1, 2]);
        assert_eq!(inj.instance.constraints().len(), m.constraints().len() + 3);
    }

    #[test]
    fn requires_a_minimal_nontrivial_instance() {
        let u = Universe::hypergraph(3);
        let inst = Instance::with_vars(3, 2);
        assert_eq!(injectivize(&inst, &u), Err(MinError::NotMinimal));
        let bad = inst.constrain(&[0, 1], Relation::empty(2)).unwrap();
        let m = kl_minimalize(&bad, &u, 3, 4).unwrap();
        assert_eq!(injectivize(&m, &u), Err(MinError::Trivial));
    }
}
