//! Randomized invariants of the orbit algebra and minimality engine.

use proptest::prelude::*;
use rand::Rng;

use hypercsp::generate::{Generator, InstanceShape};
use hypercsp::minimality_engine::{is_kl_minimal, kl_minimalize, kl_minimalize_with, Schedule};
use hypercsp::orbit_algebra::{OrbitDescriptor, Relation, Universe};
use hypercsp::solver::all_solutions;

fn universes() -> impl Strategy<Value = Universe> {
    prop_oneof![Just(Universe::hypergraph(3)), Just(Universe::k3_free()), Just(Universe::graph())]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn descriptors_round_trip(u in universes(), seed in any::<u64>(), n in 1usize..7, merge in 0u32..60) {
        let o = Generator::new(seed).labeling(&u, n, merge);
        prop_assert_eq!(OrbitDescriptor::parse(u.k(), &o.to_string()).unwrap(), o);
    }

    #[test]
    fn projections_compose(seed in any::<u64>(), n in 2usize..7) {
        let u = Universe::hypergraph(3);
        let mut g = Generator::new(seed);
        let o = g.labeling(&u, n, 30);
        let p: Vec<usize> = (0..n).filter(|_| g.rng().gen_bool(0.7)).collect();
        prop_assume!(!p.is_empty());
        let q: Vec<usize> = (0..p.len()).rev().collect();
        let composed: Vec<usize> = q.iter().map(|&i| p[i]).collect();
        prop_assert_eq!(o.project(&p).unwrap().project(&q).unwrap(), o.project(&composed).unwrap());
    }

    #[test]
    fn relation_set_laws(seed in any::<u64>(), arity in 2usize..5) {
        let u = Universe::hypergraph(3);
        let mut g = Generator::new(seed);
        let orbits = u.enumerate_orbits(arity, false);
        let (a, b) = (g.subset(arity, &orbits, 40), g.subset(arity, &orbits, 40));
        let full = Relation::full(&u, arity);
        prop_assert!(a.complement(&u).complement(&u).same_orbits(&a));
        prop_assert!(a.union(&a.complement(&u)).unwrap().same_orbits(&full));
        let lhs = a.union(&b).unwrap().complement(&u);
        let rhs = a.complement(&u).intersect(&b.complement(&u)).unwrap();
        prop_assert!(lhs.same_orbits(&rhs));
        prop_assert!(a.difference(&b).unwrap().same_orbits(&a.intersect(&b.complement(&u)).unwrap()));
    }

    #[test]
    fn minimalization_is_idempotent_and_schedule_free(seed in any::<u64>(), order in any::<u64>()) {
        let u = Universe::hypergraph(3);
        let shape = InstanceShape { max_vars: 5, ..InstanceShape::default() };
        let inst = Generator::new(seed).instance(&u, &shape);
        let m = kl_minimalize(&inst, &u, 3, 4).unwrap();
        prop_assert!(is_kl_minimal(&m, 3, 4).is_ok());
        for s in [Schedule::Lifo, Schedule::Seeded(order)] {
            prop_assert_eq!(&kl_minimalize_with(&inst, &u, 3, 4, s).unwrap(), &m);
        }
        let again = kl_minimalize(&m, &u, 3, 4).unwrap();
        prop_assert_eq!(all_solutions(&again, &u, 5).unwrap(), all_solutions(&m, &u, 5).unwrap());
    }
}
