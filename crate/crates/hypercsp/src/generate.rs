//! Seeded random instances and templates. Every generator draws from one
//! ChaCha8 stream, so a seed fixes the whole output sequence.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::minimality_engine::{kl_minimalize, Constraint, Instance, MinError};
use crate::orbit_algebra::combinatorics::k_subsets;
use crate::orbit_algebra::{OrbitDescriptor, Relation, Universe};
use crate::template::Template;

/// Shape of random instances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceShape {
    pub min_vars: usize,
    pub max_vars: usize,
    pub max_constraints: usize,
    pub max_arity: usize,
    /// chance, in percent, that an orbit is kept in a random relation
    pub density: u32,
}

impl Default for InstanceShape {
    fn default() -> Self {
        InstanceShape { min_vars: 3, max_vars: 6, max_constraints: 5, max_arity: 4, density: 60 }
    }
}

pub struct Generator {
    rng: ChaCha8Rng,
}

impl Generator {
    pub fn new(seed: u64) -> Self {
        Generator { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// A nonempty random subset of `orbits`, each kept with `density`
    /// percent chance.
    pub fn subset(&mut self, arity: usize, orbits: &[OrbitDescriptor], density: u32) -> Relation {
        let p = f64::from(density.min(100)) / 100.0;
        let mut kept: Vec<OrbitDescriptor> = orbits.iter().filter(|_| self.rng.gen_bool(p)).cloned().collect();
        if kept.is_empty() {
            if let Some(o) = orbits.choose(&mut self.rng) {
                kept.push(o.clone());
            }
        }
        Relation::new(arity, kept).expect("orbits share the arity")
    }

    fn scope(&mut self, n: usize, arity: usize) -> Vec<usize> {
        let mut vars: Vec<usize> = (0..n).collect();
        vars.shuffle(&mut self.rng);
        vars.truncate(arity);
        vars
    }

    /// Constraints with arbitrary orbit unions on random scopes.
    pub fn instance(&mut self, universe: &Universe, shape: &InstanceShape) -> Instance {
        let n = self.rng.gen_range(shape.min_vars..=shape.max_vars);
        let mut inst = Instance::with_vars(universe.k(), n);
        let count = self.rng.gen_range(1..=shape.max_constraints);
        for _ in 0..count {
            let arity = self.rng.gen_range(2..=shape.max_arity.min(n));
            let orbits = universe.enumerate_orbits(arity, false);
            let rel = self.subset(arity, &orbits, shape.density);
            let c = Constraint::new(self.scope(n, arity), rel).expect("distinct scope");
            inst.push(c).expect("same k");
        }
        inst
    }

    /// Constraints drawn from the template signature on injective scopes.
    pub fn template_instance(&mut self, template: &Template, n: usize, constraints: usize) -> Instance {
        let sig: Vec<&Relation> =
            template.signature().into_iter().map(|(_, r)| r).filter(|r| r.arity() <= n && !r.is_empty()).collect();
        let mut inst = Instance::with_vars(template.k(), n);
        if sig.is_empty() {
            return inst;
        }
        for _ in 0..constraints {
            let rel = (*sig.choose(&mut self.rng).expect("nonempty")).clone();
            let c = Constraint::new(self.scope(n, rel.arity()), rel).expect("distinct scope");
            inst.push(c).expect("same k");
        }
        inst
    }

    /// A random realizable labeling of `n` variables. With `merge` percent
    /// chance per variable it joins an earlier class.
    pub fn labeling(&mut self, universe: &Universe, n: usize, merge: u32) -> OrbitDescriptor {
        loop {
            let mut pattern: Vec<u8> = Vec::with_capacity(n);
            let mut classes = 0u8;
            for _ in 0..n {
                if classes > 0 && self.rng.gen_ratio(merge.min(100), 100) {
                    pattern.push(self.rng.gen_range(0..classes));
                } else {
                    pattern.push(classes);
                    classes += 1;
                }
            }
            let nf = crate::orbit_algebra::flag_count(classes as usize, universe.k());
            let flags = (0..nf).map(|_| self.rng.gen_bool(0.5)).collect();
            let o = OrbitDescriptor::new(universe.k(), pattern, flags).expect("growth string");
            if universe.realizable_descriptor(&o) {
                return o;
            }
        }
    }

    /// A nontrivial `(k, l)`-minimal instance whose projections onto
    /// `k`-sets are single orbits, planted from a random injective labeling.
    /// Extra constraints admit further orbits that minimalization removes.
    pub fn planted_single_orbit(
        &mut self,
        universe: &Universe,
        n: usize,
        ell: usize,
        extra: usize,
    ) -> Result<(Instance, OrbitDescriptor), MinError> {
        let k = universe.k();
        let planted = self.labeling(universe, n, 0);
        let mut inst = Instance::with_vars(k, n);
        for s in k_subsets(n, k.min(n)) {
            inst.push(Constraint::new(s.clone(), Relation::singleton(planted.project_unchecked(&s)))?)?;
        }
        for _ in 0..extra {
            let arity = self.rng.gen_range(2..=ell.min(n));
            let s = self.scope(n, arity);
            let orbits = universe.enumerate_orbits(arity, false);
            let mut rel = self.subset(arity, &orbits, 30);
            rel = rel.union(&Relation::singleton(planted.project_unchecked(&s)))?;
            inst.push(Constraint::new(s, rel)?)?;
        }
        Ok((kl_minimalize(&inst, universe, k, ell)?, planted))
    }

    /// A template with `relations` random unions of injective orbits, each
    /// of arity `k` to `max_arity`.
    pub fn template(&mut self, universe: &Universe, name: &str, relations: usize, max_arity: usize) -> Template {
        let mut t = Template::new(name, universe.clone());
        let k = universe.k();
        for i in 0..relations {
            let arity = self.rng.gen_range(k..=max_arity.max(k));
            let orbits = universe.enumerate_orbits(arity, true);
            loop {
                let rel = self.subset(arity, &orbits, 50);
                // the full injective relation adds nothing over the built-ins
                if rel.len() < orbits.len() {
                    t.insert(format!("R{i}"), rel);
                    break;
                }
            }
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimality_engine::is_kl_minimal;

    #[test]
    fn same_seed_same_output() {
        let u = Universe::hypergraph(3);
        let shape = InstanceShape::default();
        let a: Vec<String> = {
            let mut g = Generator::new(1);
            (0..5).map(|_| g.instance(&u, &shape).to_text()).collect()
        };
        let mut g = Generator::new(1);
        let b: Vec<String> = (0..5).map(|_| g.instance(&u, &shape).to_text()).collect();
        assert_eq!(a, b);
        let mut g = Generator::new(2);
        assert_ne!(a[0], g.instance(&u, &shape).to_text());
    }

    #[test]
    fn planted_instances_are_minimal_with_single_projections() {
        let u = Universe::hypergraph(3);
        let mut g = Generator::new(7);
        for _ in 0..5 {
            let (inst, planted) = g.planted_single_orbit(&u, 6, 4, 3).unwrap();
            assert!(is_kl_minimal(&inst, 3, 4).is_ok());
            assert!(inst.satisfied_by(&planted));
            for s in k_subsets(6, 3) {
                assert_eq!(crate::minimality_engine::proj_instance(&inst, &s).unwrap().len(), 1);
            }
        }
    }

    #[test]
    fn labelings_respect_bounds() {
        let u = Universe::k3_free();
        let mut g = Generator::new(3);
        for _ in 0..20 {
            assert!(u.realizable_descriptor(&g.labeling(&u, 5, 20)));
        }
    }

    #[test]
    fn templates_use_proper_injective_relations() {
        let u = Universe::hypergraph(3);
        let t = Generator::new(5).template(&u, "rand", 2, 4);
        assert_eq!(t.relations().len(), 2);
        for (_, r) in t.relations() {
            assert!(r.is_injective() && !r.is_empty());
            assert!(r.len() < u.enumerate_orbits(r.arity(), true).len());
        }
    }
}
