//! Exhaustive search over labelings of all variables: equality patterns
//! first, then hyperedge flags on the classes, checking each constraint as
//! soon as everything it reads is decided.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::minimality_engine::Instance;
use crate::orbit_algebra::combinatorics::{colex_rank, first_appearance, k_subsets, lex_rank, set_partitions};
use crate::orbit_algebra::{OrbitDescriptor, Relation, Universe};

use super::{Solution, SolveError};

/// Default cap on the number of variables.
pub const DEFAULT_SIZE_CAP: usize = 6;

/// A constraint compiled against one equality pattern.
struct Check<'a> {
    pattern: Vec<u8>,
    /// lex indices of the class subsets, in the projected flag order
    reads: Vec<usize>,
    allowed: &'a Relation,
}

struct PatternSearch<'a> {
    k: usize,
    pattern: Vec<u8>,
    /// lex index of the subset decided at each step
    order: Vec<usize>,
    /// checks that become decidable after each step
    ready: Vec<Vec<Check<'a>>>,
    universe: &'a Universe,
}

impl<'a> PatternSearch<'a> {
    /// `None` when some constraint already fails on the pattern.
    fn new(inst: &'a Instance, universe: &'a Universe, pattern: Vec<u8>) -> Option<Self> {
        let k = inst.k();
        let classes = pattern.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
        let lex = k_subsets(classes, k);
        let mut order: Vec<usize> = (0..lex.len()).collect();
        order.sort_by_key(|&i| colex_rank(&lex[i]));
        let mut step_of = vec![0; lex.len()];
        for (step, &i) in order.iter().enumerate() {
            step_of[i] = step;
        }
        let mut ready: Vec<Vec<Check<'a>>> = (0..=lex.len()).map(|_| Vec::new()).collect();
        for c in inst.constraints() {
            let cls: Vec<u8> = c.scope().iter().map(|&v| pattern[v]).collect();
            let (pat, reps) = first_appearance(&cls);
            if !c.allowed().iter().any(|o| o.pattern() == pat.as_slice()) {
                return None;
            }
            let distinct: Vec<usize> = reps.iter().map(|&r| cls[r] as usize).collect();
            let reads: Vec<usize> = if distinct.len() >= k {
                k_subsets(distinct.len(), k)
                    .iter()
                    .map(|s| {
                        let mut set: Vec<usize> = s.iter().map(|&i| distinct[i]).collect();
                        set.sort_unstable();
                        lex_rank(classes, &set)
                    })
                    .collect()
            } else {
                Vec::new()
            };
            // step 0 means before any flag is set
            let at = reads.iter().map(|&i| step_of[i] + 1).max().unwrap_or(0);
            ready[at].push(Check { pattern: pat, reads, allowed: c.allowed() });
        }
        let s = PatternSearch { k, pattern, order, ready, universe };
        s.ready[0].iter().all(|c| s.passes(c, &[])).then_some(s)
    }

    fn passes(&self, c: &Check<'_>, bits: &[bool]) -> bool {
        let flags = c.reads.iter().map(|&i| bits[i]).collect();
        let o = OrbitDescriptor::new(self.k, c.pattern.clone(), flags).expect("projected orbit");
        c.allowed.contains(&o)
    }

    /// Visits solutions in a fixed order; `f` returns false to stop.
    /// Returns false if stopped.
    fn run(&self, f: &mut dyn FnMut(OrbitDescriptor) -> bool) -> bool {
        let mut bits = vec![false; self.order.len()];
        self.rec(0, &mut bits, f)
    }

    fn rec(&self, step: usize, bits: &mut Vec<bool>, f: &mut dyn FnMut(OrbitDescriptor) -> bool) -> bool {
        if step == self.order.len() {
            let o = OrbitDescriptor::new(self.k, self.pattern.clone(), bits.clone()).expect("total orbit");
            if !self.universe.realizable_descriptor(&o) {
                return true;
            }
            return f(o);
        }
        for value in [false, true] {
            bits[self.order[step]] = value;
            if self.ready[step + 1].iter().all(|c| self.passes(c, bits)) && !self.rec(step + 1, bits, f) {
                return false;
            }
        }
        bits[self.order[step]] = false;
        true
    }
}

fn check_cap(inst: &Instance, cap: usize) -> Result<(), SolveError> {
    if inst.var_count() > cap {
        return Err(SolveError::CapExceeded { vars: inst.var_count(), cap });
    }
    Ok(())
}

fn patterns(inst: &Instance) -> Vec<Vec<u8>> {
    set_partitions(inst.var_count())
}

/// First solution in search order, or `None`.
pub fn brute_force_solve(inst: &Instance, universe: &Universe, cap: usize) -> Result<Option<Solution>, SolveError> {
    check_cap(inst, cap)?;
    if inst.var_count() == 0 {
        return Ok((!inst.is_trivial()).then(|| Solution::from_labeling(&OrbitDescriptor::constant(inst.k(), 0))));
    }
    let found = patterns(inst).into_par_iter().find_map_first(|p| {
        let s = PatternSearch::new(inst, universe, p)?;
        let mut hit = None;
        s.run(&mut |o| {
            hit = Some(o);
            false
        });
        hit
    });
    Ok(found.map(|o| Solution::from_labeling(&o)))
}

/// Calls `f` on every solution, in search order.
pub fn for_each_solution(
    inst: &Instance,
    universe: &Universe,
    cap: usize,
    mut f: impl FnMut(&OrbitDescriptor) -> bool,
) -> Result<(), SolveError> {
    check_cap(inst, cap)?;
    for p in patterns(inst) {
        if let Some(s) = PatternSearch::new(inst, universe, p) {
            if !s.run(&mut |o| f(&o)) {
                break;
            }
        }
    }
    Ok(())
}

pub fn count_solutions(inst: &Instance, universe: &Universe, cap: usize) -> Result<u64, SolveError> {
    check_cap(inst, cap)?;
    Ok(patterns(inst)
        .into_par_iter()
        .map(|p| {
            let mut n = 0u64;
            if let Some(s) = PatternSearch::new(inst, universe, p) {
                s.run(&mut |_| {
                    n += 1;
                    true
                });
            }
            n
        })
        .sum())
}

/// Whether two instances over the same variables have the same solutions:
/// every solution of the instance with more constraints satisfies the other
/// one, and the counts agree.
pub fn same_solutions(a: &Instance, b: &Instance, universe: &Universe, cap: usize) -> Result<bool, SolveError> {
    check_cap(a, cap)?;
    if a.var_count() != b.var_count() {
        return Ok(false);
    }
    let (x, y) = if a.constraints().len() >= b.constraints().len() { (a, b) } else { (b, a) };
    let inside: Option<u64> = patterns(x)
        .into_par_iter()
        .map(|p| {
            let mut n = 0u64;
            let ok = match PatternSearch::new(x, universe, p) {
                Some(s) => s.run(&mut |o| {
                    n += 1;
                    y.satisfied_by(&o)
                }),
                None => true,
            };
            ok.then_some(n)
        })
        .sum();
    Ok(inside == Some(count_solutions(y, universe, cap)?))
}

/// The full solution set; for tests and small instances.
pub fn all_solutions(inst: &Instance, universe: &Universe, cap: usize) -> Result<HashSet<OrbitDescriptor>, SolveError> {
    let mut out = HashSet::new();
    for_each_solution(inst, universe, cap, |o| {
        out.insert(o.clone());
        true
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(s: &str, arity: usize) -> Relation {
        Relation::parse_orbits(3, arity, s).unwrap()
    }

    fn oracle(inst: &Instance, u: &Universe) -> HashSet<OrbitDescriptor> {
        u.enumerate_orbits(inst.var_count(), false).into_iter().filter(|o| inst.satisfied_by(o)).collect()
    }

    fn sample() -> Instance {
        Instance::with_vars(3, 5)
            .constrain(&[0, 1, 2], rel("012:1 001", 3))
            .unwrap()
            .constrain(&[2, 3, 4], rel("012:0 012:1 010", 3))
            .unwrap()
            .constrain(&[4, 0], rel("01", 2))
            .unwrap()
    }

    #[test]
    fn agrees_with_enumeration() {
        let u = Universe::hypergraph(3);
        let inst = sample();
        let all = all_solutions(&inst, &u, 6).unwrap();
        assert_eq!(all, oracle(&inst, &u));
        assert_eq!(count_solutions(&inst, &u, 6).unwrap(), all.len() as u64);
        let first = brute_force_solve(&inst, &u, 6).unwrap().unwrap();
        first.verify(&inst, &u).unwrap();
    }

    #[test]
    fn bounded_universe_filters_leaves() {
        let u = Universe::k3_free();
        let inst = Instance::new(2, ["a", "b", "c"])
            .constrain(&[0, 1], Relation::parse_orbits(2, 2, "01:1").unwrap())
            .unwrap();
        assert_eq!(all_solutions(&inst, &u, 6).unwrap(), oracle(&inst, &u));
    }

    #[test]
    fn contradiction_and_cap() {
        let u = Universe::hypergraph(3);
        let inst = Instance::with_vars(3, 2)
            .constrain(&[0, 1], rel("01", 2))
            .unwrap()
            .constrain(&[1, 0], rel("00", 2))
            .unwrap();
        assert!(brute_force_solve(&inst, &u, 6).unwrap().is_none());
        assert!(matches!(brute_force_solve(&Instance::with_vars(3, 7), &u, 6), Err(SolveError::CapExceeded { .. })));
        let m = crate::minimality_engine::kl_minimalize(&sample(), &u, 3, 4).unwrap();
        assert!(same_solutions(&sample(), &m, &u, 6).unwrap());
        assert!(!same_solutions(&sample(), &inst, &u, 6).unwrap());
    }
}
