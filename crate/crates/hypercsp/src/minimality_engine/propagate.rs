use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::orbit_algebra::combinatorics::k_subsets;
use crate::orbit_algebra::{OrbitDescriptor, Relation, Universe};

use super::instance::{Constraint, Instance};
use super::MinError;

/// Order in which pending constraints are revised. The fixpoint does not
/// depend on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Schedule {
    #[default]
    Fifo,
    Lifo,
    Seeded(u64),
}

struct Worklist {
    items: VecDeque<usize>,
    pending: Vec<bool>,
    schedule: Schedule,
    rng: ChaCha8Rng,
}

impl Worklist {
    fn new(n: usize, schedule: Schedule) -> Self {
        let seed = if let Schedule::Seeded(s) = schedule { s } else { 0 };
        Worklist { items: (0..n).collect(), pending: vec![true; n], schedule, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn push(&mut self, i: usize) {
        if !self.pending[i] {
            self.pending[i] = true;
            self.items.push_back(i);
        }
    }

    fn pop(&mut self) -> Option<usize> {
        let i = match self.schedule {
            Schedule::Fifo => self.items.pop_front(),
            Schedule::Lifo => self.items.pop_back(),
            Schedule::Seeded(_) if self.items.is_empty() => None,
            Schedule::Seeded(_) => {
                let j = self.rng.gen_range(0..self.items.len());
                self.items.swap_remove_back(j)
            }
        }?;
        self.pending[i] = false;
        Some(i)
    }
}

/// Every sorted subset of `scope` with between 1 and `k` elements.
fn small_subsets(scope: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut sorted = scope.to_vec();
    sorted.sort_unstable();
    (1..=k.min(sorted.len()))
        .flat_map(|m| k_subsets(sorted.len(), m))
        .map(|s| s.iter().map(|&i| sorted[i]).collect())
        .collect()
}

pub fn kl_minimalize(inst: &Instance, universe: &Universe, k: usize, ell: usize) -> Result<Instance, MinError> {
    kl_minimalize_with(inst, universe, k, ell, Schedule::Fifo)
}

/// The `(k, l)`-minimal instance equivalent to `inst`: one constraint per
/// `l`-subset of the variables (all of them if fewer), then pruning until
/// all projections onto at most `k` variables agree.
pub fn kl_minimalize_with(
    inst: &Instance,
    universe: &Universe,
    k: usize,
    ell: usize,
    schedule: Schedule,
) -> Result<Instance, MinError> {
    if k == 0 || k > ell {
        return Err(MinError::BadLevels { k, ell });
    }
    let n = inst.var_count();
    let mut out = inst.clone();
    for c in out.constraints_mut() {
        c.retain(|o| universe.realizable_descriptor(o));
    }
    let m = ell.min(n);
    if m > 0 {
        let all = universe.enumerate_orbits(m, false);
        for s in k_subsets(n, m) {
            let inside: Vec<(&Constraint, Vec<usize>)> =
                inst.constraints().iter().filter_map(|c| Some((c, s_positions(&s, c.scope())?))).collect();
            let allowed = all
                .iter()
                .filter(|o| inside.iter().all(|(c, pos)| c.allowed().contains(&o.project_unchecked(pos))))
                .cloned();
            out.constraints_mut().push(Constraint::new(s, Relation::new(m, allowed)?)?);
        }
    }
    propagate(&mut out, k, schedule);
    out.set_level(Some((k, ell)));
    Ok(out)
}

/// Re-establishes minimality after constraints were tightened. Reuses the
/// existing cover when every `l`-subset is still inside some scope, so no
/// constraints are duplicated; otherwise runs the full construction.
pub fn restore_minimality(inst: &Instance, universe: &Universe, k: usize, ell: usize) -> Result<Instance, MinError> {
    if k == 0 || k > ell {
        return Err(MinError::BadLevels { k, ell });
    }
    let n = inst.var_count();
    let m = ell.min(n);
    let covered = m == 0 || k_subsets(n, m).iter().all(|s| inst.constraints().iter().any(|c| c.covers(s)));
    if !covered {
        return kl_minimalize(inst, universe, k, ell);
    }
    let mut out = inst.clone();
    propagate(&mut out, k, Schedule::Fifo);
    out.set_level(Some((k, ell)));
    Ok(out)
}

/// Positions of `scope` inside the sorted set `s`, if it is contained.
fn s_positions(s: &[usize], scope: &[usize]) -> Option<Vec<usize>> {
    scope.iter().map(|v| s.iter().position(|x| x == v)).collect()
}

fn propagate(inst: &mut Instance, k: usize, schedule: Schedule) {
    let cs = inst.constraints_mut();
    let keys: Vec<Vec<Vec<usize>>> = cs.iter().map(|c| small_subsets(c.scope(), k)).collect();
    let mut by_key: BTreeMap<&[usize], Vec<usize>> = BTreeMap::new();
    for (i, ks) in keys.iter().enumerate() {
        for key in ks {
            by_key.entry(key.as_slice()).or_default().push(i);
        }
    }
    let mut table: BTreeMap<&[usize], BTreeSet<OrbitDescriptor>> = BTreeMap::new();
    let mut work = Worklist::new(cs.len(), schedule);
    while let Some(i) = work.pop() {
        let c = &mut cs[i];
        let pos: Vec<Vec<usize>> = keys[i].iter().map(|key| c.positions(key).expect("own subset")).collect();
        c.retain(|o| {
            keys[i]
                .iter()
                .zip(&pos)
                .all(|(key, p)| table.get(key.as_slice()).is_none_or(|t| t.contains(&o.project_unchecked(p))))
        });
        for (key, p) in keys[i].iter().zip(&pos) {
            let proj: BTreeSet<OrbitDescriptor> = c.allowed().iter().map(|o| o.project_unchecked(p)).collect();
            let changed = match table.get_mut(key.as_slice()) {
                None => {
                    table.insert(key.as_slice(), proj);
                    true
                }
                Some(t) => {
                    let before = t.len();
                    t.retain(|o| proj.contains(o));
                    t.len() != before
                }
            };
            if changed {
                for &j in &by_key[key.as_slice()] {
                    if j != i {
                        work.push(j);
                    }
                }
            }
        }
    }
}

/// The first failure of the two minimality conditions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MinimalityViolation {
    /// an `l`-subset (or the whole variable set) inside no scope
    Uncovered(Vec<usize>),
    /// two constraints project differently onto a common set of at most
    /// `k` variables
    Mismatch { first: usize, second: usize, vars: Vec<usize> },
}

/// Checks both conditions literally, without using the stamp.
pub fn is_kl_minimal(inst: &Instance, k: usize, ell: usize) -> Result<(), MinimalityViolation> {
    let n = inst.var_count();
    let cs = inst.constraints();
    let m = ell.min(n);
    if m > 0 {
        if let Some(s) = k_subsets(n, m).into_iter().find(|s| !cs.iter().any(|c| c.covers(s))) {
            return Err(MinimalityViolation::Uncovered(s));
        }
    }
    for (a, c1) in cs.iter().enumerate() {
        for (b, c2) in cs.iter().enumerate().skip(a + 1) {
            let common: Vec<usize> = c1.scope().iter().copied().filter(|v| c2.scope().contains(v)).collect();
            for vars in small_subsets(&common, k) {
                if c1.project(&vars) != c2.project(&vars) {
                    return Err(MinimalityViolation::Mismatch { first: a, second: b, vars });
                }
            }
        }
    }
    Ok(())
}

/// The common projection of a minimal instance onto a tuple of at most `k`
/// variables; repeats are allowed.
pub fn proj_instance(inst: &Instance, u: &[usize]) -> Result<Relation, MinError> {
    let (k, _) = inst.level().ok_or(MinError::NotMinimal)?;
    let distinct: BTreeSet<usize> = u.iter().copied().collect();
    if distinct.len() > k {
        return Err(MinError::TupleTooLong { len: distinct.len(), k });
    }
    if let Some(&v) = u.iter().find(|&&v| v >= inst.var_count()) {
        return Err(MinError::UnknownVariable(v));
    }
    inst.constraints().iter().find_map(|c| c.project(u)).ok_or(MinError::NotCovered)
}
