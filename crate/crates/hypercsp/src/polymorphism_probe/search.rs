//! Backtracking over table rows and output flags.
//!
//! Rows are compact ids into the constrained part of `S^m`. Values are
//! output points: the base points, the fresh points created so far, and one
//! new fresh point (fresh points are interchangeable, so only the next one
//! is ever tried). Flags touching fresh points are decided only once a
//! constraint with all rows assigned reads them.

use std::collections::{HashMap, HashSet};

use crate::orbit_algebra::combinatorics::k_subsets;
use crate::orbit_algebra::{OrbitDescriptor, Relation, Universe};

const NONE: usize = usize::MAX;

/// One preservation requirement: the images of `rows` form a tuple of
/// `rels[rel]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(super) struct Requirement {
    pub rel: usize,
    pub rows: Vec<usize>,
}

pub(super) struct Problem<'a> {
    pub universe: &'a Universe,
    pub rels: Vec<Relation>,
    /// raw row indices of the compact ids
    pub rows: Vec<usize>,
    pub reqs: Vec<Requirement>,
    /// points that exist before the search, with their decided flags
    pub base: usize,
    pub base_flags: HashMap<Vec<usize>, bool>,
    pub forced: Vec<Option<usize>>,
    pub allow_fresh: bool,
}

impl<'a> Problem<'a> {
    /// Collects requirements given over raw row indices, deduplicated and
    /// in first-seen order.
    pub fn new(
        universe: &'a Universe,
        rels: Vec<Relation>,
        raw: impl IntoIterator<Item = (usize, Vec<usize>)>,
    ) -> Self {
        let mut ids: HashMap<usize, usize> = HashMap::new();
        let mut rows = Vec::new();
        let mut seen = HashSet::new();
        let mut reqs = Vec::new();
        for (rel, raw_rows) in raw {
            let compact: Vec<usize> = raw_rows
                .iter()
                .map(|&r| {
                    *ids.entry(r).or_insert_with(|| {
                        rows.push(r);
                        rows.len() - 1
                    })
                })
                .collect();
            let req = Requirement { rel, rows: compact };
            if seen.insert(req.clone()) {
                reqs.push(req);
            }
        }
        let forced = vec![None; rows.len()];
        Problem { universe, rels, rows, reqs, base: 0, base_flags: HashMap::new(), forced, allow_fresh: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(super) enum Step {
    Found,
    Fail,
    Out,
}

pub(super) struct Search<'p, 'a> {
    p: &'p Problem<'a>,
    ksubs: Vec<Vec<Vec<usize>>>,
    by_row: Vec<Vec<usize>>,
    pub val: Vec<usize>,
    open: Vec<u32>,
    complete: Vec<usize>,
    pub points: usize,
    pub flags: HashMap<Vec<usize>, bool>,
    at: Vec<Vec<usize>>,
    pub nodes: u64,
    budget: u64,
}

impl<'p, 'a> Search<'p, 'a> {
    pub fn new(p: &'p Problem<'a>, budget: u64) -> Self {
        let k = p.universe.k();
        let max_arity = p.rels.iter().map(Relation::arity).max().unwrap_or(0);
        let ksubs = (0..=max_arity).map(|r| if r >= k { k_subsets(r, k) } else { Vec::new() }).collect();
        let mut by_row = vec![Vec::new(); p.rows.len()];
        let mut open = vec![0u32; p.reqs.len()];
        for (c, req) in p.reqs.iter().enumerate() {
            let mut distinct = req.rows.clone();
            distinct.sort_unstable();
            distinct.dedup();
            open[c] = distinct.len() as u32;
            for r in distinct {
                by_row[r].push(c);
            }
        }
        let mut s = Search {
            p,
            ksubs,
            by_row,
            val: vec![NONE; p.rows.len()],
            open,
            complete: Vec::new(),
            points: p.base,
            flags: p.base_flags.clone(),
            at: vec![Vec::new(); p.base],
            nodes: 0,
            budget,
        };
        for r in 0..p.rows.len() {
            if let Some(v) = p.forced[r] {
                s.assign(r, v);
            }
        }
        s
    }

    /// Runs the search. On `Found` the state holds the solution.
    pub fn run(&mut self) -> Step {
        if (0..self.p.reqs.len()).any(|c| self.first_compatible(c).is_none()) {
            return Step::Fail;
        }
        self.dfs()
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        self.nodes <= self.budget
    }

    fn assign(&mut self, r: usize, v: usize) -> usize {
        let mark = self.complete.len();
        self.val[r] = v;
        self.at[v].push(r);
        for &c in &self.by_row[r] {
            self.open[c] -= 1;
            if self.open[c] == 0 {
                self.complete.push(c);
            }
        }
        mark
    }

    fn unassign(&mut self, r: usize, mark: usize) {
        let v = self.val[r];
        self.at[v].pop();
        for &c in &self.by_row[r] {
            self.open[c] += 1;
        }
        self.complete.truncate(mark);
        self.val[r] = NONE;
    }

    fn points_of(&self, c: usize) -> Vec<usize> {
        self.p.reqs[c].rows.iter().map(|&r| self.val[r]).collect()
    }

    fn key(pts: &[usize], sub: &[usize]) -> Option<Vec<usize>> {
        let mut key: Vec<usize> = sub.iter().map(|&i| pts[i]).collect();
        if key.contains(&NONE) {
            return None;
        }
        key.sort_unstable();
        key.dedup();
        (key.len() == sub.len()).then_some(key)
    }

    /// The first orbit of the requirement's relation agreeing with the
    /// assigned rows and decided flags.
    fn first_compatible(&self, c: usize) -> Option<&'p OrbitDescriptor> {
        let req = &self.p.reqs[c];
        let pts = self.points_of(c);
        let r = pts.len();
        let decided: Vec<(&Vec<usize>, bool)> = self.ksubs[r]
            .iter()
            .filter_map(|sub| {
                let key = Self::key(&pts, sub)?;
                self.flags.get(&key).map(|&b| (sub, b))
            })
            .collect();
        self.p.rels[req.rel].iter().find(|o| {
            for i in 0..r {
                if pts[i] == NONE {
                    continue;
                }
                for j in i + 1..r {
                    if pts[j] != NONE && o.same(i, j) != (pts[i] == pts[j]) {
                        return false;
                    }
                }
            }
            decided.iter().all(|(sub, b)| o.flag_at(sub) == Some(*b))
        })
    }

    /// An undecided flag read by a requirement with every row assigned,
    /// with the value the first compatible orbit gives it.
    fn pending_flag(&self) -> Option<(Vec<usize>, bool)> {
        for &c in &self.complete {
            let pts = self.points_of(c);
            for sub in &self.ksubs[pts.len()] {
                if let Some(key) = Self::key(&pts, sub) {
                    if !self.flags.contains_key(&key) {
                        let pref = self.first_compatible(c).and_then(|o| o.flag_at(sub)).unwrap_or(false);
                        return Some((key, pref));
                    }
                }
            }
        }
        None
    }

    fn realizable(&self) -> bool {
        self.p.universe.bounds().is_empty()
            || self.p.universe.admits(self.points, &|s| self.flags.get(s).copied().unwrap_or(false))
    }

    fn flag_ok(&self, key: &[usize], value: bool) -> bool {
        let touched = self.at[key[0]].iter().flat_map(|&r| self.by_row[r].iter());
        for &c in touched {
            if self.first_compatible(c).is_none() {
                return false;
            }
        }
        !value || self.realizable()
    }

    fn values(&self) -> usize {
        self.points + usize::from(self.p.allow_fresh)
    }

    fn with_value<T>(&mut self, r: usize, v: usize, f: impl FnOnce(&mut Self) -> T) -> T {
        let fresh = v == self.points;
        if fresh {
            self.points += 1;
            self.at.push(Vec::new());
        }
        let mark = self.assign(r, v);
        let out = f(self);
        self.unassign(r, mark);
        if fresh {
            self.points -= 1;
            self.at.pop();
        }
        out
    }

    /// Requirements of `r` are compatible, and every requirement left with
    /// one open row still has a value for it.
    fn row_ok(&mut self, r: usize) -> bool {
        let cons = self.by_row[r].clone();
        if cons.iter().any(|&c| self.first_compatible(c).is_none()) {
            return false;
        }
        for c in cons {
            if self.open[c] != 1 {
                continue;
            }
            let q = *self.p.reqs[c].rows.iter().find(|&&q| self.val[q] == NONE).expect("one open row");
            let supported = (0..self.values()).any(|w| self.with_value(q, w, |s| s.first_compatible(c).is_some()));
            if !supported {
                return false;
            }
        }
        true
    }

    fn choose_row(&mut self) -> Option<usize> {
        let c = (0..self.p.reqs.len()).filter(|&c| self.open[c] > 0).min_by_key(|&c| (self.open[c], c))?;
        let mut open: Vec<usize> = self.p.reqs[c].rows.iter().copied().filter(|&r| self.val[r] == NONE).collect();
        open.dedup();
        if open.len() == 1 {
            return open.pop();
        }
        let mut best = (usize::MAX, NONE);
        for r in open {
            let mut count = 0;
            for w in 0..self.values() {
                if self.with_value(r, w, |s| s.by_row[r].iter().all(|&c| s.first_compatible(c).is_some())) {
                    count += 1;
                    if count >= best.0 {
                        break;
                    }
                }
            }
            if count < best.0 {
                best = (count, r);
            }
        }
        Some(best.1)
    }

    fn dfs(&mut self) -> Step {
        if let Some((key, pref)) = self.pending_flag() {
            for b in [pref, !pref] {
                if !self.tick() {
                    return Step::Out;
                }
                self.flags.insert(key.clone(), b);
                if self.flag_ok(&key, b) {
                    match self.dfs() {
                        Step::Fail => {}
                        s => return s,
                    }
                }
                self.flags.remove(&key);
            }
            return Step::Fail;
        }
        let Some(r) = self.choose_row() else { return Step::Found };
        for v in 0..self.values() {
            if !self.tick() {
                return Step::Out;
            }
            let fresh = v == self.points;
            if fresh {
                self.points += 1;
                self.at.push(Vec::new());
            }
            let mark = self.assign(r, v);
            if self.row_ok(r) {
                match self.dfs() {
                    Step::Fail => {}
                    s => return s,
                }
            }
            self.unassign(r, mark);
            if fresh {
                self.points -= 1;
                self.at.pop();
            }
        }
        Step::Fail
    }
}
