use std::collections::BTreeSet;
use std::fmt;

use crate::orbit_algebra::Relation;
use crate::template::Template;

use super::PpError;

/// What an atom asserts about its argument tuple.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AtomRel {
    /// A relation resolved by name in the template.
    Named(String),
    /// An explicit orbit union, for relations pp-definable from the template
    /// that have no name of their own.
    Inline(Relation),
    Eq,
    Neq,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub rel: AtomRel,
    pub args: Vec<usize>,
}

/// A primitive positive formula: a conjunction of atoms over `vars`, with
/// every variable outside `free` existentially quantified.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PPFormula {
    name: Option<String>,
    vars: Vec<String>,
    atoms: Vec<Atom>,
    free: Vec<usize>,
}

impl PPFormula {
    /// A formula with the given variables, all free, and no atoms.
    pub fn new(vars: impl IntoIterator<Item = impl Into<String>>) -> Self {
        let vars: Vec<String> = vars.into_iter().map(Into::into).collect();
        let free = (0..vars.len()).collect();
        PPFormula { name: None, vars, atoms: Vec::new(), free }
    }

    /// Variables named `x0, x1, ...`.
    pub fn with_vars(n: usize) -> Self {
        PPFormula::new((0..n).map(|i| format!("x{i}")))
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Free variables, in order.
    pub fn free(&self) -> &[usize] {
        &self.free
    }

    /// The number of free variables; quantified variables do not count.
    pub fn free_count(&self) -> usize {
        self.free.len()
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn is_free(&self, var: usize) -> bool {
        self.free.contains(&var)
    }

    /// Adds a variable and returns its index. New variables are free.
    pub fn add_var(&mut self, name: impl Into<String>) -> usize {
        self.vars.push(name.into());
        let i = self.vars.len() - 1;
        self.free.push(i);
        i
    }

    pub fn atom(mut self, rel: &str, args: &[usize]) -> Self {
        self.push(AtomRel::Named(rel.to_string()), args.to_vec());
        self
    }

    pub fn inline(mut self, rel: Relation, args: &[usize]) -> Self {
        self.push(AtomRel::Inline(rel), args.to_vec());
        self
    }

    pub fn eq(mut self, x: usize, y: usize) -> Self {
        self.push(AtomRel::Eq, vec![x, y]);
        self
    }

    pub fn neq(mut self, x: usize, y: usize) -> Self {
        self.push(AtomRel::Neq, vec![x, y]);
        self
    }

    pub fn push(&mut self, rel: AtomRel, args: Vec<usize>) {
        assert!(args.iter().all(|&a| a < self.vars.len()), "atom argument out of range");
        self.atoms.push(Atom { rel, args });
    }

    /// Conjoins `x != y` for every pair of distinct free variables.
    pub fn all_distinct(mut self) -> Self {
        let free = self.free.clone();
        for (a, &x) in free.iter().enumerate() {
            for &y in &free[a + 1..] {
                self.push(AtomRel::Neq, vec![x, y]);
            }
        }
        self
    }

    /// Sets the free variables; the rest become quantified.
    pub fn with_free(mut self, free: Vec<usize>) -> Result<Self, PpError> {
        let mut seen = BTreeSet::new();
        for &f in &free {
            if f >= self.vars.len() || !seen.insert(f) {
                return Err(PpError::BadFreeList);
            }
        }
        self.free = free;
        Ok(self)
    }

    /// Quantifies all variables except `keep` (kept in their current order).
    pub fn exists_except(mut self, keep: &BTreeSet<usize>) -> Self {
        self.free.retain(|v| keep.contains(v));
        self
    }

    /// Checks that every atom resolves with the right arity.
    pub fn check(&self, template: &Template) -> Result<(), PpError> {
        for a in &self.atoms {
            let arity = match &a.rel {
                AtomRel::Named(n) => template.relation(n).ok_or_else(|| PpError::UnknownRelation(n.clone()))?.arity(),
                AtomRel::Inline(r) => r.arity(),
                AtomRel::Eq | AtomRel::Neq => 2,
            };
            if arity != a.args.len() {
                return Err(PpError::ArityMismatch {
                    relation: atom_label(&a.rel),
                    expected: arity,
                    found: a.args.len(),
                });
            }
        }
        Ok(())
    }

    /// Resolves variable names to indices.
    pub fn indices(&self, names: &[&str]) -> Result<Vec<usize>, PpError> {
        names.iter().map(|n| self.var(n).ok_or_else(|| PpError::UnknownVariable(n.to_string()))).collect()
    }

    /// Rebuilds a formula over new variable names and atoms with the given
    /// free list. Used by composition.
    pub(crate) fn from_parts(vars: Vec<String>, atoms: Vec<Atom>, free: Vec<usize>) -> Self {
        PPFormula { name: None, vars, atoms, free }
    }
}

fn atom_label(rel: &AtomRel) -> String {
    match rel {
        AtomRel::Named(n) => n.clone(),
        AtomRel::Inline(r) => format!("{{{}}}", r.orbit_list().replace(' ', "|")),
        AtomRel::Eq => "=".into(),
        AtomRel::Neq => "!=".into(),
    }
}

impl fmt::Display for PPFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |args: &[usize]| args.iter().map(|&a| self.vars[a].as_str()).collect::<Vec<_>>().join(",");
        write!(f, "pp {} free({}) :=", self.name.as_deref().unwrap_or("phi"), names(&self.free))?;
        let mut parts: Vec<String> = self
            .atoms
            .iter()
            .map(|a| match &a.rel {
                AtomRel::Eq => format!("{} = {}", self.vars[a.args[0]], self.vars[a.args[1]]),
                AtomRel::Neq => format!("{} != {}", self.vars[a.args[0]], self.vars[a.args[1]]),
                rel => format!("{}({})", atom_label(rel), names(&a.args)),
            })
            .collect();
        let bound: Vec<usize> = (0..self.vars.len()).filter(|v| !self.free.contains(v)).collect();
        if !bound.is_empty() {
            parts.push(format!("exists({})", names(&bound)));
        }
        if parts.is_empty() {
            return write!(f, " true");
        }
        write!(f, " {}", parts.join(" & "))
    }
}
