use std::collections::BTreeSet;

use crate::orbit_algebra::{Fragment, OrbitDescriptor, Relation};

use super::MinError;

/// A scope of distinct variables with the set of admitted orbits.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    scope: Vec<usize>,
    allowed: Relation,
}

impl Constraint {
    pub fn new(scope: Vec<usize>, allowed: Relation) -> Result<Self, MinError> {
        if scope.iter().collect::<BTreeSet<_>>().len() != scope.len() {
            return Err(MinError::RepeatedScope);
        }
        if scope.len() != allowed.arity() {
            return Err(MinError::ArityMismatch { scope: scope.len(), arity: allowed.arity() });
        }
        // names are presentation only
        let allowed = Relation::new(allowed.arity(), allowed.iter().cloned())?;
        Ok(Constraint { scope, allowed })
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn allowed(&self) -> &Relation {
        &self.allowed
    }

    pub fn arity(&self) -> usize {
        self.scope.len()
    }

    pub fn is_empty(&self) -> bool {
        self.allowed.is_empty()
    }

    /// Positions of `vars` in the scope, if all occur.
    pub fn positions(&self, vars: &[usize]) -> Option<Vec<usize>> {
        vars.iter().map(|v| self.scope.iter().position(|s| s == v)).collect()
    }

    pub fn covers(&self, vars: &[usize]) -> bool {
        vars.iter().all(|v| self.scope.contains(v))
    }

    /// Projection onto a tuple of scope variables, repeats allowed.
    pub fn project(&self, vars: &[usize]) -> Option<Relation> {
        let pos = self.positions(vars)?;
        Some(Relation::new(vars.len(), self.allowed.iter().map(|o| o.project_unchecked(&pos))).expect("arity"))
    }

    pub(super) fn retain(&mut self, mut keep: impl FnMut(&OrbitDescriptor) -> bool) -> bool {
        let before = self.allowed.len();
        self.allowed = Relation::new(self.arity(), self.allowed.iter().filter(|o| keep(o)).cloned()).expect("arity");
        self.allowed.len() != before
    }
}

/// Variables, constraints and an optional `(k, l)` minimality stamp.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    k: usize,
    vars: Vec<String>,
    constraints: Vec<Constraint>,
    level: Option<(usize, usize)>,
}

impl Instance {
    /// An instance over a universe of arity `k` with no constraints.
    pub fn new(k: usize, vars: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Instance { k, vars: vars.into_iter().map(Into::into).collect(), constraints: Vec::new(), level: None }
    }

    /// Variables `x0, x1, ...`.
    pub fn with_vars(k: usize, n: usize) -> Self {
        Instance::new(k, (0..n).map(|i| format!("x{i}")))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn level(&self) -> Option<(usize, usize)> {
        self.level
    }

    pub(super) fn set_level(&mut self, level: Option<(usize, usize)>) {
        self.level = level;
    }

    pub(super) fn constraints_mut(&mut self) -> &mut Vec<Constraint> {
        &mut self.constraints
    }

    /// Adds a constraint; clears the minimality stamp.
    pub fn push(&mut self, c: Constraint) -> Result<(), MinError> {
        if let Some(&v) = c.scope().iter().find(|&&v| v >= self.vars.len()) {
            return Err(MinError::UnknownVariable(v));
        }
        if let Some(o) = c.allowed().iter().find(|o| o.k() != self.k) {
            return Err(MinError::KMismatch { expected: self.k, found: o.k() });
        }
        self.constraints.push(c);
        self.level = None;
        Ok(())
    }

    pub fn constrain(mut self, scope: &[usize], allowed: Relation) -> Result<Self, MinError> {
        self.push(Constraint::new(scope.to_vec(), allowed)?)?;
        Ok(self)
    }

    /// Contains an empty constraint.
    pub fn is_trivial(&self) -> bool {
        self.constraints.iter().any(Constraint::is_empty)
    }

    /// First constraint violated by a labeling of all variables, given as
    /// an orbit of arity `|V|`.
    pub fn violated_by(&self, o: &OrbitDescriptor) -> Option<usize> {
        assert_eq!(o.arity(), self.vars.len(), "labeling must cover every variable");
        self.constraints.iter().position(|c| !c.allowed().contains(&o.project_unchecked(c.scope())))
    }

    pub fn satisfied_by(&self, o: &OrbitDescriptor) -> bool {
        self.violated_by(o).is_none()
    }

    /// Checks an assignment of variables to points of a total fragment;
    /// returns the index of the first violated constraint.
    pub fn check_assignment(&self, fragment: &Fragment, assignment: &[usize]) -> Result<(), usize> {
        assert_eq!(assignment.len(), self.vars.len(), "assignment must cover every variable");
        for (i, c) in self.constraints.iter().enumerate() {
            let tuple: Vec<usize> = c.scope().iter().map(|&v| assignment[v]).collect();
            match fragment.orbit_of(&tuple) {
                Ok(o) if c.allowed().contains(&o) => {}
                _ => return Err(i),
            }
        }
        Ok(())
    }
}
