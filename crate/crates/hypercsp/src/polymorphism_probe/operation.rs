use std::fmt;

use itertools::Itertools;

use crate::orbit_algebra::{Fragment, Relation, Universe};

use super::ProbeError;

/// Lex rank of an argument tuple over a domain of size `s`.
pub fn row_index(s: usize, args: &[usize]) -> usize {
    args.iter().fold(0, |acc, &x| acc * s + x)
}

/// Inverse of [`row_index`].
pub fn row_of(s: usize, m: usize, mut index: usize) -> Vec<usize> {
    let mut row = vec![0; m];
    for slot in row.iter_mut().rev() {
        *slot = index % s;
        index /= s;
    }
    row
}

/// The value the near-unanimity equations force on a row, if any.
pub fn nu_value(row: &[usize]) -> Option<usize> {
    if row.len() < 3 {
        return None;
    }
    let first = row[0];
    if row.iter().filter(|&&x| x != first).count() <= 1 {
        return Some(first);
    }
    let second = row[1];
    (row.iter().filter(|&&x| x != second).count() == 1).then_some(second)
}

/// An operation `f: S^m -> output` on the points of a finite domain
/// fragment. The output is a fragment of its own; for local near-unanimity
/// operations its first `|S|` points are the domain points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialOperation {
    arity: usize,
    domain: Fragment,
    table: Vec<usize>,
    output: Fragment,
}

impl PartialOperation {
    pub fn new(arity: usize, domain: Fragment, table: Vec<usize>, output: Fragment) -> Result<Self, ProbeError> {
        let expected = domain.len().pow(arity as u32);
        if table.len() != expected {
            return Err(ProbeError::TableSize { expected, found: table.len() });
        }
        if let Some(&entry) = table.iter().find(|&&p| p >= output.len()) {
            return Err(ProbeError::TableRange(entry));
        }
        Ok(PartialOperation { arity, domain, table, output })
    }

    /// The `i`-th projection, with the domain as output.
    pub fn projection(domain: &Fragment, arity: usize, i: usize) -> Self {
        let s = domain.len();
        let table = (0..s.pow(arity as u32)).map(|r| row_of(s, arity, r)[i]).collect();
        PartialOperation { arity, domain: domain.clone(), table, output: domain.clone() }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain(&self) -> &Fragment {
        &self.domain
    }

    pub fn output(&self) -> &Fragment {
        &self.output
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn apply(&self, args: &[usize]) -> usize {
        self.table[row_index(self.domain.len(), args)]
    }

    /// Applies the operation row-wise to `columns`, each a tuple over the
    /// domain of the same length.
    pub fn apply_columns(&self, columns: &[&Vec<usize>]) -> Vec<usize> {
        let r = columns.first().map_or(0, |c| c.len());
        (0..r).map(|i| self.apply(&columns.iter().map(|c| c[i]).collect::<Vec<_>>())).collect()
    }

    /// One line per table row followed by the decided output hyperedges.
    pub fn to_text(&self) -> String {
        let s = self.domain.len();
        let dn = self.domain.names();
        let on = self.output.names();
        let mut out = format!("operation arity={} domain={} output={}\n", self.arity, s, self.output.len());
        for (r, &v) in self.table.iter().enumerate() {
            let args = row_of(s, self.arity, r).iter().map(|&p| dn[p].as_str()).join(",");
            out.push_str(&format!("f({args}) = {}\n", on[v]));
        }
        for e in self.output.edges() {
            out.push_str(&format!("edge {}\n", e.iter().map(|&p| on[p].as_str()).join(",")));
        }
        out
    }
}

/// A witness that an operation does not preserve a relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// relation tuples over the domain whose row-wise image leaves the
    /// relation or reads an undecided flag
    Matrix { columns: Vec<Vec<usize>>, image: Vec<usize>, undecided: bool },
    /// the output fragment does not embed into the universe
    Unrealizable,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Matrix { columns, image, undecided } => {
                let cols = columns.iter().map(|c| format!("({})", c.iter().join(","))).join(" ");
                let what = if *undecided { "reads an undecided flag" } else { "leaves the relation" };
                write!(f, "columns {cols} map to ({}) which {what}", image.iter().join(","))
            }
            Violation::Unrealizable => write!(f, "output fragment is not realizable"),
        }
    }
}

/// Tuples over the points of `domain` whose orbit lies in `rel`.
pub fn relation_tuples(domain: &Fragment, rel: &Relation) -> Vec<Vec<usize>> {
    itertools::repeat_n(0..domain.len(), rel.arity())
        .multi_cartesian_product()
        .filter(|t| domain.orbit_of(t).is_ok_and(|o| rel.contains(&o)))
        .collect()
}

/// Checks every `m`-column matrix of `rel`-tuples over the domain.
pub fn preserves(op: &PartialOperation, rel: &Relation, universe: &Universe) -> Result<(), Violation> {
    if !universe.realizable(op.output()) {
        return Err(Violation::Unrealizable);
    }
    let tuples = relation_tuples(op.domain(), rel);
    for cols in itertools::repeat_n(tuples.iter(), op.arity()).multi_cartesian_product() {
        let image = op.apply_columns(&cols);
        let bad = match op.output().orbit_of(&image) {
            Ok(o) => (!rel.contains(&o)).then_some(false),
            Err(_) => Some(true),
        };
        if let Some(undecided) = bad {
            return Err(Violation::Matrix { columns: cols.into_iter().cloned().collect(), image, undecided });
        }
    }
    Ok(())
}

/// A failed near-unanimity equation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NuViolation {
    ArityTooSmall(usize),
    /// the output does not start with the domain points
    Domain,
    Row {
        row: Vec<usize>,
        expected: usize,
        found: usize,
    },
}

impl fmt::Display for NuViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NuViolation::ArityTooSmall(m) => write!(f, "arity {m} is below 3"),
            NuViolation::Domain => write!(f, "output does not extend the domain"),
            NuViolation::Row { row, expected, found } => {
                write!(f, "f({}) = {found}, expected {expected}", row.iter().join(","))
            }
        }
    }
}

/// Checks `f(a,...,a) = a` and `f(b,..,b,a,b,..,b) = b` for all `a, b` in
/// the domain and every position of `a`.
pub fn check_local_nu_equations(op: &PartialOperation) -> Result<(), NuViolation> {
    let m = op.arity();
    if m < 3 {
        return Err(NuViolation::ArityTooSmall(m));
    }
    let (dom, out) = (op.domain(), op.output());
    let s = dom.len();
    let extends = out.len() >= s && out.names()[..s] == *dom.names() && {
        let k = dom.k();
        crate::orbit_algebra::combinatorics::k_subsets(s, k).iter().all(|t| dom.flag(t) == out.flag(t))
    };
    if !extends {
        return Err(NuViolation::Domain);
    }
    for b in 0..s {
        for a in 0..s {
            for i in 0..m {
                let mut row = vec![b; m];
                row[i] = a;
                let found = op.apply(&row);
                if found != b {
                    return Err(NuViolation::Row { row, expected: b, found });
                }
                if a == b {
                    break;
                }
            }
        }
    }
    Ok(())
}
