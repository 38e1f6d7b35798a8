//! Local polymorphism search on finite point sets: near-unanimity
//! operations and binary injections, with an independent preservation
//! checker.
//!
//! A search either finds a table (re-verified before it is reported),
//! proves that none exists at the given size (`NONE_COMPLETE`), or runs out
//! of budget (`NONE_EXHAUSTED`). A refutation may come from a subset of the
//! preservation requirements, the seed requirements attached to a witness
//! set; fewer requirements only make a table easier to find, so the
//! refutation carries over to the full problem.

mod operation;
mod search;

use std::collections::HashMap;
use std::fmt;

use itertools::Itertools;
use rayon::prelude::*;
use thiserror::Error;

pub use operation::{
    check_local_nu_equations, nu_value, preserves, relation_tuples, row_index, row_of, NuViolation, PartialOperation,
    Violation,
};

use crate::implication_engine::WitnessSet;
use crate::orbit_algebra::combinatorics::k_subsets;
use crate::orbit_algebra::{Fragment, OrbitError, Relation};
use crate::pp_engine::AtomRel;
use crate::template::Template;
use search::{Problem, Search, Step};

pub const DEFAULT_BUDGET: u64 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProbeError {
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error("arity {0} is below 3")]
    ArityTooSmall(usize),
    #[error("the domain fragment must decide every flag")]
    PartialDomain,
    #[error("{rows} table rows exceed the budget {budget}")]
    TooLarge { rows: u128, budget: u64 },
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error("table has {found} rows, expected {expected}")]
    TableSize { expected: usize, found: usize },
    #[error("table entry {0} is not an output point")]
    TableRange(usize),
    #[error("column {column} has {found} entries, the pattern has {expected} variables")]
    SeedShape { column: usize, expected: usize, found: usize },
    #[error("found table failed re-verification: {0}")]
    Unverified(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProbeStatus {
    Found,
    NoneComplete,
    NoneExhausted,
}

impl fmt::Display for ProbeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProbeStatus::Found => "FOUND",
            ProbeStatus::NoneComplete => "NONE_COMPLETE",
            ProbeStatus::NoneExhausted => "NONE_EXHAUSTED",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeReport {
    pub status: ProbeStatus,
    pub arity: usize,
    pub domain: Fragment,
    pub operation: Option<PartialOperation>,
    /// search nodes over all stages
    pub nodes: u64,
    pub transcript: Vec<String>,
}

impl ProbeReport {
    pub fn to_text(&self) -> String {
        let mut out = format!("probe arity={} domain={} status={}\n", self.arity, self.domain.len(), self.status);
        for line in &self.transcript {
            out.push_str(&format!("# {line}\n"));
        }
        if let Some(op) = &self.operation {
            out.push_str(&op.to_text());
        }
        out
    }
}

/// Preservation requirements taken from a witness set: each atom of the
/// pattern, applied to the same `m` columns row by row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedSet {
    pub atoms: Vec<(String, Relation, Vec<usize>)>,
    pub columns: Vec<Vec<usize>>,
}

impl SeedSet {
    /// Equalities are dropped (every operation preserves them); `!=` atoms
    /// count as the injective pair relation.
    pub fn from_witness(template: &Template, w: &WitnessSet) -> Result<Self, ProbeError> {
        let n = w.pattern.var_count();
        if let Some((column, c)) = w.columns.iter().enumerate().find(|(_, c)| c.len() != n) {
            return Err(ProbeError::SeedShape { column, expected: n, found: c.len() });
        }
        let mut atoms = Vec::new();
        for a in w.pattern.atoms() {
            let (name, rel) = match &a.rel {
                AtomRel::Named(name) => {
                    let r = template.relation(name).ok_or_else(|| ProbeError::UnknownRelation(name.clone()))?;
                    (name.clone(), r.clone())
                }
                AtomRel::Inline(r) => (format!("{{{}}}", r.orbit_list().replace(' ', "|")), r.clone()),
                AtomRel::Neq => ("!=".to_string(), Relation::injective(template.universe(), 2)),
                AtomRel::Eq => continue,
            };
            atoms.push((name, rel, a.args.clone()));
        }
        Ok(SeedSet { atoms, columns: w.columns.clone() })
    }

    fn requirements(&self, s: usize, m: usize, offset: usize) -> Vec<(usize, Vec<usize>)> {
        let mut out = Vec::new();
        for seq in itertools::repeat_n(0..self.columns.len(), m).multi_cartesian_product() {
            for (i, (_, _, args)) in self.atoms.iter().enumerate() {
                let rows = args
                    .iter()
                    .map(|&x| row_index(s, &seq.iter().map(|&c| self.columns[c][x]).collect::<Vec<_>>()))
                    .collect();
                out.push((offset + i, rows));
            }
        }
        out
    }
}

struct Outcome {
    step: Step,
    nodes: u64,
    val: Vec<usize>,
    points: usize,
    flags: HashMap<Vec<usize>, bool>,
}

/// Runs a search on a thread of its own: the recursion is one frame per
/// decision, which outgrows the default stack on larger tables.
fn run(p: &Problem<'_>, budget: u64) -> Outcome {
    std::thread::scope(|scope| {
        std::thread::Builder::new()
            .stack_size(256 << 20)
            .spawn_scoped(scope, || {
                let mut s = Search::new(p, budget);
                let step = s.run();
                Outcome { step, nodes: s.nodes, val: s.val, points: s.points, flags: s.flags }
            })
            .expect("spawn search thread")
            .join()
            .expect("search thread")
    })
}

fn signature(template: &Template) -> Vec<(String, Relation)> {
    template.signature().into_iter().map(|(n, r)| (n.to_string(), r.clone())).collect()
}

/// All `m`-column matrices of relation tuples over a domain of size `s`,
/// as requirements over raw rows.
fn full_requirements(tuples: &[Vec<Vec<usize>>], s: usize, m: usize) -> Vec<(usize, Vec<usize>)> {
    let mut out = Vec::new();
    for (i, ts) in tuples.iter().enumerate() {
        let Some(arity) = ts.first().map(Vec::len) else { continue };
        for cols in itertools::repeat_n(ts.iter(), m).multi_cartesian_product() {
            let rows = (0..arity).map(|j| row_index(s, &cols.iter().map(|c| c[j]).collect::<Vec<_>>())).collect();
            out.push((i, rows));
        }
    }
    out
}

fn matrix_count(tuples: &[Vec<Vec<usize>>], m: usize) -> u128 {
    tuples.iter().map(|t| (t.len() as u128).saturating_pow(m as u32)).fold(0u128, u128::saturating_add)
}

fn domain_flags(domain: &Fragment) -> HashMap<Vec<usize>, bool> {
    k_subsets(domain.len(), domain.k()).into_iter().filter_map(|t| domain.flag(&t).map(|b| (t, b))).collect()
}

fn check_domain(domain: &Fragment, rows: u128, budget: u64) -> Result<(), ProbeError> {
    if !domain.is_total() {
        return Err(ProbeError::PartialDomain);
    }
    if rows > budget as u128 {
        return Err(ProbeError::TooLarge { rows, budget });
    }
    Ok(())
}

/// Searches for an operation of arity `m` on the domain points that
/// satisfies the near-unanimity equations and preserves every relation of
/// the template. With seeds, the seed requirements alone are tried first.
pub fn find_local_nu(
    template: &Template,
    domain: &Fragment,
    m: usize,
    budget: u64,
    seeds: Option<&SeedSet>,
) -> Result<ProbeReport, ProbeError> {
    if m < 3 {
        return Err(ProbeError::ArityTooSmall(m));
    }
    let s = domain.len();
    check_domain(domain, (s as u128).saturating_pow(m as u32), budget)?;
    let universe = template.universe();
    let mut report = ProbeReport {
        status: ProbeStatus::NoneExhausted,
        arity: m,
        domain: domain.clone(),
        operation: None,
        nodes: 0,
        transcript: vec![format!("local near-unanimity search s={s} m={m} budget={budget}")],
    };
    let nu_problem = |rels: Vec<Relation>, reqs: Vec<(usize, Vec<usize>)>| {
        let mut p = Problem::new(universe, rels, reqs);
        p.base = s;
        p.base_flags = domain_flags(domain);
        p.forced = p.rows.iter().map(|&r| nu_value(&row_of(s, m, r))).collect();
        p
    };
    if let Some(seeds) = seeds {
        let rels: Vec<Relation> = seeds.atoms.iter().map(|(_, r, _)| r.clone()).collect();
        let p = nu_problem(rels, seeds.requirements(s, m, 0));
        let out = run(&p, budget);
        report.nodes += out.nodes;
        report.transcript.push(format!(
            "seed stage: {} requirements on {} rows, {} nodes, {}",
            p.reqs.len(),
            p.rows.len(),
            out.nodes,
            step_label(out.step)
        ));
        match out.step {
            Step::Fail => {
                report.status = ProbeStatus::NoneComplete;
                report.transcript.push("seed requirements admit no table; none exists for the full problem".into());
                return Ok(report);
            }
            Step::Out => return Ok(report),
            Step::Found => report.transcript.push("seed requirements satisfiable; running the full search".into()),
        }
    }
    let sig = signature(template);
    let tuples: Vec<Vec<Vec<usize>>> = sig.iter().map(|(_, r)| relation_tuples(domain, r)).collect();
    let count = matrix_count(&tuples, m);
    let remaining = budget.saturating_sub(report.nodes);
    if count > remaining as u128 {
        report.transcript.push(format!("full stage skipped: {count} matrices exceed the remaining budget"));
        return Ok(report);
    }
    let mut rels: Vec<Relation> = sig.iter().map(|(_, r)| r.clone()).collect();
    let mut reqs = full_requirements(&tuples, s, m);
    if let Some(seeds) = seeds {
        reqs.extend(seeds.requirements(s, m, rels.len()));
        rels.extend(seeds.atoms.iter().map(|(_, r, _)| r.clone()));
    }
    let p = nu_problem(rels, reqs);
    let out = run(&p, remaining);
    report.nodes += out.nodes;
    report.transcript.push(format!(
        "full stage: {} requirements on {} rows, {} nodes, {}",
        p.reqs.len(),
        p.rows.len(),
        out.nodes,
        step_label(out.step)
    ));
    match out.step {
        Step::Fail => report.status = ProbeStatus::NoneComplete,
        Step::Out => {}
        Step::Found => {
            let raw_to_id: HashMap<usize, usize> = p.rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
            let table: Vec<usize> = (0..s.pow(m as u32))
                .map(|r| {
                    let row = row_of(s, m, r);
                    match raw_to_id.get(&r) {
                        Some(&id) => out.val[id],
                        None => nu_value(&row).unwrap_or(row[0]),
                    }
                })
                .collect();
            let names = domain.names().iter().cloned().chain((1..=out.points - s).map(|i| format!("new{i}")));
            let op = PartialOperation::new(m, domain.clone(), table, output_fragment(domain.k(), names, &out.flags)?)?;
            verify(&op, &sig, template, true, &mut report.transcript)?;
            report.status = ProbeStatus::Found;
            report.operation = Some(op);
        }
    }
    Ok(report)
}

fn output_fragment(
    k: usize,
    names: impl IntoIterator<Item = String>,
    flags: &HashMap<Vec<usize>, bool>,
) -> Result<Fragment, ProbeError> {
    let mut f = Fragment::new(k, names);
    let mut decided: Vec<(&Vec<usize>, &bool)> = flags.iter().collect();
    decided.sort();
    for (key, &b) in decided {
        f.set_flag(key, b)?;
    }
    Ok(f)
}

fn verify(
    op: &PartialOperation,
    sig: &[(String, Relation)],
    template: &Template,
    nu: bool,
    transcript: &mut Vec<String>,
) -> Result<(), ProbeError> {
    for (name, rel) in sig {
        preserves(op, rel, template.universe()).map_err(|v| ProbeError::Unverified(format!("{name}: {v}")))?;
        transcript.push(format!("verified: preserves {name}"));
    }
    if nu {
        check_local_nu_equations(op).map_err(|v| ProbeError::Unverified(v.to_string()))?;
        transcript.push("verified: near-unanimity equations".into());
    }
    Ok(())
}

fn step_label(step: Step) -> &'static str {
    match step {
        Step::Found => "satisfiable",
        Step::Fail => "refuted",
        Step::Out => "budget exhausted",
    }
}

/// Probes every arity in `arities` on a witness set, in parallel, seeded
/// by its columns. Reports come back in the order of `arities`.
pub fn probe_witness(
    template: &Template,
    w: &WitnessSet,
    arities: &[usize],
    budget: u64,
) -> Result<Vec<ProbeReport>, ProbeError> {
    let seeds = SeedSet::from_witness(template, w)?;
    arities.par_iter().map(|&m| find_local_nu(template, &w.fragment, m, budget, Some(&seeds))).collect()
}

/// Probes every injective domain of each size in `sizes` (one per orbit)
/// against every arity, in parallel, in a fixed order.
pub fn probe_domains(
    template: &Template,
    sizes: &[usize],
    arities: &[usize],
    budget: u64,
) -> Result<Vec<ProbeReport>, ProbeError> {
    let jobs: Vec<(Fragment, usize)> = sizes
        .iter()
        .flat_map(|&s| template.universe().enumerate_orbits(s.max(1), true))
        .map(|o| Fragment::from_descriptor(&o))
        .cartesian_product(arities.iter().copied())
        .collect();
    jobs.par_iter().map(|(d, m)| find_local_nu(template, d, *m, budget, None)).collect()
}

/// Searches for a binary operation that is injective on the domain and
/// preserves every template relation. Each row gets its own output point, so
/// only flags are searched.
pub fn find_binary_injection(template: &Template, domain: &Fragment, budget: u64) -> Result<ProbeReport, ProbeError> {
    let s = domain.len();
    check_domain(domain, (s * s) as u128, budget)?;
    let sig = signature(template);
    let tuples: Vec<Vec<Vec<usize>>> = sig.iter().map(|(_, r)| relation_tuples(domain, r)).collect();
    let mut report = ProbeReport {
        status: ProbeStatus::NoneExhausted,
        arity: 2,
        domain: domain.clone(),
        operation: None,
        nodes: 0,
        transcript: vec![format!("binary injection search s={s} budget={budget}")],
    };
    let count = matrix_count(&tuples, 2);
    if count > budget as u128 {
        report.transcript.push(format!("skipped: {count} matrices exceed the budget"));
        return Ok(report);
    }
    let rels = sig.iter().map(|(_, r)| r.clone()).collect();
    let mut p = Problem::new(template.universe(), rels, full_requirements(&tuples, s, 2));
    p.base = s * s;
    p.forced = p.rows.iter().map(|&r| Some(r)).collect();
    p.allow_fresh = false;
    let out = run(&p, budget);
    report.nodes = out.nodes;
    report.transcript.push(format!("{} requirements, {} nodes, {}", p.reqs.len(), out.nodes, step_label(out.step)));
    match out.step {
        Step::Fail => {
            report.status = ProbeStatus::NoneComplete;
            // a requirement with only repeated-free images fails at once:
            // name the first one whose relation has no injective orbit
            if let Some(req) = p.reqs.iter().find(|q| !p.rels[q.rel].iter().any(|o| o.classes() == distinct(&q.rows))) {
                report.transcript.push(format!("injectivity conflict in relation {}", sig[req.rel].0));
            }
        }
        Step::Out => {}
        Step::Found => {
            let dn = domain.names();
            let names = (0..s * s).map(|r| {
                let row = row_of(s, 2, r);
                format!("f({},{})", dn[row[0]], dn[row[1]])
            });
            let op = PartialOperation::new(
                2,
                domain.clone(),
                (0..s * s).collect(),
                output_fragment(domain.k(), names, &out.flags)?,
            )?;
            verify(&op, &sig, template, false, &mut report.transcript)?;
            report.status = ProbeStatus::Found;
            report.operation = Some(op);
        }
    }
    Ok(report)
}

fn distinct(rows: &[usize]) -> usize {
    rows.iter().unique().count()
}

#[cfg(test)]
mod tests;
