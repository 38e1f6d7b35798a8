//! Text files for universes, templates and fragments. Instances have their
//! own reader in the minimality engine. `#` starts a comment everywhere.
//!
//! Universe:
//! ```text
//! universe k3free k=2
//! bound 3 : 0,1 | 0,2 | 1,2
//! ```
//!
//! Template (the universe is a built-in name, or `file` when supplied by the
//! caller):
//! ```text
//! template demo universe=hypergraph3
//! relation R 3 : 000 001 011
//! relation S := free(x,y) := E(x,y,z) & exists(z)
//! ```
//! A `:=` relation is the relation its formula defines over the relations
//! declared above it.
//!
//! Fragment (flags not listed stay undecided unless `complete` is given):
//! ```text
//! points a b c d
//! edge a b c
//! nonedge a b d
//! complete
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use crate::orbit_algebra::combinatorics::k_subsets;
use crate::orbit_algebra::{Bound, Fragment, OrbitError, Relation, Universe};
use crate::pp_engine::{Evaluator, PPFormula, PpError};
use crate::template::Template;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("unknown universe {0:?}")]
    UnknownUniverse(String),
    #[error("template declares universe {declared} but {given} was supplied")]
    UniverseMismatch { declared: String, given: String },
    #[error("missing {0} line")]
    Missing(&'static str),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
}

fn lerr(line: usize, msg: impl ToString) -> FormatError {
    FormatError::Line { line, msg: msg.to_string() }
}

/// Non-empty lines with comments stripped, numbered from 1.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn split_head(line: &str) -> (&str, &str) {
    let (h, r) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
    (h, r.trim())
}

/// A built-in universe name or the text of a universe file.
pub fn resolve_universe(spec: &str) -> Result<Universe, FormatError> {
    Universe::builtin(spec).ok_or_else(|| FormatError::UnknownUniverse(spec.to_string()))
}

pub fn parse_universe(text: &str) -> Result<Universe, FormatError> {
    let mut header: Option<(String, usize)> = None;
    let mut bounds = Vec::new();
    for (no, line) in lines(text) {
        let (head, rest) = split_head(line);
        match head {
            "universe" => {
                let (name, kk) = rest.split_once(char::is_whitespace).ok_or_else(|| lerr(no, "expected name k=K"))?;
                let k = kk
                    .trim()
                    .strip_prefix("k=")
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| lerr(no, format!("bad arity {kk:?}")))?;
                header = Some((name.to_string(), k));
            }
            "bound" => {
                let (size, edges) = rest.split_once(':').unwrap_or((rest, ""));
                let size: usize = size.trim().parse().map_err(|_| lerr(no, format!("bad size {size:?}")))?;
                let mut es = Vec::new();
                for e in edges.split('|').map(str::trim).filter(|e| !e.is_empty()) {
                    let pts = e
                        .split(',')
                        .map(|p| p.trim().parse::<usize>().map_err(|_| lerr(no, format!("bad point {p:?}"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    es.push(pts);
                }
                bounds.push(Bound::new(size, es));
            }
            other => return Err(lerr(no, format!("unknown directive {other:?}"))),
        }
    }
    let (name, k) = header.ok_or(FormatError::Missing("universe"))?;
    Ok(Universe::new(name, k, bounds)?)
}

pub fn universe_to_text(u: &Universe) -> String {
    let mut out = format!("universe {} k={}\n", u.name(), u.k());
    for b in u.bounds() {
        let edges: Vec<String> =
            b.edges.iter().map(|e| e.iter().map(usize::to_string).collect::<Vec<_>>().join(",")).collect();
        let _ = writeln!(out, "bound {} : {}", b.size, edges.join(" | "));
    }
    out
}

/// Reads a template. `universe` replaces the one named in the file; the file
/// may then name it or say `universe=file`.
pub fn parse_template(text: &str, universe: Option<&Universe>) -> Result<Template, FormatError> {
    let mut template: Option<Template> = None;
    for (no, line) in lines(text) {
        let (head, rest) = split_head(line);
        match head {
            "template" => {
                let (name, u) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                let declared = u.trim().strip_prefix("universe=").ok_or_else(|| lerr(no, "expected universe=NAME"))?;
                let u = match universe {
                    Some(given) if declared == "file" || declared == given.name() => given.clone(),
                    Some(given) => {
                        return Err(FormatError::UniverseMismatch {
                            declared: declared.to_string(),
                            given: given.name().to_string(),
                        })
                    }
                    None => resolve_universe(declared)?,
                };
                template = Some(Template::new(name, u));
            }
            "relation" => {
                let t = template.as_mut().ok_or_else(|| lerr(no, "relation before the template line"))?;
                if let Some((name, def)) = rest.split_once(":=") {
                    let phi = PPFormula::parse(def.trim(), t.k()).map_err(|e| lerr(no, e))?;
                    let rel = defined_relation(t, &phi).map_err(|e| lerr(no, e))?;
                    t.insert(name.trim(), rel);
                    continue;
                }
                let (decl, orbits) = rest.split_once(':').ok_or_else(|| lerr(no, "expected NAME ARITY : orbits"))?;
                let (name, arity) = split_head(decl.trim());
                let arity: usize = arity.parse().map_err(|_| lerr(no, format!("bad arity {arity:?}")))?;
                let rel = Relation::parse_orbits(t.k(), arity, orbits.trim()).map_err(|e| lerr(no, e))?;
                if let Some(o) = rel.iter().find(|o| !t.universe().realizable_descriptor(o)) {
                    return Err(lerr(no, format!("orbit {o} is not realizable")));
                }
                t.insert(name, rel);
            }
            other => return Err(lerr(no, format!("unknown directive {other:?}"))),
        }
    }
    template.ok_or(FormatError::Missing("template"))
}

fn defined_relation(t: &Template, phi: &PPFormula) -> Result<Relation, PpError> {
    phi.check(t)?;
    Ok(Evaluator::new(t).evaluate(phi)?.relation)
}

/// The declared relations as orbit lists; reads back to an equal template.
pub fn template_to_text(t: &Template) -> String {
    t.to_string()
}

pub fn parse_fragment(text: &str, k: usize) -> Result<Fragment, FormatError> {
    let mut frag: Option<Fragment> = None;
    let mut complete = false;
    for (no, line) in lines(text) {
        let (head, rest) = split_head(line);
        match head {
            "points" => {
                let names: Vec<&str> = rest.split_whitespace().collect();
                if names.iter().enumerate().any(|(i, n)| names[..i].contains(n)) {
                    return Err(lerr(no, "repeated point name"));
                }
                frag = Some(Fragment::new(k, names));
            }
            "edge" | "nonedge" => {
                let f = frag.as_mut().ok_or_else(|| lerr(no, "flag before the points line"))?;
                let pts = rest
                    .split_whitespace()
                    .map(|n| f.point(n).ok_or_else(|| lerr(no, format!("unknown point {n}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                f.set_flag(&pts, head == "edge").map_err(|e| lerr(no, e))?;
            }
            "complete" => complete = true,
            other => return Err(lerr(no, format!("unknown directive {other:?}"))),
        }
    }
    let mut f = frag.ok_or(FormatError::Missing("points"))?;
    if complete {
        for s in k_subsets(f.len(), k) {
            if f.flag(&s).is_none() {
                f.set_flag(&s, false)?;
            }
        }
    }
    Ok(f)
}

/// Total fragments list their edges and `complete`; partial ones also list
/// decided non-edges.
pub fn fragment_to_text(f: &Fragment) -> String {
    let names = f.names();
    let join = |s: &[usize]| s.iter().map(|&p| names[p].as_str()).collect::<Vec<_>>().join(" ");
    let mut out = format!("points {}\n", names.join(" "));
    let total = f.is_total();
    for s in k_subsets(f.len(), f.k()) {
        match f.flag(&s) {
            Some(true) => {
                let _ = writeln!(out, "edge {}", join(&s));
            }
            Some(false) if !total => {
                let _ = writeln!(out, "nonedge {}", join(&s));
            }
            _ => {}
        }
    }
    if total {
        out.push_str("complete\n");
    }
    out
}

/// An implication to be checked: formula, tuples and the relations `C`, `D`.
///
/// ```text
/// formula free(a,b,c,d) := P(a,b,c,d)
/// u a b c
/// v d b c
/// source 012:1
/// target 012:1
/// ```
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImplicationSpec {
    pub formula: PPFormula,
    pub u: Vec<usize>,
    pub v: Vec<usize>,
    pub c: Relation,
    pub d: Relation,
}

fn var_tuple(phi: &PPFormula, names: &str, line: usize) -> Result<Vec<usize>, FormatError> {
    names
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|n| !n.is_empty())
        .map(|n| phi.var(n).ok_or_else(|| lerr(line, format!("unknown variable {n}"))))
        .collect()
}

pub fn parse_implication(text: &str, k: usize) -> Result<ImplicationSpec, FormatError> {
    let mut formula = None;
    let (mut u, mut v, mut c, mut d) = (None, None, None, None);
    for (no, line) in lines(text) {
        let (head, rest) = split_head(line);
        match head {
            "formula" => formula = Some(PPFormula::parse(rest, k).map_err(|e| lerr(no, e))?),
            "u" | "v" => {
                let phi = formula.as_ref().ok_or_else(|| lerr(no, "tuple before the formula line"))?;
                let t = var_tuple(phi, rest, no)?;
                if head == "u" {
                    u = Some(t);
                } else {
                    v = Some(t);
                }
            }
            "source" | "target" => {
                let arity = if head == "source" { u.as_ref() } else { v.as_ref() }
                    .ok_or_else(|| lerr(no, format!("{head} before its tuple")))?
                    .len();
                let rel = Relation::parse_orbits(k, arity, rest).map_err(|e| lerr(no, e))?;
                if head == "source" {
                    c = Some(rel);
                } else {
                    d = Some(rel);
                }
            }
            other => return Err(lerr(no, format!("unknown directive {other:?}"))),
        }
    }
    Ok(ImplicationSpec {
        formula: formula.ok_or(FormatError::Missing("formula"))?,
        u: u.ok_or(FormatError::Missing("u"))?,
        v: v.ok_or(FormatError::Missing("v"))?,
        c: c.ok_or(FormatError::Missing("source"))?,
        d: d.ok_or(FormatError::Missing("target"))?,
    })
}

pub fn implication_to_text(phi: &PPFormula, u: &[usize], v: &[usize], c: &Relation, d: &Relation) -> String {
    let names = |t: &[usize]| t.iter().map(|&x| phi.vars()[x].as_str()).collect::<Vec<_>>().join(" ");
    format!("formula {phi}\nu {}\nv {}\nsource {}\ntarget {}\n", names(u), names(v), c.orbit_list(), d.orbit_list())
}

/// One arc of an exported implication graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DotArc {
    pub spec: ImplicationSpec,
    /// projections of the source and target vertices
    pub c1: Relation,
    pub d1: Relation,
}

fn attr<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let start = line.find(&format!("{key}=\""))? + key.len() + 2;
    let len = line[start..].find('"')?;
    Some(&line[start..start + len])
}

/// `({c1 orbits},{c orbits})` as written by the graph export.
fn vertex_label(label: &str, k: usize, arity: usize) -> Result<(Relation, Relation), String> {
    let inner = label.strip_prefix("({").and_then(|l| l.strip_suffix("})")).ok_or("malformed vertex label")?;
    let (a, b) = inner.split_once("},{").ok_or("malformed vertex label")?;
    let parse = |s: &str| Relation::parse_orbits(k, arity, s).map_err(|e| e.to_string());
    Ok((parse(a)?, parse(b)?))
}

/// Reads back the arcs of an implication graph DOT export.
pub fn parse_graph_dot(text: &str, k: usize) -> Result<Vec<DotArc>, FormatError> {
    let mut labels: std::collections::HashMap<String, String> = std::collections::HashMap::new();
    let mut arcs = Vec::new();
    for (no, line) in lines(text) {
        if let Some((from, rest)) = line.split_once(" -> ") {
            let to = rest.split_whitespace().next().ok_or_else(|| lerr(no, "missing arc target"))?;
            let get = |key| attr(line, key).ok_or_else(|| lerr(no, format!("arc without {key}")));
            let formula = PPFormula::parse(get("formula")?, k).map_err(|e| lerr(no, e))?;
            let u = var_tuple(&formula, get("u")?, no)?;
            let v = var_tuple(&formula, get("v")?, no)?;
            let label = |name: &str| labels.get(name.trim()).ok_or_else(|| lerr(no, format!("unknown vertex {name}")));
            let (c1, c) = vertex_label(label(from)?, k, u.len()).map_err(|e| lerr(no, e))?;
            let (d1, d) = vertex_label(label(to)?, k, v.len()).map_err(|e| lerr(no, e))?;
            arcs.push(DotArc { spec: ImplicationSpec { formula, u, v, c, d }, c1, d1 });
        } else if let Some(l) = attr(line, "label") {
            let name = line.split_whitespace().next().unwrap_or("");
            labels.insert(name.to_string(), l.to_string());
        }
    }
    Ok(arcs)
}
