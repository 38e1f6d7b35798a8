//! Instance files.
//!
//! ```text
//! var x y z w
//! constraint (x,y,z) allow E | allow N
//! constraint (y,z,w) {012:1|001}
//! constraint (x,w) neq
//! level 3 4
//! ```
//!
//! Alternatives separated by `|` are unioned. `eq` and `neq` are binary.
//! `level` restores a minimality stamp and is written only for stamped
//! instances. `#` starts a comment.

use std::fmt::Write as _;

use crate::orbit_algebra::{OrbitDescriptor, Relation};
use crate::template::Template;

use super::instance::{Constraint, Instance};
use super::MinError;

fn perr(line: usize, msg: impl Into<String>) -> MinError {
    MinError::Parse { line, msg: msg.into() }
}

/// Splits on `|` outside braces.
fn alternatives(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '{' => depth += 1,
            '}' => depth -= 1,
            '|' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

impl Instance {
    pub fn parse(text: &str, template: &Template) -> Result<Instance, MinError> {
        let k = template.k();
        let universe = template.universe();
        let mut vars: Vec<String> = Vec::new();
        let mut pending: Vec<(usize, Vec<String>, Relation)> = Vec::new();
        let mut level = None;
        for (no, raw) in text.lines().enumerate() {
            let line_no = no + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            match head {
                "var" => {
                    for v in rest.split_whitespace() {
                        if vars.iter().any(|x| x == v) {
                            return Err(perr(line_no, format!("variable {v} declared twice")));
                        }
                        vars.push(v.to_string());
                    }
                }
                "level" => {
                    let nums: Vec<usize> = rest
                        .split_whitespace()
                        .map(|t| t.parse().map_err(|_| perr(line_no, format!("bad number {t:?}"))))
                        .collect::<Result<_, _>>()?;
                    let [kk, ell] = nums[..] else { return Err(perr(line_no, "level takes k and l")) };
                    level = Some((kk, ell));
                }
                "constraint" => {
                    let rest = rest.strip_prefix('(').ok_or_else(|| perr(line_no, "expected (scope)"))?;
                    let (scope, body) = rest.split_once(')').ok_or_else(|| perr(line_no, "unclosed scope"))?;
                    let scope: Vec<String> = scope.split(',').map(|s| s.trim().to_string()).collect();
                    let arity = scope.len();
                    let mut rel = Relation::empty(arity);
                    for alt in alternatives(body.trim()) {
                        let alt = alt.trim();
                        let part = if let Some(inner) = alt.strip_prefix('{').and_then(|a| a.strip_suffix('}')) {
                            let r = Relation::parse_orbits(k, arity, &inner.replace('|', " "))
                                .map_err(|e| perr(line_no, e.to_string()))?;
                            if let Some(o) = r.iter().find(|o| !universe.realizable_descriptor(o)) {
                                return Err(perr(line_no, format!("orbit {o} is not realizable")));
                            }
                            r
                        } else if alt == "neq" || alt == "eq" {
                            if arity != 2 {
                                return Err(perr(line_no, format!("{alt} needs two variables")));
                            }
                            if alt == "neq" {
                                Relation::injective(universe, 2)
                            } else {
                                Relation::singleton(OrbitDescriptor::constant(k, 2))
                            }
                        } else if let Some(name) = alt.strip_prefix("allow ") {
                            let name = name.trim();
                            let r = template
                                .relation(name)
                                .ok_or_else(|| perr(line_no, format!("unknown relation {name}")))?;
                            if r.arity() != arity {
                                return Err(perr(line_no, format!("{name} has arity {}", r.arity())));
                            }
                            r.clone()
                        } else {
                            return Err(perr(line_no, format!("cannot read {alt:?}")));
                        };
                        rel = rel.union(&part)?;
                    }
                    pending.push((line_no, scope, rel));
                }
                other => return Err(perr(line_no, format!("unknown directive {other:?}"))),
            }
        }
        let mut inst = Instance::new(k, vars);
        for (line_no, scope, rel) in pending {
            let idx = scope
                .iter()
                .map(|v| inst.var(v).ok_or_else(|| perr(line_no, format!("undeclared variable {v}"))))
                .collect::<Result<Vec<_>, _>>()?;
            let c = Constraint::new(idx, rel).map_err(|e| perr(line_no, e.to_string()))?;
            inst.push(c)?;
        }
        inst.set_level(level);
        Ok(inst)
    }

    /// Canonical text: one `var` line, constraints in order with inline
    /// orbit lists, then the stamp if any. Equal instances print equally.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "var {}", self.vars().join(" "));
        for c in self.constraints() {
            let scope: Vec<&str> = c.scope().iter().map(|&v| self.vars()[v].as_str()).collect();
            let orbits: Vec<String> = c.allowed().iter().map(|o| o.to_string()).collect();
            let _ = writeln!(out, "constraint ({}) {{{}}}", scope.join(","), orbits.join("|"));
        }
        if let Some((k, ell)) = self.level() {
            let _ = writeln!(out, "level {k} {ell}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit_algebra::Universe;

    #[test]
    fn parse_and_round_trip() {
        let t = Template::plain(Universe::hypergraph(3));
        let src = "# demo\nvar x y z w\nconstraint (x,y,z) allow E | allow N\nconstraint (y,z,w) {012:1|001}\nconstraint (x,w) neq\n";
        let inst = Instance::parse(src, &t).unwrap();
        assert_eq!(inst.var_count(), 4);
        assert_eq!(inst.constraints()[0].allowed().len(), 2);
        assert_eq!(inst.constraints()[1].allowed().len(), 2);
        let again = Instance::parse(&inst.to_text(), &t).unwrap();
        assert_eq!(inst, again);
        let m = crate::minimality_engine::kl_minimalize(&inst, t.universe(), 3, 4).unwrap();
        assert_eq!(Instance::parse(&m.to_text(), &t).unwrap(), m);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let t = Template::plain(Universe::hypergraph(3));
        for (src, line) in [
            ("var x\nconstraint (x,y) neq", 2),
            ("var x y z\nconstraint (x,y,z) allow Q", 2),
            ("var x y\n\nconstraint (x,y) allow E", 3),
            ("var x x", 1),
            ("bogus", 1),
            ("var x y z\nconstraint (x,y,z) {012:1:0}", 2),
        ] {
            match Instance::parse(src, &t) {
                Err(MinError::Parse { line: l, .. }) => assert_eq!(l, line, "{src}"),
                other => panic!("{src}: {other:?}"),
            }
        }
    }
}
