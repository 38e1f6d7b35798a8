//! Text syntax: `pp <name> free(x,y) := R(x,y,z) & x != z & exists(z)`.
//!
//! Atoms are `Name(args)`, `{orbit|orbit}(args)` for inline orbit unions,
//! `x = y`, `x != y` and `true`. `exists(...)` only declares quantified
//! variables; any variable not listed in `free(...)` is quantified anyway.

use crate::orbit_algebra::Relation;

use super::formula::{AtomRel, PPFormula};
use super::PpError;

fn err(msg: impl Into<String>) -> PpError {
    PpError::Parse(msg.into())
}

fn ident_ok(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

fn arg_list(s: &str) -> Result<Vec<String>, PpError> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|a| {
            let a = a.trim();
            if ident_ok(a) {
                Ok(a.to_string())
            } else {
                Err(err(format!("bad variable name {a:?}")))
            }
        })
        .collect()
}

/// Splits `head(args)` into head and the argument text.
fn call(s: &str) -> Result<(&str, &str), PpError> {
    let open = s.rfind('(').ok_or_else(|| err(format!("expected '(' in {s:?}")))?;
    if !s.ends_with(')') {
        return Err(err(format!("expected ')' at the end of {s:?}")));
    }
    Ok((s[..open].trim(), &s[open + 1..s.len() - 1]))
}

impl PPFormula {
    /// Parses one formula; `k` is needed to read inline orbit lists.
    pub fn parse(text: &str, k: usize) -> Result<PPFormula, PpError> {
        let text = text.trim();
        let (head, body) = text.split_once(":=").ok_or_else(|| err("missing ':='"))?;
        let mut head = head.trim();
        let mut name = None;
        if let Some(rest) = head.strip_prefix("pp ") {
            let rest = rest.trim_start();
            let split = rest.find(char::is_whitespace).ok_or_else(|| err("expected free(...) after the name"))?;
            name = Some(rest[..split].to_string());
            head = rest[split..].trim();
        }
        let free_text = head
            .strip_prefix("free(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| err(format!("expected free(...), found {head:?}")))?;
        let free_names = arg_list(free_text)?;
        let mut phi = PPFormula::new(free_names.iter().cloned());
        if phi.vars().iter().enumerate().any(|(i, v)| phi.vars()[..i].contains(v)) {
            return Err(err("repeated free variable"));
        }
        let mut bound = Vec::new();
        let lookup = |phi: &mut PPFormula, bound: &mut Vec<usize>, n: &str| -> usize {
            match phi.var(n) {
                Some(i) => i,
                None => {
                    let i = phi.add_var(n);
                    bound.push(i);
                    i
                }
            }
        };
        let mut atoms: Vec<(AtomRel, Vec<usize>)> = Vec::new();
        for part in split_conjuncts(body)? {
            let part = part.trim();
            if part == "true" {
                continue;
            }
            if let Some(rest) = part.strip_prefix("exists(") {
                let names = arg_list(rest.strip_suffix(')').ok_or_else(|| err("unclosed exists("))?)?;
                for n in names {
                    if free_names.contains(&n) {
                        return Err(err(format!("{n} is both free and quantified")));
                    }
                    lookup(&mut phi, &mut bound, &n);
                }
                continue;
            }
            let (op, (l, r)) = if let Some((l, r)) = part.split_once("!=") {
                (AtomRel::Neq, (l, r))
            } else if let Some((l, r)) = part.split_once('=') {
                (AtomRel::Eq, (l, r))
            } else {
                let (head, args) = call(part)?;
                let rel = if let Some(inner) = head.strip_prefix('{').and_then(|h| h.strip_suffix('}')) {
                    let args_n = arg_list(args)?.len();
                    let rel = Relation::parse_orbits(k, args_n, &inner.replace('|', " "))?;
                    AtomRel::Inline(rel)
                } else if ident_ok(head) {
                    AtomRel::Named(head.to_string())
                } else {
                    return Err(err(format!("bad relation name {head:?}")));
                };
                let idx = arg_list(args)?.iter().map(|n| lookup(&mut phi, &mut bound, n)).collect();
                atoms.push((rel, idx));
                continue;
            };
            let (l, r) = (l.trim(), r.trim());
            if !ident_ok(l) || !ident_ok(r) {
                return Err(err(format!("bad (dis)equality {part:?}")));
            }
            let idx = vec![lookup(&mut phi, &mut bound, l), lookup(&mut phi, &mut bound, r)];
            atoms.push((op, idx));
        }
        let free: Vec<usize> = (0..free_names.len()).collect();
        let mut phi = phi.with_free(free)?;
        for (rel, args) in atoms {
            phi.push(rel, args);
        }
        Ok(match name {
            Some(n) => phi.named(n),
            None => phi,
        })
    }
}

fn split_conjuncts(body: &str) -> Result<Vec<&str>, PpError> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in body.char_indices() {
        match c {
            '(' | '{' => depth += 1,
            ')' | '}' => depth -= 1,
            '&' if depth == 0 => {
                out.push(&body[start..i]);
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(err("unbalanced brackets"));
        }
    }
    if depth != 0 {
        return Err(err("unbalanced brackets"));
    }
    out.push(&body[start..]);
    if out.iter().any(|p| p.trim().is_empty()) {
        return Err(err("empty conjunct"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let src = "pp phi free(x,y) := E(x,y,z) & x != z & {012:1|012:0}(y,x,z) & exists(z)";
        let phi = PPFormula::parse(src, 3).unwrap();
        assert_eq!(phi.free_count(), 2);
        assert_eq!(phi.var_count(), 3);
        assert_eq!(phi.atoms().len(), 3);
        let again = PPFormula::parse(&phi.to_string(), 3).unwrap();
        assert_eq!(phi, again);
    }

    #[test]
    fn unnamed_and_true() {
        let phi = PPFormula::parse("free(a,b) := true", 3).unwrap();
        assert_eq!(phi.atoms().len(), 0);
        assert_eq!(phi.to_string(), "pp phi free(a,b) := true");
        let phi = PPFormula::parse("free(a) := a = b", 3).unwrap();
        assert_eq!(phi.var_count(), 2);
        assert!(!phi.is_free(1));
    }

    #[test]
    fn errors() {
        for bad in [
            "pp f free(x) E(x)",
            "pp f free(x) := E(x",
            "pp f free(x) := & E(x)",
            "pp f free(x) := exists(x)",
            "pp f free(x,x) := true",
            "pp f free(x) := {0x}(x)",
        ] {
            assert!(PPFormula::parse(bad, 3).is_err(), "{bad}");
        }
    }
}
