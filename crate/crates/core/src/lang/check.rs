//! Clause checks: pairwise overlap and exhaustiveness over the declared
//! constructors (usefulness of a wildcard row).

use super::ast::*;
use super::pretty::pattern_atom;
use crate::error::{Error, Result};

pub fn check_program(prog: &Program, require_exhaustive: bool) -> Result<()> {
    let mut defs: Vec<&FunDef> = prog.defs.iter().collect();
    collect_local_defs(&prog.main, &mut defs);
    for d in &prog.defs {
        for c in &d.clauses {
            collect_local_defs(&c.body, &mut defs);
        }
    }
    for d in defs {
        check_def(prog, d, require_exhaustive)?;
    }
    Ok(())
}

fn collect_local_defs<'a>(e: &'a Expr, out: &mut Vec<&'a FunDef>) {
    e.walk(&mut |sub| {
        if let Expr::Where(_, defs) = sub {
            out.extend(defs.iter());
        }
    });
}

pub fn check_def(prog: &Program, d: &FunDef, require_exhaustive: bool) -> Result<()> {
    for (i, a) in d.clauses.iter().enumerate() {
        for (j, b) in d.clauses.iter().enumerate().skip(i + 1) {
            if a.params.iter().zip(&b.params).all(|(p, q)| unifiable(p, q)) {
                return Err(Error::Overlap {
                    fun: d.name.clone(),
                    detail: format!("clauses {} and {} can match the same arguments", i + 1, j + 1),
                });
            }
        }
    }
    if require_exhaustive {
        let rows: Vec<Vec<Pattern>> = d.clauses.iter().map(|c| c.params.clone()).collect();
        if let Some(w) = missing(prog, &rows, d.arity()) {
            let shown: Vec<String> = w.iter().map(pattern_atom).collect();
            return Err(Error::NonExhaustive { fun: d.name.clone(), missing: shown.join(" ") });
        }
    }
    Ok(())
}

fn unifiable(p: &Pattern, q: &Pattern) -> bool {
    match (p, q) {
        (Pattern::Var(_), _) | (_, Pattern::Var(_)) => true,
        (Pattern::Con(c, ps), Pattern::Con(d, qs)) => c == d && ps.iter().zip(qs).all(|(a, b)| unifiable(a, b)),
    }
}

fn wild() -> Pattern {
    Pattern::Var("_".into())
}

/// A witness argument vector matched by no row, if one exists.
pub fn missing(prog: &Program, rows: &[Vec<Pattern>], width: usize) -> Option<Vec<Pattern>> {
    if width == 0 {
        return if rows.is_empty() { Some(vec![]) } else { None };
    }
    let mut heads: Vec<&Name> = Vec::new();
    for r in rows {
        if let Pattern::Con(c, _) = &r[0] {
            if !heads.contains(&c) {
                heads.push(c);
            }
        }
    }
    let siblings = heads.first().and_then(|c| prog.siblings(c)).unwrap_or_default();
    let complete = !heads.is_empty() && siblings.iter().all(|(s, _)| heads.contains(&s));
    if complete {
        for (c, arity) in &siblings {
            let spec: Vec<Vec<Pattern>> = rows.iter().filter_map(|r| specialize(r, c, *arity)).collect();
            if let Some(w) = missing(prog, &spec, width - 1 + arity) {
                let mut out = vec![Pattern::Con(c.clone(), w[..*arity].to_vec())];
                out.extend_from_slice(&w[*arity..]);
                return Some(out);
            }
        }
        None
    } else {
        let default: Vec<Vec<Pattern>> = rows.iter().filter(|r| r[0].is_var()).map(|r| r[1..].to_vec()).collect();
        let w = missing(prog, &default, width - 1)?;
        let head = match siblings.iter().find(|(s, _)| !heads.contains(&s)) {
            Some((c, arity)) => Pattern::Con(c.clone(), vec![wild(); *arity]),
            None => wild(),
        };
        let mut out = vec![head];
        out.extend(w);
        Some(out)
    }
}

fn specialize(row: &[Pattern], c: &str, arity: usize) -> Option<Vec<Pattern>> {
    match &row[0] {
        Pattern::Con(d, ps) if d == c => {
            let mut out = ps.clone();
            out.extend_from_slice(&row[1..]);
            Some(out)
        }
        Pattern::Con(..) => None,
        Pattern::Var(_) => {
            let mut out = vec![wild(); arity];
            out.extend_from_slice(&row[1..]);
            Some(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::lang::parse_program;
    use crate::Error;

    #[test]
    fn rejects_overlapping_clauses() {
        let src = "f [] ys = ys;; f xs [] = xs;; f (x:xs) (y:ys) = ys;; main = f [] [];;";
        assert!(matches!(parse_program(src), Err(Error::Overlap { .. })));
    }

    #[test]
    fn rejects_missing_case_with_witness() {
        let src = "data T ::= A | B | C;; f A = 1;; f B = 2;; main = f A;;";
        match parse_program(src) {
            Err(Error::NonExhaustive { fun, missing }) => {
                assert_eq!(fun, "f");
                assert_eq!(missing, "C");
            }
            other => panic!("unexpected {other:?}"),
        }
        let src = "f [] [] = 0;; f (x:xs) ys = 1;; main = f [] [];;";
        match parse_program(src) {
            Err(Error::NonExhaustive { missing, .. }) => assert_eq!(missing, "[] (_ : _)"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn accepts_nested_exhaustive_patterns() {
        let src = "g [] = 0;; g [x] = x;; g (x : y : zs) = y;; main = g [];;";
        parse_program(src).unwrap();
    }
}
