//! Validation of the distilled-form restrictions: function applications
//! take variables as arguments, and variables introduced by `let` are never
//! passed where the callee pattern-matches.

use std::collections::BTreeSet;
use std::fmt;

use super::ast::*;
use super::prelude;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// `main` or `f/k` for clause `k` (1-based) of `f`.
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Argument positions of `def` where some clause has a constructor pattern.
pub fn matched_positions(def: &FunDef) -> Vec<usize> {
    (0..def.arity()).filter(|&i| def.clauses.iter().any(|c| !c.params[i].is_var())).collect()
}

struct Validator<'p> {
    prog: &'p Program,
    location: String,
    out: Vec<Violation>,
}

pub fn validate_distilled(prog: &Program) -> Report {
    let mut v = Validator { prog, location: "main".into(), out: Vec::new() };
    v.expr(&prog.main, &BTreeSet::new());
    for d in &prog.defs {
        for (k, c) in d.clauses.iter().enumerate() {
            v.location = format!("{}/{}", d.name, k + 1);
            v.expr(&c.body, &BTreeSet::new());
        }
    }
    Report { violations: v.out }
}

impl<'p> Validator<'p> {
    fn report(&mut self, message: String) {
        self.out.push(Violation { location: self.location.clone(), message });
    }

    fn def(&self, name: &str) -> Option<&'p FunDef> {
        self.prog.def(name).or_else(|| prelude::lookup(name))
    }

    fn expr(&mut self, e: &Expr, rho: &BTreeSet<Name>) {
        match e {
            Expr::Var(_) | Expr::Int(_) | Expr::Fun(_) => {}
            Expr::Con(_, args) => args.iter().for_each(|a| self.expr(a, rho)),
            Expr::Lam(_, body) => self.expr(body, rho),
            Expr::Let(binds, body) => {
                for (_, r) in binds {
                    self.expr(r, rho);
                }
                let mut inner = rho.clone();
                inner.extend(binds.iter().map(|(x, _)| x.clone()));
                self.expr(body, &inner);
            }
            Expr::Where(body, defs) => {
                self.expr(body, rho);
                for d in defs {
                    for c in &d.clauses {
                        self.expr(&c.body, rho);
                    }
                }
            }
            Expr::App(..) => {
                let (head, args) = e.spine();
                match head {
                    Expr::Fun(f) if prelude::PRIMITIVES.contains(&f.as_str()) => {
                        args.iter().for_each(|a| self.expr(a, rho));
                    }
                    Expr::Fun(f) => {
                        let matched = self.def(f).map(matched_positions).unwrap_or_default();
                        for (i, a) in args.iter().enumerate() {
                            match a {
                                Expr::Var(x) => {
                                    if rho.contains(x) && matched.contains(&i) {
                                        self.report(format!(
                                            "let-bound variable `{x}` is pattern-matched by `{f}` (argument {})",
                                            i + 1
                                        ));
                                    }
                                }
                                other => {
                                    self.report(format!("argument {} of `{f}` is not a variable: {other}", i + 1));
                                    self.expr(other, rho);
                                }
                            }
                        }
                    }
                    Expr::Var(_) => args.iter().for_each(|a| self.expr(a, rho)),
                    other => {
                        self.report(format!("application of a non-variable head: {other}"));
                        self.expr(other, rho);
                        args.iter().for_each(|a| self.expr(a, rho));
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    #[test]
    fn flags_matching_on_let_bound_variable() {
        let p = parse_program("hd [] = 0;; hd (x : xs) = x;; main ys = let v = ys in hd v;;").unwrap();
        let r = validate_distilled(&p);
        assert_eq!(r.violations.len(), 1);
        assert!(r.violations[0].message.contains("`v`"), "{}", r.violations[0]);
    }

    #[test]
    fn flags_non_variable_arguments() {
        let p = parse_program("hd [] = 0;; hd (x : xs) = x;; main ys = hd (hd ys);;").unwrap();
        assert!(!validate_distilled(&p).is_valid());
    }

    #[test]
    fn accepts_let_bound_functions_in_plain_positions() {
        let p =
            parse_program("f [] v = 0;; f (x : xs) v = v x + f xs v;; main ys = let v = \\a. a in f ys v;;").unwrap();
        assert!(validate_distilled(&p).is_valid());
    }
}
