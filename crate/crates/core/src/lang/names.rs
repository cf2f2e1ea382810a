//! Fresh name supply. Generated names carry a `#k` suffix, which user
//! programs cannot write unless the file carries the generated pragma.

use std::collections::HashSet;

use super::ast::{Expr, FunDef, Name, Pattern, Program};

/// Name without its generated `#k` suffix.
pub fn base_name(name: &str) -> &str {
    name.split('#').next().unwrap_or(name)
}

/// Returns `base#k` for the smallest `k >= 1` rejected by `taken`.
pub fn fresh_avoiding(base: &str, taken: impl Fn(&str) -> bool) -> Name {
    let base = base_name(base);
    (1..).map(|k| format!("{base}#{k}")).find(|n| !taken(n)).expect("unbounded range")
}

/// `base` itself when `taken` accepts it, otherwise a fresh variant.
pub fn prefer_avoiding(base: &str, taken: impl Fn(&str) -> bool) -> Name {
    if taken(base) {
        fresh_avoiding(base, taken)
    } else {
        base.to_string()
    }
}

#[derive(Debug, Default, Clone)]
pub struct NameGen {
    used: HashSet<Name>,
}

impl NameGen {
    pub fn new() -> NameGen {
        NameGen::default()
    }

    /// A supply that avoids every identifier already occurring in `prog`.
    pub fn for_program(prog: &Program) -> NameGen {
        let mut g = NameGen::new();
        g.used.extend(prog.main_params.iter().cloned());
        g.add_expr(&prog.main);
        for d in &prog.defs {
            g.add_def(d);
        }
        for t in &prog.types {
            g.used.insert(t.name.clone());
            for c in &t.ctors {
                g.used.insert(c.name.clone());
            }
        }
        g
    }

    pub fn reserve(&mut self, name: impl Into<Name>) {
        self.used.insert(name.into());
    }

    pub fn is_used(&self, name: &str) -> bool {
        self.used.contains(name)
    }

    pub fn fresh(&mut self, base: &str) -> Name {
        let n = fresh_avoiding(base, |n| self.used.contains(n));
        self.used.insert(n.clone());
        n
    }

    /// `base` itself when unused, otherwise a fresh variant.
    pub fn prefer(&mut self, base: &str) -> Name {
        if self.used.insert(base.to_string()) {
            base.to_string()
        } else {
            self.fresh(base)
        }
    }

    pub fn add_def(&mut self, d: &FunDef) {
        self.used.insert(d.name.clone());
        for c in &d.clauses {
            for p in &c.params {
                self.add_pattern(p);
            }
            self.add_expr(&c.body);
        }
    }

    fn add_pattern(&mut self, p: &Pattern) {
        self.used.extend(p.vars());
    }

    pub fn add_expr(&mut self, e: &Expr) {
        match e {
            Expr::Var(x) | Expr::Fun(x) => {
                self.used.insert(x.clone());
            }
            Expr::Int(_) => {}
            Expr::Con(_, args) => args.iter().for_each(|a| self.add_expr(a)),
            Expr::App(f, a) => {
                self.add_expr(f);
                self.add_expr(a);
            }
            Expr::Let(bs, body) => {
                for (x, rhs) in bs {
                    self.used.insert(x.clone());
                    self.add_expr(rhs);
                }
                self.add_expr(body);
            }
            Expr::Lam(x, body) => {
                self.used.insert(x.clone());
                self.add_expr(body);
            }
            Expr::Where(body, defs) => {
                self.add_expr(body);
                defs.iter().for_each(|d| self.add_def(d));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_skips_used() {
        let mut g = NameGen::new();
        g.reserve("x#1");
        assert_eq!(g.fresh("x"), "x#2");
        assert_eq!(g.fresh("x#2"), "x#3");
        assert_eq!(g.prefer("y"), "y");
        assert_eq!(g.prefer("y"), "y#1");
    }
}
