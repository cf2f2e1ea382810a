//! Name resolution: decides between variables and function references,
//! reports unbound names and renames shadowing binders to `name#k`.

use std::collections::HashSet;

use super::ast::*;
use super::names::NameGen;
use super::prelude;
use crate::error::{Error, Result};

#[derive(Clone)]
enum Entry {
    Var(Name, Name),
    Fun(Name, Name),
}

struct Resolver {
    globals: HashSet<Name>,
    scope: Vec<Entry>,
    gen: NameGen,
}

pub fn resolve_program(prog: Program, with_prelude: bool) -> Result<Program> {
    let mut globals: HashSet<Name> = prelude::PRIMITIVES.iter().map(|s| s.to_string()).collect();
    if with_prelude {
        globals.extend(prelude::prelude_names());
    }
    for d in &prog.defs {
        if globals.contains(&d.name) {
            return Err(Error::invalid(format!("`{}` is a builtin and cannot be redefined", d.name)));
        }
    }
    globals.extend(prog.defs.iter().map(|d| d.name.clone()));
    let mut r = Resolver { globals, scope: Vec::new(), gen: NameGen::for_program(&prog) };

    let mark = r.scope.len();
    let mut main_params = Vec::new();
    let mut seen = HashSet::new();
    for x in &prog.main_params {
        if !seen.insert(x.clone()) {
            return Err(Error::invalid(format!("duplicate parameter `{x}` of `main`")));
        }
        main_params.push(r.bind_var(x));
    }
    let main = r.expr(prog.main)?;
    r.scope.truncate(mark);

    let defs = prog.defs.into_iter().map(|d| r.def(d, |n| n.to_string())).collect::<Result<Vec<_>>>()?;
    Ok(Program { types: prog.types, sigs: prog.sigs, main_params, main, defs })
}

/// Resolves a closed expression against the functions of `prog`.
pub fn resolve_expr(prog: &Program, e: Expr) -> Result<Expr> {
    let mut globals: HashSet<Name> = prelude::PRIMITIVES.iter().map(|s| s.to_string()).collect();
    globals.extend(prelude::prelude_names());
    globals.extend(prog.defs.iter().map(|d| d.name.clone()));
    let mut gen = NameGen::for_program(prog);
    gen.add_expr(&e);
    let mut r = Resolver { globals, scope: Vec::new(), gen };
    r.expr(e)
}

impl Resolver {
    fn lookup(&self, x: &str) -> Option<Expr> {
        for e in self.scope.iter().rev() {
            match e {
                Entry::Var(o, n) if o == x => return Some(Expr::Var(n.clone())),
                Entry::Fun(o, n) if o == x => return Some(Expr::Fun(n.clone())),
                _ => {}
            }
        }
        if self.globals.contains(x) {
            return Some(Expr::Fun(x.to_string()));
        }
        None
    }

    fn fresh_binder(&mut self, x: &str) -> Name {
        if self.lookup(x).is_some() {
            self.gen.fresh(x)
        } else {
            x.to_string()
        }
    }

    fn bind_var(&mut self, x: &str) -> Name {
        let n = self.fresh_binder(x);
        self.scope.push(Entry::Var(x.to_string(), n.clone()));
        n
    }

    fn pattern(&mut self, p: Pattern, seen: &mut HashSet<Name>) -> Result<Pattern> {
        match p {
            Pattern::Var(x) => {
                if !seen.insert(x.clone()) {
                    return Err(Error::invalid(format!("variable `{x}` bound twice in one pattern")));
                }
                Ok(Pattern::Var(self.bind_var(&x)))
            }
            Pattern::Con(c, ps) => {
                Ok(Pattern::Con(c, ps.into_iter().map(|q| self.pattern(q, seen)).collect::<Result<_>>()?))
            }
        }
    }

    fn def(&mut self, d: FunDef, rename: impl Fn(&str) -> Name) -> Result<FunDef> {
        let name = rename(&d.name);
        let arity = d.arity();
        let mut clauses = Vec::with_capacity(d.clauses.len());
        for c in d.clauses {
            if c.params.len() != arity {
                return Err(Error::Arity { name: d.name.clone(), expected: arity, found: c.params.len() });
            }
            let mark = self.scope.len();
            let mut seen = HashSet::new();
            let params = c.params.into_iter().map(|p| self.pattern(p, &mut seen)).collect::<Result<Vec<_>>>()?;
            let body = self.expr(c.body)?;
            self.scope.truncate(mark);
            clauses.push(Clause { params, body });
        }
        Ok(FunDef { name, clauses })
    }

    fn expr(&mut self, e: Expr) -> Result<Expr> {
        Ok(match e {
            Expr::Var(x) => self.lookup(&x).ok_or(Error::Unbound(x))?,
            Expr::Fun(f) => self.lookup(&f).ok_or(Error::Unbound(f))?,
            Expr::Int(_) => e,
            Expr::Con(c, args) => Expr::Con(c, args.into_iter().map(|a| self.expr(a)).collect::<Result<_>>()?),
            Expr::App(f, a) => Expr::App(Box::new(self.expr(*f)?), Box::new(self.expr(*a)?)),
            Expr::Let(binds, body) => {
                let mut seen = HashSet::new();
                let mut rhs = Vec::with_capacity(binds.len());
                for (x, r) in &binds {
                    if !seen.insert(x.clone()) {
                        return Err(Error::invalid(format!("`{x}` bound twice in one let")));
                    }
                    rhs.push(self.expr(r.clone())?);
                }
                let mark = self.scope.len();
                let names: Vec<Name> = binds.iter().map(|(x, _)| self.bind_var(x)).collect();
                let body = self.expr(*body)?;
                self.scope.truncate(mark);
                Expr::Let(names.into_iter().zip(rhs).collect(), Box::new(body))
            }
            Expr::Lam(x, body) => {
                let mark = self.scope.len();
                let n = self.bind_var(&x);
                let body = self.expr(*body)?;
                self.scope.truncate(mark);
                Expr::Lam(n, Box::new(body))
            }
            Expr::Where(body, defs) => {
                let mark = self.scope.len();
                let mut renamed = Vec::with_capacity(defs.len());
                for d in &defs {
                    let n = if self.lookup(&d.name).is_some() || prelude::PRIMITIVES.contains(&d.name.as_str()) {
                        self.gen.fresh(&d.name)
                    } else {
                        d.name.clone()
                    };
                    renamed.push((d.name.clone(), n));
                }
                for (o, n) in &renamed {
                    self.scope.push(Entry::Fun(o.clone(), n.clone()));
                }
                let body = self.expr(*body)?;
                let mut out = Vec::with_capacity(defs.len());
                for (d, (_, n)) in defs.into_iter().zip(renamed.iter()) {
                    let n = n.clone();
                    out.push(self.def(d, move |_| n.clone())?);
                }
                self.scope.truncate(mark);
                Expr::Where(Box::new(body), out)
            }
        })
    }
}
