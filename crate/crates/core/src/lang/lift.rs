//! Lambda lifting: moves every `where`-bound function to the top level.
//! Variables a local function uses from its enclosing scopes become extra
//! leading parameters, and every reference passes them explicitly.

use std::collections::{BTreeSet, HashMap};

use super::ast::*;
use super::names::NameGen;
use super::prelude;
use super::subst::def_free_vars;

struct Lifted {
    name: Name,
    captured: Vec<Name>,
}

struct Lifter {
    gen: NameGen,
    out: Vec<FunDef>,
}

pub fn lambda_lift(prog: &Program) -> Program {
    if !prog.has_where() {
        return prog.clone();
    }
    // Function names live in their own namespace; only top-level and
    // builtin names can clash with a lifted definition.
    let mut gen = NameGen::new();
    gen.reserve("main");
    for d in &prog.defs {
        gen.reserve(d.name.clone());
    }
    for d in prelude::defs() {
        gen.reserve(d.name.clone());
    }
    let mut l = Lifter { gen, out: Vec::new() };
    let funs = HashMap::new();

    let scope: BTreeSet<Name> = prog.main_params.iter().cloned().collect();
    let main = l.expr(&prog.main, &scope, &funs);
    let mut main_lifted = std::mem::take(&mut l.out);

    let mut defs = Vec::new();
    for d in &prog.defs {
        let clauses = d
            .clauses
            .iter()
            .map(|c| {
                let scope: BTreeSet<Name> = c.bound_vars().into_iter().collect();
                Clause { params: c.params.clone(), body: l.expr(&c.body, &scope, &funs) }
            })
            .collect();
        defs.push(FunDef { name: d.name.clone(), clauses });
        defs.append(&mut l.out);
    }
    main_lifted.append(&mut defs);
    Program {
        types: prog.types.clone(),
        sigs: prog.sigs.clone(),
        main_params: prog.main_params.clone(),
        main,
        defs: main_lifted,
    }
}

impl Lifter {
    fn expr(&mut self, e: &Expr, scope: &BTreeSet<Name>, funs: &HashMap<Name, Lifted>) -> Expr {
        match e {
            Expr::Fun(f) => match funs.get(f) {
                Some(l) => Expr::app(Expr::Fun(l.name.clone()), l.captured.iter().map(Expr::var)),
                None => e.clone(),
            },
            Expr::Var(_) | Expr::Int(_) => e.clone(),
            Expr::Con(c, args) => Expr::Con(c.clone(), args.iter().map(|a| self.expr(a, scope, funs)).collect()),
            Expr::App(f, a) => Expr::App(Box::new(self.expr(f, scope, funs)), Box::new(self.expr(a, scope, funs))),
            Expr::Lam(x, body) => {
                let mut inner = scope.clone();
                inner.insert(x.clone());
                Expr::Lam(x.clone(), Box::new(self.expr(body, &inner, funs)))
            }
            Expr::Let(binds, body) => {
                let rhs: Vec<(Name, Expr)> =
                    binds.iter().map(|(x, r)| (x.clone(), self.expr(r, scope, funs))).collect();
                let mut inner = scope.clone();
                inner.extend(binds.iter().map(|(x, _)| x.clone()));
                Expr::Let(rhs, Box::new(self.expr(body, &inner, funs)))
            }
            Expr::Where(body, defs) => {
                let group: Vec<&Name> = defs.iter().map(|d| &d.name).collect();
                let mut caps: Vec<BTreeSet<Name>> = defs
                    .iter()
                    .map(|d| {
                        let mut s: BTreeSet<Name> =
                            def_free_vars(d).into_iter().filter(|x| scope.contains(x)).collect();
                        for c in &d.clauses {
                            for f in c.body.called_functions() {
                                if let Some(l) = funs.get(&f) {
                                    s.extend(l.captured.iter().cloned());
                                }
                            }
                        }
                        s
                    })
                    .collect();
                let calls: Vec<Vec<usize>> = defs
                    .iter()
                    .map(|d| {
                        let called: BTreeSet<Name> = d.clauses.iter().flat_map(|c| c.body.called_functions()).collect();
                        group.iter().enumerate().filter(|(_, g)| called.contains(**g)).map(|(i, _)| i).collect()
                    })
                    .collect();
                loop {
                    let mut changed = false;
                    for i in 0..defs.len() {
                        for &j in &calls[i] {
                            if j != i {
                                let add: Vec<Name> = caps[j].difference(&caps[i]).cloned().collect();
                                if !add.is_empty() {
                                    caps[i].extend(add);
                                    changed = true;
                                }
                            }
                        }
                    }
                    if !changed {
                        break;
                    }
                }
                let mut inner_funs: HashMap<Name, Lifted> = funs
                    .iter()
                    .map(|(k, v)| (k.clone(), Lifted { name: v.name.clone(), captured: v.captured.clone() }))
                    .collect();
                for (d, c) in defs.iter().zip(&caps) {
                    let name = self.gen.prefer(&d.name);
                    inner_funs.insert(d.name.clone(), Lifted { name, captured: c.iter().cloned().collect() });
                }
                for d in defs {
                    let lifted = &inner_funs[&d.name];
                    let (name, captured) = (lifted.name.clone(), lifted.captured.clone());
                    let clauses = d
                        .clauses
                        .iter()
                        .map(|c| {
                            let mut inner: BTreeSet<Name> = captured.iter().cloned().collect();
                            inner.extend(c.bound_vars());
                            let mut params: Vec<Pattern> = captured.iter().map(Pattern::var).collect();
                            params.extend(c.params.iter().cloned());
                            Clause { params, body: self.expr(&c.body, &inner, &inner_funs) }
                        })
                        .collect();
                    self.out.push(FunDef { name, clauses });
                }
                self.expr(body, scope, &inner_funs)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    #[test]
    fn captured_variables_become_leading_parameters() {
        let p = parse_program("main y xs = h xs where { h [] = y; h (x : zs) = x + h zs };;").unwrap();
        let l = lambda_lift(&p);
        assert!(!l.has_where());
        let h = l.def("h").unwrap();
        assert_eq!(h.arity(), 2);
        assert_eq!(h.clauses[0].params[0], Pattern::var("y"));
        assert_eq!(l.main.to_string(), "h y xs");
        assert_eq!(h.clauses[1].body.to_string(), "x + h y zs");
    }

    #[test]
    fn closed_local_functions_keep_their_arity() {
        let p = parse_program("main = f 1 where { f x = g x; g x = x };;").unwrap();
        let l = lambda_lift(&p);
        assert_eq!(l.def("f").unwrap().arity(), 1);
        assert_eq!(l.main.to_string(), "f 1");
    }
}
