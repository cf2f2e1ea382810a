//! Canonical printing of programs for structural comparison: declared
//! constructors, type variables and bound variables are renumbered in
//! traversal order, and declarations are sorted by name.

use std::collections::HashMap;

use crate::lang::ast::*;
use crate::lang::lambda_lift;
use crate::lang::pretty::clause_to_string;

struct Canon {
    ctors: HashMap<Name, Name>,
}

impl Canon {
    fn ctor(&self, c: &str) -> Name {
        self.ctors.get(c).cloned().unwrap_or_else(|| c.to_string())
    }

    fn pattern(&self, p: &Pattern, env: &mut HashMap<Name, Name>, next: &mut usize) -> Pattern {
        match p {
            Pattern::Var(x) => Pattern::Var(bind(x, env, next)),
            Pattern::Con(c, ps) => Pattern::Con(self.ctor(c), ps.iter().map(|q| self.pattern(q, env, next)).collect()),
        }
    }

    fn expr(&self, e: &Expr, env: &HashMap<Name, Name>, next: &mut usize) -> Expr {
        match e {
            Expr::Var(x) => Expr::Var(env.get(x).cloned().unwrap_or_else(|| x.clone())),
            Expr::Int(_) | Expr::Fun(_) => e.clone(),
            Expr::Con(c, args) => Expr::Con(self.ctor(c), args.iter().map(|a| self.expr(a, env, next)).collect()),
            Expr::App(f, a) => {
                let f = self.expr(f, env, next);
                Expr::App(Box::new(f), Box::new(self.expr(a, env, next)))
            }
            Expr::Lam(x, body) => {
                let mut inner = env.clone();
                let y = bind(x, &mut inner, next);
                Expr::Lam(y, Box::new(self.expr(body, &inner, next)))
            }
            Expr::Let(bs, body) => {
                let rhs: Vec<Expr> = bs.iter().map(|(_, r)| self.expr(r, env, next)).collect();
                let mut inner = env.clone();
                let names: Vec<Name> = bs.iter().map(|(x, _)| bind(x, &mut inner, next)).collect();
                Expr::Let(names.into_iter().zip(rhs).collect(), Box::new(self.expr(body, &inner, next)))
            }
            Expr::Where(..) => unreachable!("canonical form works on lifted programs"),
        }
    }
}

fn bind(x: &str, env: &mut HashMap<Name, Name>, next: &mut usize) -> Name {
    *next += 1;
    let y = format!("v{next}");
    env.insert(x.to_string(), y.clone());
    y
}

fn canon_type(t: &Type) -> Type {
    let mut vars = Vec::new();
    t.vars(&mut vars);
    let map = vars.iter().enumerate().map(|(i, v)| (v.clone(), Type::Var(format!("t{}", i + 1)))).collect();
    t.substitute(&map)
}

/// A printed form of `prog` that is equal for two programs exactly when
/// they differ only in the choice of constructor and bound-variable names
/// and in declaration order.
pub fn canonical_form(prog: &Program) -> String {
    let p = lambda_lift(prog);
    let mut types = p.types.clone();
    types.sort_by(|a, b| a.name.cmp(&b.name));
    let mut ctors = HashMap::new();
    for t in &types {
        for c in &t.ctors {
            let k = ctors.len() + 1;
            ctors.insert(c.name.clone(), format!("K{k}"));
        }
    }
    let canon = Canon { ctors };
    let mut lines = Vec::new();
    for t in &types {
        let map = t.params.iter().enumerate().map(|(i, v)| (v.clone(), Type::Var(format!("t{}", i + 1)))).collect();
        let decl = TypeDecl {
            name: t.name.clone(),
            params: (1..=t.params.len()).map(|i| format!("t{i}")).collect(),
            ctors: t
                .ctors
                .iter()
                .map(|c| CtorDecl {
                    name: canon.ctor(&c.name),
                    fields: c.fields.iter().map(|f| f.substitute(&map)).collect(),
                })
                .collect(),
        };
        lines.push(decl.to_string());
    }
    for (name, ty) in &p.sigs {
        lines.push(format!("{name} :: {}", canon_type(ty)));
    }
    let mut env = HashMap::new();
    let mut next = 0;
    let params: Vec<Name> = p.main_params.iter().map(|x| bind(x, &mut env, &mut next)).collect();
    let main = canon.expr(&p.main, &env, &mut next);
    lines.push(format!("main {} = {main}", params.join(" ")).replace("main  =", "main ="));
    let mut defs: Vec<&FunDef> = p.defs.iter().collect();
    defs.sort_by(|a, b| a.name.cmp(&b.name));
    for d in defs {
        for c in &d.clauses {
            let mut env = HashMap::new();
            let mut next = 0;
            let params = c.params.iter().map(|q| canon.pattern(q, &mut env, &mut next)).collect();
            let body = canon.expr(&c.body, &env, &mut next);
            lines.push(clause_to_string(&d.name, &Clause { params, body }));
        }
    }
    lines.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    #[test]
    fn ignores_constructor_and_variable_names() {
        let a = parse_program("data T ::= A | B Int;; f A = 0;; f (B x) = x;; main y = f y;;").unwrap();
        let b = parse_program("data T ::= P | Q Int;; f (Q n) = n;; f P = 0;; main z = f z;;").unwrap();
        // Clause order is significant, so these differ.
        assert_ne!(canonical_form(&a), canonical_form(&b));
        let c = parse_program("data T ::= P | Q Int;; f P = 0;; f (Q n) = n;; main z = f z;;").unwrap();
        assert_eq!(canonical_form(&a), canonical_form(&c));
    }

    #[test]
    fn distinguishes_structure() {
        let a = parse_program("main x = x + 1;;").unwrap();
        let b = parse_program("main x = 1 + x;;").unwrap();
        assert_ne!(canonical_form(&a), canonical_form(&b));
    }
}
