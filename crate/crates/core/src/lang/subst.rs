//! Free variables and capture-avoiding substitution.

use std::collections::{BTreeSet, HashMap};

use super::ast::{Clause, Expr, FunDef, Name, Pattern};
use super::names::fresh_avoiding;

pub fn free_vars(e: &Expr) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect_free(e, &mut Vec::new(), &mut out);
    out
}

fn collect_free(e: &Expr, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match e {
        Expr::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Expr::Int(_) | Expr::Fun(_) => {}
        Expr::Con(_, args) => args.iter().for_each(|a| collect_free(a, bound, out)),
        Expr::App(f, a) => {
            collect_free(f, bound, out);
            collect_free(a, bound, out);
        }
        Expr::Let(bs, body) => {
            for (_, rhs) in bs {
                collect_free(rhs, bound, out);
            }
            let n = bound.len();
            bound.extend(bs.iter().map(|(x, _)| x.clone()));
            collect_free(body, bound, out);
            bound.truncate(n);
        }
        Expr::Lam(x, body) => {
            bound.push(x.clone());
            collect_free(body, bound, out);
            bound.pop();
        }
        Expr::Where(body, defs) => {
            collect_free(body, bound, out);
            for d in defs {
                for c in &d.clauses {
                    let n = bound.len();
                    bound.extend(c.bound_vars());
                    collect_free(&c.body, bound, out);
                    bound.truncate(n);
                }
            }
        }
    }
}

/// Free variables of a clause body that are not bound by its patterns.
pub fn clause_free_vars(c: &Clause) -> BTreeSet<Name> {
    let bound = c.bound_vars();
    free_vars(&c.body).into_iter().filter(|x| !bound.contains(x)).collect()
}

pub fn def_free_vars(d: &FunDef) -> BTreeSet<Name> {
    d.clauses.iter().flat_map(clause_free_vars).collect()
}

/// Capture-avoiding simultaneous substitution of variables.
pub fn substitute(e: &Expr, map: &HashMap<Name, Expr>) -> Expr {
    if map.is_empty() {
        return e.clone();
    }
    let mut avoid: BTreeSet<Name> = BTreeSet::new();
    for v in map.values() {
        avoid.extend(free_vars(v));
    }
    subst(e, map, &avoid)
}

pub fn substitute_one(e: &Expr, x: &str, v: &Expr) -> Expr {
    let mut m = HashMap::new();
    m.insert(x.to_string(), v.clone());
    substitute(e, &m)
}

fn fresh_for(x: &str, avoid: &BTreeSet<Name>, body_fv: &BTreeSet<Name>) -> Name {
    fresh_avoiding(x, |n| avoid.contains(n) || body_fv.contains(n))
}

/// Removes `names` from the substitution; renames binders that would capture.
fn bind(
    names: &[Name],
    map: &HashMap<Name, Expr>,
    avoid: &BTreeSet<Name>,
    scope_fv: &BTreeSet<Name>,
) -> (Vec<Name>, HashMap<Name, Expr>) {
    let mut inner = map.clone();
    let mut new_names = Vec::with_capacity(names.len());
    for x in names {
        inner.remove(x);
    }
    let mut taken: BTreeSet<Name> = scope_fv.clone();
    taken.extend(names.iter().cloned());
    for x in names {
        if avoid.contains(x) && !inner.is_empty() {
            let y = fresh_for(x, avoid, &taken);
            taken.insert(y.clone());
            inner.insert(x.clone(), Expr::Var(y.clone()));
            new_names.push(y);
        } else {
            new_names.push(x.clone());
        }
    }
    (new_names, inner)
}

fn subst(e: &Expr, map: &HashMap<Name, Expr>, avoid: &BTreeSet<Name>) -> Expr {
    if map.is_empty() {
        return e.clone();
    }
    match e {
        Expr::Var(x) => map.get(x).cloned().unwrap_or_else(|| e.clone()),
        Expr::Int(_) | Expr::Fun(_) => e.clone(),
        Expr::Con(c, args) => Expr::Con(c.clone(), args.iter().map(|a| subst(a, map, avoid)).collect()),
        Expr::App(f, a) => Expr::App(Box::new(subst(f, map, avoid)), Box::new(subst(a, map, avoid))),
        Expr::Let(bs, body) => {
            let rhs: Vec<Expr> = bs.iter().map(|(_, r)| subst(r, map, avoid)).collect();
            let names: Vec<Name> = bs.iter().map(|(x, _)| x.clone()).collect();
            let (names, inner) = bind(&names, map, avoid, &free_vars(body));
            let body = subst(body, &inner, avoid);
            Expr::Let(names.into_iter().zip(rhs).collect(), Box::new(body))
        }
        Expr::Lam(x, body) => {
            let (names, inner) = bind(std::slice::from_ref(x), map, avoid, &free_vars(body));
            Expr::Lam(names[0].clone(), Box::new(subst(body, &inner, avoid)))
        }
        Expr::Where(body, defs) => {
            let body = subst(body, map, avoid);
            let defs = defs
                .iter()
                .map(|d| FunDef {
                    name: d.name.clone(),
                    clauses: d.clauses.iter().map(|c| subst_clause(c, map, avoid)).collect(),
                })
                .collect();
            Expr::Where(Box::new(body), defs)
        }
    }
}

fn subst_clause(c: &Clause, map: &HashMap<Name, Expr>, avoid: &BTreeSet<Name>) -> Clause {
    let names = c.bound_vars();
    let (new_names, inner) = bind(&names, map, avoid, &free_vars(&c.body));
    let renames: HashMap<&Name, &Name> = names.iter().zip(new_names.iter()).collect();
    let params = c.params.iter().map(|p| rename_pattern(p, &renames)).collect();
    Clause { params, body: subst(&c.body, &inner, avoid) }
}

fn rename_pattern(p: &Pattern, renames: &HashMap<&Name, &Name>) -> Pattern {
    match p {
        Pattern::Var(x) => Pattern::Var(renames.get(x).map_or_else(|| x.clone(), |y| (*y).clone())),
        Pattern::Con(c, ps) => Pattern::Con(c.clone(), ps.iter().map(|q| rename_pattern(q, renames)).collect()),
    }
}

/// Renames function references, respecting local `where` shadowing.
pub fn rename_funs(e: &Expr, map: &HashMap<Name, Name>) -> Expr {
    if map.is_empty() {
        return e.clone();
    }
    match e {
        Expr::Fun(f) => Expr::Fun(map.get(f).cloned().unwrap_or_else(|| f.clone())),
        Expr::Var(_) | Expr::Int(_) => e.clone(),
        Expr::Con(c, args) => Expr::Con(c.clone(), args.iter().map(|a| rename_funs(a, map)).collect()),
        Expr::App(f, a) => Expr::App(Box::new(rename_funs(f, map)), Box::new(rename_funs(a, map))),
        Expr::Let(bs, body) => Expr::Let(
            bs.iter().map(|(x, r)| (x.clone(), rename_funs(r, map))).collect(),
            Box::new(rename_funs(body, map)),
        ),
        Expr::Lam(x, body) => Expr::Lam(x.clone(), Box::new(rename_funs(body, map))),
        Expr::Where(body, defs) => {
            let mut inner = map.clone();
            for d in defs {
                inner.remove(&d.name);
            }
            Expr::Where(
                Box::new(rename_funs(body, &inner)),
                defs.iter()
                    .map(|d| FunDef {
                        name: d.name.clone(),
                        clauses: d
                            .clauses
                            .iter()
                            .map(|c| Clause { params: c.params.clone(), body: rename_funs(&c.body, &inner) })
                            .collect(),
                    })
                    .collect(),
            )
        }
    }
}

/// Replaces every occurrence of `Fun(name)` by `with` (no local shadowing check).
pub fn replace_fun(e: &Expr, name: &str, with: &Expr) -> Expr {
    match e {
        Expr::Fun(f) if f == name => with.clone(),
        Expr::Var(_) | Expr::Int(_) | Expr::Fun(_) => e.clone(),
        Expr::Con(c, args) => Expr::Con(c.clone(), args.iter().map(|a| replace_fun(a, name, with)).collect()),
        Expr::App(f, a) => Expr::App(Box::new(replace_fun(f, name, with)), Box::new(replace_fun(a, name, with))),
        Expr::Let(bs, body) => Expr::Let(
            bs.iter().map(|(x, r)| (x.clone(), replace_fun(r, name, with))).collect(),
            Box::new(replace_fun(body, name, with)),
        ),
        Expr::Lam(x, body) => Expr::Lam(x.clone(), Box::new(replace_fun(body, name, with))),
        Expr::Where(body, defs) => {
            if defs.iter().any(|d| d.name == name) {
                return e.clone();
            }
            Expr::Where(
                Box::new(replace_fun(body, name, with)),
                defs.iter()
                    .map(|d| FunDef {
                        name: d.name.clone(),
                        clauses: d
                            .clauses
                            .iter()
                            .map(|c| Clause { params: c.params.clone(), body: replace_fun(&c.body, name, with) })
                            .collect(),
                    })
                    .collect(),
            )
        }
    }
}
