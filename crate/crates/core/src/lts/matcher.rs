use std::collections::BTreeSet;

use crate::lang::ast::*;
use crate::lang::machine::Skeleton;
use crate::lang::subst::free_vars;

use super::{Lts, SkeletonTemplate, StateId};

/// How the lists a candidate walks end.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ListEnd {
    /// A clause for `[]` stops the recursion.
    Nil,
    /// The recursion stops at a cell matched by a non-recursive clause.
    /// Encoded lists always end with exactly one such cell.
    Cell,
}

/// What the element function computes for one clause of the candidate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementCase {
    /// The clause's own names for the non-list parameters, in order.
    pub plain: Vec<Name>,
    /// Pattern for the list element.
    pub cell: Pattern,
    pub body: StateId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Unit {
    /// Identity element of a primitive combining function.
    Identity(i64),
    /// Body of the `[]` clause, over that clause's parameter names.
    Body { plain: Vec<Name>, body: StateId },
}

/// Combining function of a reduction. It may use the non-list parameters
/// of the clause it was taken from, named by `plain`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Combine {
    pub state: StateId,
    pub plain: Vec<Name>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkeletonMatch {
    pub skeleton: Skeleton,
    pub function: Name,
    pub state: StateId,
    pub arity: usize,
    pub list_pos: usize,
    pub end: ListEnd,
    pub combine: Option<Combine>,
    pub unit: Option<Unit>,
    pub elements: Vec<ElementCase>,
}

/// Identity of a primitive binary operator.
pub fn primitive_identity(op: &str) -> Option<i64> {
    match op {
        "+" => Some(0),
        "*" => Some(1),
        _ => None,
    }
}

struct Unifier<'a> {
    l: &'a Lts,
    t: &'a SkeletonTemplate,
    f: StateId,
    list_pos: usize,
    tail: &'a str,
    plain: &'a [Option<Name>],
    scope: BTreeSet<Name>,
    element: Option<StateId>,
    combine: Option<StateId>,
    reentrant: bool,
}

impl Unifier<'_> {
    fn unify(&mut self, ts: StateId, cs: StateId) -> bool {
        let (t, l) = (&self.t.lts, self.l);
        if let Some((th, targs)) = t.app_parts(ts) {
            let Some((ch, cargs)) = l.app_parts(cs) else {
                return self.element_case(th, &targs, cs);
            };
            if th == t.start {
                return ch == self.f && self.recursive_call(&cargs);
            }
            if self.is_element_application(th, &targs) {
                return self.element_case(th, &targs, cs);
            }
            if t.var_leaf(th).is_none() || targs.len() != cargs.len() || !self.bind_combine(ch) {
                return false;
            }
            return targs.iter().zip(&cargs).all(|(a, b)| self.unify(*a, *b));
        }
        if let Some((c, targs)) = t.con_parts(ts) {
            return match l.con_parts(cs) {
                Some((d, cargs)) if c == d && targs.len() == cargs.len() => {
                    targs.iter().zip(&cargs).all(|(a, b)| self.unify(*a, *b))
                }
                _ => false,
            };
        }
        false
    }

    fn is_element_application(&self, th: StateId, targs: &[StateId]) -> bool {
        let t = &self.t.lts;
        t.var_leaf(th).is_some() && targs.len() == 1 && t.var_leaf(targs[0]) == Some(self.t.element.as_str())
    }

    fn element_case(&mut self, th: StateId, targs: &[StateId], cs: StateId) -> bool {
        if !self.is_element_application(th, targs) || self.element.is_some() {
            return false;
        }
        if !self.l.free_names(cs).is_subset(&self.scope) {
            return false;
        }
        self.reentrant = self.l.mentions_function(cs, self.f);
        self.element = Some(cs);
        true
    }

    fn bind_combine(&mut self, ch: StateId) -> bool {
        let plain: BTreeSet<Name> = self.plain.iter().flatten().cloned().collect();
        if !self.l.free_names(ch).is_subset(&plain) || self.l.mentions_function(ch, self.f) || ch == self.f {
            return false;
        }
        self.combine = Some(ch);
        true
    }

    fn recursive_call(&self, cargs: &[StateId]) -> bool {
        cargs.len() == self.plain.len()
            && cargs.iter().enumerate().all(|(i, &a)| {
                let want = if i == self.list_pos { Some(self.tail) } else { self.plain[i].as_deref() };
                want.is_some() && self.l.var_leaf(a) == want
            })
    }
}

/// Same combining function in two recursive clauses.
fn same_combine(l: &Lts, a: &Combine, b: &Combine) -> bool {
    let position = |c: &Combine, x: &str| c.plain.iter().position(|p| p == x);
    match (l.var_leaf(a.state), l.var_leaf(b.state)) {
        (Some(x), Some(y)) => match (position(a, x), position(b, y)) {
            (None, None) => x == y,
            (i, j) => i == j,
        },
        _ => a.state == b.state,
    }
}

/// Matches the definition at function state `f` against a skeleton
/// template. The candidate must pattern match on exactly one parameter,
/// with `[]` or `p : w` patterns, and pass every other parameter unchanged
/// to its recursive calls.
pub fn match_template(l: &Lts, f: StateId, t: &SkeletonTemplate) -> Option<SkeletonMatch> {
    let function = l.states[f].function.clone()?;
    let clauses = l.clauses(f);
    let arity = clauses.first()?.0.len();
    let matched: Vec<usize> = (0..arity).filter(|&i| clauses.iter().any(|(ps, _)| !ps[i].is_var())).collect();
    let [list_pos] = matched[..] else {
        return None;
    };

    let mut nil_clauses = Vec::new();
    let mut bases = Vec::new();
    let mut elements = Vec::new();
    let mut combine: Option<Combine> = None;
    let mut reentrant = false;
    for (ps, body) in clauses {
        if ps.len() != arity {
            return None;
        }
        let plain_opt: Vec<Option<Name>> = ps
            .iter()
            .enumerate()
            .map(|(i, p)| match p {
                Pattern::Var(x) if i != list_pos => Some(x.clone()),
                _ => None,
            })
            .collect();
        let plain: Vec<Name> = plain_opt.iter().flatten().cloned().collect();
        match &ps[list_pos] {
            Pattern::Con(c, args) if c == NIL && args.is_empty() => {
                if !l.free_names(body).is_subset(&plain.iter().cloned().collect()) {
                    return None;
                }
                nil_clauses.push(Unit::Body { plain, body });
            }
            Pattern::Con(c, args) if c == CONS => {
                let (cell, Pattern::Var(w)) = (&args[0], &args[1]) else {
                    return None;
                };
                let mut scope: BTreeSet<Name> = plain.iter().cloned().collect();
                scope.extend(cell.vars());
                if !l.mentions_function(body, f) {
                    if !l.free_names(body).is_subset(&scope) {
                        return None;
                    }
                    bases.push(ElementCase { plain, cell: cell.clone(), body });
                    continue;
                }
                let (_, tbody) = t.lts.clauses(t.lts.start)[0];
                let mut u = Unifier {
                    l,
                    t,
                    f,
                    list_pos,
                    tail: w,
                    plain: &plain_opt,
                    scope,
                    element: None,
                    combine: None,
                    reentrant: false,
                };
                if !u.unify(tbody, body) {
                    return None;
                }
                let element = u.element?;
                let found = u.combine.map(|state| Combine { state, plain: plain.clone() });
                match (&combine, found) {
                    (Some(a), Some(b)) if !same_combine(l, a, &b) => return None,
                    (None, b) => combine = b,
                    _ => {}
                }
                reentrant |= u.reentrant;
                elements.push(ElementCase { plain, cell: cell.clone(), body: element });
            }
            _ => return None,
        }
    }
    if elements.is_empty() {
        return None;
    }
    let end = match (nil_clauses.is_empty(), bases.is_empty()) {
        (false, true) => ListEnd::Nil,
        (true, false) => ListEnd::Cell,
        _ => return None,
    };

    let unit = match (t.skeleton, end) {
        (Skeleton::Map, ListEnd::Nil) => {
            let Some(Unit::Body { body, .. }) = nil_clauses.first() else { return None };
            if !is_nil(l, *body) {
                return None;
            }
            None
        }
        (Skeleton::Map, ListEnd::Cell) => {
            if !bases.iter().all(|b| is_nil(l, b.body)) {
                return None;
            }
            None
        }
        // A mapReduce whose element function re-enters the candidate is
        // left to mapReduce1, which combines without an extra unit.
        (Skeleton::MapReduce, _) if reentrant => return None,
        (Skeleton::MapReduce, ListEnd::Nil) => {
            if nil_clauses.len() != 1 {
                return None;
            }
            nil_clauses.pop()
        }
        (Skeleton::MapReduce, ListEnd::Cell) => {
            let op = l.var_leaf(combine.as_ref()?.state)?;
            if combine.as_ref()?.plain.iter().any(|p| p == op) {
                return None;
            }
            Some(Unit::Identity(primitive_identity(op)?))
        }
        (Skeleton::MapReduce1, ListEnd::Nil) => return None,
        (Skeleton::MapReduce1, ListEnd::Cell) => None,
    };
    match t.skeleton {
        Skeleton::Map if combine.is_some() => return None,
        Skeleton::MapReduce | Skeleton::MapReduce1 if combine.is_none() => return None,
        _ => {}
    }
    elements.extend(bases);
    Some(SkeletonMatch { skeleton: t.skeleton, function, state: f, arity, list_pos, end, combine, unit, elements })
}

fn is_nil(l: &Lts, s: StateId) -> bool {
    matches!(l.con_parts(s), Some((c, args)) if c == NIL && args.is_empty())
}

/// Moves each `let` into the single argument of an application or
/// constructor that uses its bindings, so that skeleton bodies hidden
/// under a `let` become visible.
pub fn sink_lets(prog: &Program) -> Program {
    let mut out = prog.clone();
    out.main = sink(&out.main);
    for d in &mut out.defs {
        for c in &mut d.clauses {
            c.body = sink(&c.body);
        }
    }
    out
}

fn sink(e: &Expr) -> Expr {
    match e {
        Expr::Var(_) | Expr::Int(_) | Expr::Fun(_) => e.clone(),
        Expr::Con(c, args) => Expr::Con(c.clone(), args.iter().map(sink).collect()),
        Expr::App(f, a) => Expr::App(Box::new(sink(f)), Box::new(sink(a))),
        Expr::Lam(x, b) => Expr::Lam(x.clone(), Box::new(sink(b))),
        Expr::Where(b, defs) => Expr::Where(Box::new(sink(b)), defs.clone()),
        Expr::Let(bs, body) => {
            let bs: Vec<(Name, Expr)> = bs.iter().map(|(x, r)| (x.clone(), sink(r))).collect();
            let body = sink(body);
            let bound: BTreeSet<&Name> = bs.iter().map(|(x, _)| x).collect();
            let uses = |e: &Expr| free_vars(e).iter().any(|v| bound.contains(v));
            match body {
                Expr::Con(c, mut args) => {
                    let users: Vec<usize> = (0..args.len()).filter(|&i| uses(&args[i])).collect();
                    if let [i] = users[..] {
                        args[i] = sink(&Expr::Let(bs, Box::new(args[i].clone())));
                        return Expr::Con(c, args);
                    }
                    Expr::Let(bs, Box::new(Expr::Con(c, args)))
                }
                Expr::App(..) => {
                    let (head, mut args) = body.clone().into_spine();
                    let users: Vec<usize> = (0..args.len()).filter(|&i| uses(&args[i])).collect();
                    if let ([i], false) = (&users[..], uses(&head)) {
                        args[*i] = sink(&Expr::Let(bs, Box::new(args[*i].clone())));
                        return Expr::app(head, args);
                    }
                    Expr::Let(bs, Box::new(body))
                }
                body => Expr::Let(bs, Box::new(body)),
            }
        }
    }
}
