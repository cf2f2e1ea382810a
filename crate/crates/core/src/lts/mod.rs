//! Labelled transition systems built from programs, matching of skeleton
//! templates against them, and residualization back into programs.
//!
//! Every expression node becomes a state whose outgoing actions describe
//! it. Function definitions become states with one clause action per
//! clause; a function is built once and later references point back to its
//! state, so recursion shows up as cycles and the graph stays finite.

mod dot;
mod extract;
mod matcher;
mod templates;

pub use dot::to_dot;
pub use extract::{extract_program, identify, identify_all, skeletonize, walks_encoded_list, Identification};
pub use matcher::{match_template, sink_lets, Combine, ElementCase, ListEnd, SkeletonMatch, Unit};
pub use templates::{builtin_templates, SkeletonTemplate};

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::lang::ast::*;
use crate::lang::names::fresh_avoiding;
use crate::lang::pretty::pattern_atom;
use crate::lang::{lambda_lift, prelude};

pub type StateId = usize;

/// The shared final state every leaf action leads to.
pub const TERMINAL: StateId = 0;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    Var(Name),
    Int(i64),
    Con(Name),
    Lambda(Name),
    App,
    /// The `i`-th argument of an application or constructor, from 1.
    Arg(usize),
    ClauseHead(Vec<Pattern>),
    LetBody,
    LetBinding(Name),
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Var(x) => write!(f, "{x}"),
            Action::Int(n) => write!(f, "{n}"),
            Action::Con(c) if c == NIL => write!(f, "[]"),
            Action::Con(c) if c == CONS => write!(f, "(:)"),
            Action::Con(c) => write!(f, "{c}"),
            Action::Lambda(x) => write!(f, "\\{x}"),
            Action::App => write!(f, "@"),
            Action::Arg(i) => write!(f, "#{i}"),
            Action::ClauseHead(ps) => {
                let ps: Vec<String> = ps.iter().map(pattern_atom).collect();
                write!(f, "{}", ps.join(" "))
            }
            Action::LetBody => write!(f, "let"),
            Action::LetBinding(x) => write!(f, "{x}="),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct State {
    pub edges: Vec<(Action, StateId)>,
    /// Set on states that stand for a function definition.
    pub function: Option<Name>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lts {
    pub states: Vec<State>,
    pub start: StateId,
    /// Edges `(from, to)` that re-enter an already built function state.
    pub back_edges: Vec<(StateId, StateId)>,
    /// Free inputs of the root expression.
    pub params: Vec<Name>,
    /// Data declarations of the source program, kept for residualization.
    pub types: Vec<TypeDecl>,
}

impl Lts {
    fn empty() -> Lts {
        Lts {
            states: vec![State::default()],
            start: TERMINAL,
            back_edges: Vec::new(),
            params: Vec::new(),
            types: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.len() <= 1
    }

    pub fn edges(&self, s: StateId) -> &[(Action, StateId)] {
        &self.states[s].edges
    }

    pub fn transitions(&self) -> usize {
        self.states.iter().map(|s| s.edges.len()).sum()
    }

    /// Target of the first edge labelled `a`.
    pub fn follow(&self, s: StateId, a: &Action) -> Option<StateId> {
        self.edges(s).iter().find(|(b, _)| b == a).map(|(_, t)| *t)
    }

    /// The function state of a definition by name.
    pub fn function_state(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s.function.as_deref() == Some(name))
    }

    pub fn is_function(&self, s: StateId) -> bool {
        self.states[s].function.is_some()
    }

    /// Head and arguments of an application state.
    pub fn app_parts(&self, s: StateId) -> Option<(StateId, Vec<StateId>)> {
        let head = self.follow(s, &Action::App)?;
        let mut args: Vec<(usize, StateId)> = self
            .edges(s)
            .iter()
            .filter_map(|(a, t)| match a {
                Action::Arg(i) => Some((*i, *t)),
                _ => None,
            })
            .collect();
        args.sort();
        Some((head, args.into_iter().map(|(_, t)| t).collect()))
    }

    /// Constructor name and argument states of a constructor state.
    pub fn con_parts(&self, s: StateId) -> Option<(&str, Vec<StateId>)> {
        let name = self.edges(s).iter().find_map(|(a, _)| match a {
            Action::Con(c) => Some(c.as_str()),
            _ => None,
        })?;
        let mut args: Vec<(usize, StateId)> = self
            .edges(s)
            .iter()
            .filter_map(|(a, t)| match a {
                Action::Arg(i) => Some((*i, *t)),
                _ => None,
            })
            .collect();
        args.sort();
        Some((name, args.into_iter().map(|(_, t)| t).collect()))
    }

    /// The variable of a leaf state `s --x--> 0`.
    pub fn var_leaf(&self, s: StateId) -> Option<&str> {
        match self.edges(s) {
            [(Action::Var(x), TERMINAL)] => Some(x),
            _ => None,
        }
    }

    /// Clause actions of a function state.
    pub fn clauses(&self, s: StateId) -> Vec<(&[Pattern], StateId)> {
        self.edges(s)
            .iter()
            .filter_map(|(a, t)| match a {
                Action::ClauseHead(ps) => Some((ps.as_slice(), *t)),
                _ => None,
            })
            .collect()
    }

    /// States reachable from `root` without passing through a function
    /// state other than `root` itself.
    pub fn local_states(&self, root: StateId) -> Vec<StateId> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(s) = stack.pop() {
            if !seen.insert(s) {
                continue;
            }
            out.push(s);
            if s != root && self.is_function(s) {
                continue;
            }
            for (_, t) in self.edges(s).iter().rev() {
                stack.push(*t);
            }
        }
        out
    }

    /// Variables occurring free in the expression rooted at `root`, not
    /// looking inside function states. Bound names are unique per clause
    /// after resolution, so every binder seen removes its name.
    pub fn free_names(&self, root: StateId) -> BTreeSet<Name> {
        let mut used = BTreeSet::new();
        let mut bound = BTreeSet::new();
        for s in self.local_states(root) {
            if self.is_function(s) {
                if s == root {
                    for (ps, _) in self.clauses(s) {
                        bound.extend(ps.iter().flat_map(Pattern::vars));
                    }
                }
                continue;
            }
            for (a, _) in self.edges(s) {
                match a {
                    Action::Var(x) if !prelude::is_builtin(x) => {
                        used.insert(x.clone());
                    }
                    Action::Lambda(x) | Action::LetBinding(x) => {
                        bound.insert(x.clone());
                    }
                    _ => {}
                }
            }
        }
        used.difference(&bound).cloned().collect()
    }

    /// Whether the function state `f` is referenced from the expression
    /// rooted at `root` (without looking inside other functions).
    pub fn mentions_function(&self, root: StateId, f: StateId) -> bool {
        self.local_states(root).into_iter().any(|s| s == f && s != root)
    }
}

struct Builder<'p> {
    defs: HashMap<&'p str, &'p FunDef>,
    memo: HashMap<Name, StateId>,
    lts: Lts,
}

impl<'p> Builder<'p> {
    fn new(prog: &'p Program) -> Builder<'p> {
        let mut lts = Lts::empty();
        lts.types = prog.types.clone();
        Builder { defs: prog.defs.iter().map(|d| (d.name.as_str(), d)).collect(), memo: HashMap::new(), lts }
    }

    fn state(&mut self, edges: Vec<(Action, StateId)>) -> StateId {
        self.lts.states.push(State { edges, function: None });
        self.lts.states.len() - 1
    }

    fn function(&mut self, f: &str, from: Option<StateId>) -> Result<StateId> {
        if let Some(&s) = self.memo.get(f) {
            if let Some(from) = from {
                self.lts.back_edges.push((from, s));
            }
            return Ok(s);
        }
        let def = *self.defs.get(f).ok_or_else(|| Error::Unbound(f.to_string()))?;
        let s = self.state(Vec::new());
        self.lts.states[s].function = Some(f.to_string());
        self.memo.insert(f.to_string(), s);
        let mut edges = Vec::new();
        for c in &def.clauses {
            let body = self.expr(&c.body)?;
            edges.push((Action::ClauseHead(c.params.clone()), body));
        }
        self.lts.states[s].edges = edges;
        Ok(s)
    }

    fn args(&mut self, edges: &mut Vec<(Action, StateId)>, args: &[&Expr]) -> Result<()> {
        for (i, a) in args.iter().enumerate() {
            let t = self.expr(a)?;
            edges.push((Action::Arg(i + 1), t));
        }
        Ok(())
    }

    fn expr(&mut self, e: &Expr) -> Result<StateId> {
        match e {
            Expr::Var(x) => Ok(self.state(vec![(Action::Var(x.clone()), TERMINAL)])),
            Expr::Int(n) => Ok(self.state(vec![(Action::Int(*n), TERMINAL)])),
            Expr::Fun(f) if prelude::is_builtin(f) && !self.defs.contains_key(f.as_str()) => {
                Ok(self.state(vec![(Action::Var(f.clone()), TERMINAL)]))
            }
            Expr::Fun(f) => self.function(f, None),
            Expr::Con(c, args) => {
                let mut edges = vec![(Action::Con(c.clone()), TERMINAL)];
                let args: Vec<&Expr> = args.iter().collect();
                self.args(&mut edges, &args)?;
                Ok(self.state(edges))
            }
            Expr::App(..) => {
                let (head, args) = e.spine();
                let s = self.state(Vec::new());
                let h = match head {
                    Expr::Fun(f) if !prelude::is_builtin(f) || self.defs.contains_key(f.as_str()) => {
                        self.function(f, Some(s))?
                    }
                    _ => self.expr(head)?,
                };
                let mut edges = vec![(Action::App, h)];
                self.args(&mut edges, &args)?;
                self.lts.states[s].edges = edges;
                Ok(s)
            }
            Expr::Lam(x, body) => {
                let b = self.expr(body)?;
                Ok(self.state(vec![(Action::Lambda(x.clone()), b)]))
            }
            Expr::Let(bs, body) => {
                let b = self.expr(body)?;
                let mut edges = vec![(Action::LetBody, b)];
                for (x, r) in bs {
                    let t = self.expr(r)?;
                    edges.push((Action::LetBinding(x.clone()), t));
                }
                Ok(self.state(edges))
            }
            Expr::Where(..) => Err(Error::invalid("local definitions must be lambda-lifted before building an LTS")),
        }
    }
}

/// LTS of a whole program, rooted at `main`.
pub fn build_lts(prog: &Program) -> Result<Lts> {
    let lifted = lambda_lift(prog);
    let mut b = Builder::new(&lifted);
    let root = b.expr(&lifted.main)?;
    b.lts.start = root;
    b.lts.params = lifted.main_params.clone();
    Ok(b.lts)
}

/// LTS of an expression in the context of `prog`'s definitions.
pub fn build_expr_lts(prog: &Program, e: &Expr) -> Result<Lts> {
    let lifted = lambda_lift(prog);
    let mut b = Builder::new(&lifted);
    let root = b.expr(e)?;
    b.lts.start = root;
    Ok(b.lts)
}

/// LTS rooted at the state of function `name`.
pub fn build_function_lts(prog: &Program, name: &str) -> Result<Lts> {
    let lifted = lambda_lift(prog);
    let mut b = Builder::new(&lifted);
    let root = b.function(name, None)?;
    b.lts.start = root;
    Ok(b.lts)
}

/// Names bound anywhere in the graph by lambdas, lets or clause patterns.
fn binders(l: &Lts) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    for s in &l.states {
        for (a, _) in &s.edges {
            match a {
                Action::Lambda(x) | Action::LetBinding(x) => {
                    out.insert(x.clone());
                }
                Action::ClauseHead(ps) => out.extend(ps.iter().flat_map(Pattern::vars)),
                _ => {}
            }
        }
    }
    out
}

fn rename_pattern(p: &Pattern, from: &str, to: &str) -> Pattern {
    match p {
        Pattern::Var(x) if x == from => Pattern::Var(to.to_string()),
        Pattern::Var(_) => p.clone(),
        Pattern::Con(c, ps) => Pattern::Con(c.clone(), ps.iter().map(|q| rename_pattern(q, from, to)).collect()),
    }
}

/// Renames a bound name everywhere in the graph.
fn rename_bound(l: &mut Lts, from: &str, to: &str) {
    for s in &mut l.states {
        for (a, _) in &mut s.edges {
            match a {
                Action::Var(x) | Action::Lambda(x) | Action::LetBinding(x) if x == from => *x = to.to_string(),
                Action::ClauseHead(ps) => {
                    for p in ps.iter_mut() {
                        *p = rename_pattern(p, from, to);
                    }
                }
                _ => {}
            }
        }
    }
}

/// Replaces every leaf `s --x--> 0` with `x` in `theta` by the graph
/// `theta[x]`. Binders of `l` that would capture free names of the
/// substituted graphs are renamed first.
pub fn lts_substitute(l: &Lts, theta: &HashMap<Name, Lts>) -> Lts {
    let mut out = l.clone();
    let mut incoming: BTreeSet<Name> = BTreeSet::new();
    for t in theta.values() {
        incoming.extend(t.free_names(t.start));
    }
    let bound = binders(&out);
    let mut taken: BTreeSet<Name> = bound.union(&incoming).cloned().collect();
    for x in bound.intersection(&incoming) {
        let y = fresh_avoiding(x, |n| taken.contains(n));
        taken.insert(y.clone());
        rename_bound(&mut out, x, &y);
    }
    let leaves: Vec<(StateId, Name)> = (0..out.states.len())
        .filter_map(|s| out.var_leaf(s).filter(|x| theta.contains_key(*x)).map(|x| (s, x.to_string())))
        .collect();
    for (s, x) in leaves {
        let sub = &theta[&x];
        let base = out.states.len();
        let map = |t: StateId| {
            if t == TERMINAL {
                TERMINAL
            } else if t == sub.start {
                s
            } else {
                base + t - 1
            }
        };
        // Import every non-terminal state except the root, which takes the
        // place of the leaf.
        for (i, st) in sub.states.iter().enumerate().skip(1) {
            if i == sub.start {
                out.states.push(State::default());
                continue;
            }
            out.states.push(State {
                edges: st.edges.iter().map(|(a, t)| (a.clone(), map(*t))).collect(),
                function: st.function.clone(),
            });
        }
        let root = &sub.states[sub.start];
        out.states[s] = State {
            edges: root.edges.iter().map(|(a, t)| (a.clone(), map(*t))).collect(),
            function: root.function.clone(),
        };
        out.back_edges.extend(sub.back_edges.iter().map(|&(a, b)| (map(a), map(b))));
    }
    out
}

/// Rooted isomorphism between two graphs, pairing states from the roots.
/// Bound names must correspond one-to-one; free names must be equal.
pub fn isomorphic(a: &Lts, b: &Lts) -> bool {
    let mut pairs: HashMap<StateId, StateId> = HashMap::new();
    let mut back: HashMap<StateId, StateId> = HashMap::new();
    let mut names: HashMap<Name, Name> = HashMap::new();
    let mut names_back: HashMap<Name, Name> = HashMap::new();
    let mut work = vec![(a.start, b.start)];
    let bound_a = binders(a);
    let bound_b = binders(b);
    let mut same_name = |x: &str, y: &str| -> bool {
        match (bound_a.contains(x), bound_b.contains(y)) {
            (false, false) => x == y,
            (true, true) => {
                let ok_fwd = names.get(x).is_none_or(|v| v == y);
                let ok_back = names_back.get(y).is_none_or(|v| v == x);
                if ok_fwd && ok_back {
                    names.insert(x.to_string(), y.to_string());
                    names_back.insert(y.to_string(), x.to_string());
                    true
                } else {
                    false
                }
            }
            _ => false,
        }
    };
    while let Some((s, t)) = work.pop() {
        match (pairs.get(&s), back.get(&t)) {
            (Some(&t2), _) if t2 == t => continue,
            (None, None) => {
                pairs.insert(s, t);
                back.insert(t, s);
            }
            _ => return false,
        }
        let (ea, eb) = (a.edges(s), b.edges(t));
        if ea.len() != eb.len() || a.is_function(s) != b.is_function(t) {
            return false;
        }
        for ((x, s2), (y, t2)) in ea.iter().zip(eb) {
            let ok = match (x, y) {
                (Action::Var(p), Action::Var(q)) => same_name(p, q),
                (Action::Lambda(p), Action::Lambda(q)) | (Action::LetBinding(p), Action::LetBinding(q)) => {
                    same_name(p, q)
                }
                (Action::ClauseHead(ps), Action::ClauseHead(qs)) => {
                    ps.len() == qs.len() && ps.iter().zip(qs).all(|(p, q)| same_pattern(p, q, &mut same_name))
                }
                _ => x == y,
            };
            if !ok {
                return false;
            }
            work.push((*s2, *t2));
        }
    }
    true
}

fn same_pattern(p: &Pattern, q: &Pattern, same_name: &mut impl FnMut(&str, &str) -> bool) -> bool {
    match (p, q) {
        (Pattern::Var(x), Pattern::Var(y)) => same_name(x, y),
        (Pattern::Con(c, ps), Pattern::Con(d, qs)) => {
            c == d && ps.len() == qs.len() && ps.iter().zip(qs).all(|(a, b)| same_pattern(a, b, same_name))
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::lang::{parse_expr_in, parse_program};

    #[test]
    fn identity_lambda() {
        let p = parse_program("main = 0;;").unwrap();
        let e = parse_expr_in(&p, "\\x. x").unwrap();
        let l = build_expr_lts(&p, &e).unwrap();
        assert_eq!(l.len(), 3);
        let s1 = l.follow(l.start, &Action::Lambda("x".into())).unwrap();
        assert_eq!(l.edges(s1), &[(Action::Var("x".into()), TERMINAL)]);
    }

    #[test]
    fn recursion_becomes_a_cycle() {
        let p = corpus::entry("dotp").unwrap().program().unwrap();
        let l = build_function_lts(&p, "dotP").unwrap();
        assert_eq!(l.start, l.function_state("dotP").unwrap());
        assert_eq!(l.clauses(l.start).len(), 3);
        assert_eq!(l.back_edges.len(), 2);
        assert!(l.back_edges.iter().all(|&(_, t)| t == l.start));
    }

    #[test]
    fn state_count_is_bounded_by_program_size() {
        for e in corpus::corpus() {
            let p = e.program().unwrap();
            let l = build_lts(&p).unwrap();
            assert!(l.len() <= p.size(), "{}: {} states for {} nodes", e.id, l.len(), p.size());
        }
    }

    #[test]
    fn substitution_replaces_leaves() {
        let p = parse_program("data C ::= K;; main = 0;;").unwrap();
        let x = build_expr_lts(&p, &Expr::var("x")).unwrap();
        let c = build_expr_lts(&p, &Expr::Con("K".into(), vec![])).unwrap();
        let theta: HashMap<Name, Lts> = [("x".to_string(), c.clone())].into_iter().collect();
        assert!(isomorphic(&lts_substitute(&x, &theta), &c));
        assert!(isomorphic(&lts_substitute(&c, &HashMap::new()), &c));
    }

    #[test]
    fn substitution_avoids_capture() {
        let p = parse_program("main = 0;;").unwrap();
        let lam = build_expr_lts(&p, &Expr::lam("y", Expr::app(Expr::var("f"), [Expr::var("y")]))).unwrap();
        let free_y = build_expr_lts(&p, &Expr::var("y")).unwrap();
        let theta: HashMap<Name, Lts> = [("f".to_string(), free_y)].into_iter().collect();
        let out = lts_substitute(&lam, &theta);
        let expected = build_expr_lts(&p, &Expr::lam("z", Expr::app(Expr::var("y"), [Expr::var("z")]))).unwrap();
        assert!(isomorphic(&out, &expected));
    }

    #[test]
    fn isomorphism_respects_bound_names() {
        let p = parse_program("main = 0;;").unwrap();
        let a = build_expr_lts(&p, &Expr::lam("x", Expr::var("x"))).unwrap();
        let b = build_expr_lts(&p, &Expr::lam("y", Expr::var("y"))).unwrap();
        let c = build_expr_lts(&p, &Expr::lam("y", Expr::var("z"))).unwrap();
        assert!(isomorphic(&a, &b));
        assert!(!isomorphic(&a, &c));
    }
}
