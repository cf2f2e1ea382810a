//! Abstract syntax of the language: expressions, patterns, function
//! definitions, type declarations and whole programs.

use std::collections::BTreeMap;

pub type Name = String;

/// Name of the builtin empty-list constructor, printed as `[]`.
pub const NIL: &str = "Nil";
/// Name of the builtin list-cell constructor, printed as `x : xs`.
pub const CONS: &str = "Cons";
/// Name of the builtin list type, printed as `[a]`.
pub const LIST: &str = "List";
pub const INT: &str = "Int";

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(Name),
    /// Saturated constructor application.
    Con(Name, Vec<Expr>),
    Int(i64),
    /// Reference to a top-level, local (`where`) or builtin function.
    Fun(Name),
    App(Box<Expr>, Box<Expr>),
    /// Non-recursive `let`; right-hand sides are scoped outside the bindings.
    Let(Vec<(Name, Expr)>, Box<Expr>),
    Lam(Name, Box<Expr>),
    /// `e where { defs }`, local (possibly recursive) function definitions.
    Where(Box<Expr>, Vec<FunDef>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    Var(Name),
    Con(Name, Vec<Pattern>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    pub params: Vec<Pattern>,
    pub body: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FunDef {
    pub name: Name,
    pub clauses: Vec<Clause>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Var(Name),
    Con(Name, Vec<Type>),
    Arrow(Box<Type>, Box<Type>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CtorDecl {
    pub name: Name,
    pub fields: Vec<Type>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TypeDecl {
    pub name: Name,
    pub params: Vec<Name>,
    pub ctors: Vec<CtorDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub types: Vec<TypeDecl>,
    pub sigs: BTreeMap<Name, Type>,
    /// Inputs of the program; free in `main`.
    pub main_params: Vec<Name>,
    pub main: Expr,
    pub defs: Vec<FunDef>,
}

impl Expr {
    pub fn var(name: impl Into<Name>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn fun(name: impl Into<Name>) -> Expr {
        Expr::Fun(name.into())
    }

    pub fn app(head: Expr, args: impl IntoIterator<Item = Expr>) -> Expr {
        args.into_iter().fold(head, |f, a| Expr::App(Box::new(f), Box::new(a)))
    }

    pub fn lam(param: impl Into<Name>, body: Expr) -> Expr {
        Expr::Lam(param.into(), Box::new(body))
    }

    pub fn nil() -> Expr {
        Expr::Con(NIL.into(), vec![])
    }

    pub fn cons(head: Expr, tail: Expr) -> Expr {
        Expr::Con(CONS.into(), vec![head, tail])
    }

    pub fn list(items: impl IntoIterator<Item = Expr>) -> Expr {
        let items: Vec<Expr> = items.into_iter().collect();
        items.into_iter().rev().fold(Expr::nil(), |tail, h| Expr::cons(h, tail))
    }

    /// Splits an application spine into its head and arguments.
    pub fn spine(&self) -> (&Expr, Vec<&Expr>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Expr::App(f, a) = cur {
            args.push(&**a);
            cur = f;
        }
        args.reverse();
        (cur, args)
    }

    pub fn into_spine(self) -> (Expr, Vec<Expr>) {
        let mut args = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Expr::App(f, a) => {
                    args.push(*a);
                    cur = *f;
                }
                other => {
                    args.reverse();
                    return (other, args);
                }
            }
        }
    }

    /// Number of nodes in the expression tree, counting nested definitions.
    pub fn size(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Int(_) | Expr::Fun(_) => 1,
            Expr::Con(_, args) => 1 + args.iter().map(Expr::size).sum::<usize>(),
            Expr::App(f, a) => 1 + f.size() + a.size(),
            Expr::Let(bs, body) => 1 + body.size() + bs.iter().map(|(_, e)| e.size()).sum::<usize>(),
            Expr::Lam(_, body) => 1 + body.size(),
            Expr::Where(body, defs) => 1 + body.size() + defs.iter().map(FunDef::size).sum::<usize>(),
        }
    }

    pub fn has_where(&self) -> bool {
        match self {
            Expr::Where(..) => true,
            Expr::Var(_) | Expr::Int(_) | Expr::Fun(_) => false,
            Expr::Con(_, args) => args.iter().any(Expr::has_where),
            Expr::App(f, a) => f.has_where() || a.has_where(),
            Expr::Let(bs, body) => body.has_where() || bs.iter().any(|(_, e)| e.has_where()),
            Expr::Lam(_, body) => body.has_where(),
        }
    }

    /// Calls `visit` on every sub-expression in pre-order, left to right.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Expr)) {
        visit(self);
        match self {
            Expr::Var(_) | Expr::Int(_) | Expr::Fun(_) => {}
            Expr::Con(_, args) => args.iter().for_each(|a| a.walk(visit)),
            Expr::App(f, a) => {
                f.walk(visit);
                a.walk(visit);
            }
            Expr::Let(bs, body) => {
                bs.iter().for_each(|(_, e)| e.walk(visit));
                body.walk(visit);
            }
            Expr::Lam(_, body) => body.walk(visit),
            Expr::Where(body, defs) => {
                body.walk(visit);
                for d in defs {
                    for c in &d.clauses {
                        c.body.walk(visit);
                    }
                }
            }
        }
    }

    /// Names of all functions referenced anywhere in the expression.
    pub fn called_functions(&self) -> Vec<Name> {
        let mut out: Vec<Name> = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Fun(f) = e {
                if !out.contains(f) {
                    out.push(f.clone());
                }
            }
        });
        out
    }
}

impl Pattern {
    pub fn var(name: impl Into<Name>) -> Pattern {
        Pattern::Var(name.into())
    }

    pub fn nil() -> Pattern {
        Pattern::Con(NIL.into(), vec![])
    }

    pub fn cons(head: Pattern, tail: Pattern) -> Pattern {
        Pattern::Con(CONS.into(), vec![head, tail])
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Pattern::Var(_))
    }

    /// Bound variables in left-to-right order.
    pub fn vars(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Name>) {
        match self {
            Pattern::Var(x) => out.push(x.clone()),
            Pattern::Con(_, ps) => ps.iter().for_each(|p| p.collect_vars(out)),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Pattern::Var(_) => 1,
            Pattern::Con(_, ps) => 1 + ps.iter().map(Pattern::size).sum::<usize>(),
        }
    }

    pub fn to_expr(&self) -> Expr {
        match self {
            Pattern::Var(x) => Expr::Var(x.clone()),
            Pattern::Con(c, ps) => Expr::Con(c.clone(), ps.iter().map(Pattern::to_expr).collect()),
        }
    }
}

impl Clause {
    pub fn bound_vars(&self) -> Vec<Name> {
        self.params.iter().flat_map(Pattern::vars).collect()
    }
}

impl FunDef {
    pub fn arity(&self) -> usize {
        self.clauses.first().map_or(0, |c| c.params.len())
    }

    pub fn size(&self) -> usize {
        1 + self
            .clauses
            .iter()
            .map(|c| c.body.size() + c.params.iter().map(Pattern::size).sum::<usize>())
            .sum::<usize>()
    }

    /// True when some clause body calls this function directly.
    pub fn is_self_recursive(&self) -> bool {
        self.clauses.iter().any(|c| c.body.called_functions().iter().any(|f| f == &self.name))
    }
}

impl Type {
    pub fn list(elem: Type) -> Type {
        Type::Con(LIST.into(), vec![elem])
    }

    pub fn int() -> Type {
        Type::Con(INT.into(), vec![])
    }

    /// Splits `a -> b -> c` into `[a, b]` and `c`.
    pub fn split_arrows(&self) -> (Vec<&Type>, &Type) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Type::Arrow(a, b) = cur {
            args.push(&**a);
            cur = b;
        }
        (args, cur)
    }

    pub fn substitute(&self, map: &BTreeMap<Name, Type>) -> Type {
        match self {
            Type::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Type::Con(c, args) => Type::Con(c.clone(), args.iter().map(|t| t.substitute(map)).collect()),
            Type::Arrow(a, b) => Type::Arrow(Box::new(a.substitute(map)), Box::new(b.substitute(map))),
        }
    }

    /// Type variables in first-appearance order.
    pub fn vars(&self, out: &mut Vec<Name>) {
        match self {
            Type::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Type::Con(_, args) => args.iter().for_each(|t| t.vars(out)),
            Type::Arrow(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }
}

/// `data List a ::= Nil | Cons a (List a)`, always in scope.
pub fn list_decl() -> TypeDecl {
    TypeDecl {
        name: LIST.into(),
        params: vec!["a".into()],
        ctors: vec![
            CtorDecl { name: NIL.into(), fields: vec![] },
            CtorDecl { name: CONS.into(), fields: vec![Type::Var("a".into()), Type::list(Type::Var("a".into()))] },
        ],
    }
}

impl Program {
    pub fn def(&self, name: &str) -> Option<&FunDef> {
        self.defs.iter().find(|d| d.name == name)
    }

    pub fn def_mut(&mut self, name: &str) -> Option<&mut FunDef> {
        self.defs.iter_mut().find(|d| d.name == name)
    }

    /// Looks up a constructor among the declared types and the builtin list type.
    pub fn ctor(&self, name: &str) -> Option<(TypeDecl, CtorDecl)> {
        if name == NIL || name == CONS {
            let decl = list_decl();
            let c = decl.ctors.iter().find(|c| c.name == name).cloned()?;
            return Some((decl, c));
        }
        self.types.iter().find_map(|t| t.ctors.iter().find(|c| c.name == name).map(|c| (t.clone(), c.clone())))
    }

    pub fn ctor_arity(&self, name: &str) -> Option<usize> {
        self.ctor(name).map(|(_, c)| c.fields.len())
    }

    /// Sibling constructors (including `name` itself) of the type declaring `name`.
    pub fn siblings(&self, name: &str) -> Option<Vec<(Name, usize)>> {
        self.ctor(name).map(|(t, _)| t.ctors.iter().map(|c| (c.name.clone(), c.fields.len())).collect())
    }

    /// Total node count: main, every definition and every expression node.
    pub fn size(&self) -> usize {
        1 + self.main.size() + self.defs.iter().map(FunDef::size).sum::<usize>()
    }

    pub fn has_where(&self) -> bool {
        self.main.has_where() || self.defs.iter().any(|d| d.clauses.iter().any(|c| c.body.has_where()))
    }

    pub fn def_names(&self) -> Vec<Name> {
        self.defs.iter().map(|d| d.name.clone()).collect()
    }
}
