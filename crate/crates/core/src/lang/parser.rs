//! Recursive-descent parser for `.mfl` source.
//!
//! Constructor arities are collected in a first pass over the `data`
//! declarations so that constructor applications can be checked while
//! parsing; name resolution and renaming happen afterwards in `resolve`.

use std::collections::{BTreeMap, HashMap};

use super::ast::*;
use super::check;
use super::lexer::{lex, Tok, Token, GENERATED_PRAGMA};
use super::resolve;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct ParseOptions {
    /// Reject definitions whose clauses do not cover every constructor.
    /// Generated files are exempt by default: encoded functions never
    /// receive the empty list and have no clause for it.
    pub require_exhaustive: bool,
    /// Make the builtin list functions (`map`, `mapReduce`, ...) visible.
    pub with_prelude: bool,
}

impl ParseOptions {
    pub fn for_source(src: &str) -> ParseOptions {
        let generated = src.lines().next().map(str::trim) == Some(GENERATED_PRAGMA);
        ParseOptions { require_exhaustive: !generated, with_prelude: true }
    }
}

pub fn parse_program(src: &str) -> Result<Program> {
    parse_program_with(src, ParseOptions::for_source(src))
}

pub fn parse_program_with(src: &str, opts: ParseOptions) -> Result<Program> {
    let toks = lex(src)?;
    let types = collect_types(&toks)?;
    let mut arities: HashMap<Name, usize> = HashMap::new();
    arities.insert(NIL.into(), 0);
    arities.insert(CONS.into(), 2);
    for t in &types {
        if t.name == LIST || t.name == INT {
            return Err(Error::invalid(format!("type `{}` is builtin", t.name)));
        }
        for c in &t.ctors {
            if arities.insert(c.name.clone(), c.fields.len()).is_some() {
                return Err(Error::invalid(format!("constructor `{}` declared twice", c.name)));
            }
        }
    }
    let mut p = Parser { toks: &toks, pos: 0, arities: &arities };
    let items = p.items()?;
    let prog = assemble(types, items)?;
    let prog = resolve::resolve_program(prog, opts.with_prelude)?;
    check::check_program(&prog, opts.require_exhaustive)?;
    Ok(prog)
}

/// Parses a closed expression (e.g. a program input) using the
/// constructors declared in `prog`.
pub fn parse_expr_in(prog: &Program, src: &str) -> Result<Expr> {
    let toks = lex(src)?;
    let mut arities: HashMap<Name, usize> = HashMap::new();
    arities.insert(NIL.into(), 0);
    arities.insert(CONS.into(), 2);
    for t in &prog.types {
        for c in &t.ctors {
            arities.insert(c.name.clone(), c.fields.len());
        }
    }
    let mut p = Parser { toks: &toks, pos: 0, arities: &arities };
    let e = p.expr()?;
    if p.peek() != &Tok::Eof {
        return Err(p.error("trailing input after expression"));
    }
    resolve::resolve_expr(prog, e)
}

enum Item {
    Data,
    Sig(Name, Type),
    Clause(Name, Clause, usize),
}

fn collect_types(toks: &[Token]) -> Result<Vec<TypeDecl>> {
    let empty = HashMap::new();
    let mut p = Parser { toks, pos: 0, arities: &empty };
    let mut out = Vec::new();
    let mut at_item_start = true;
    while p.peek() != &Tok::Eof {
        if at_item_start && p.peek() == &Tok::Data {
            out.push(p.data_decl()?);
            continue;
        }
        at_item_start = p.next().tok == Tok::End;
    }
    Ok(out)
}

fn assemble(types: Vec<TypeDecl>, items: Vec<Item>) -> Result<Program> {
    let mut sigs = BTreeMap::new();
    let mut defs: Vec<FunDef> = Vec::new();
    let mut main: Option<(Vec<Name>, Expr)> = None;
    let mut last_name: Option<Name> = None;
    for item in items {
        match item {
            Item::Data => last_name = None,
            Item::Sig(name, ty) => {
                if sigs.insert(name.clone(), ty).is_some() {
                    return Err(Error::invalid(format!("duplicate signature for `{name}`")));
                }
                last_name = None;
            }
            Item::Clause(name, clause, line) => {
                if name == "main" {
                    if main.is_some() {
                        return Err(Error::invalid(format!("line {line}: `main` defined twice")));
                    }
                    let mut params = Vec::new();
                    for p in &clause.params {
                        match p {
                            Pattern::Var(x) => params.push(x.clone()),
                            _ => return Err(Error::invalid("`main` parameters must be variables")),
                        }
                    }
                    main = Some((params, clause.body));
                    last_name = None;
                    continue;
                }
                if last_name.as_deref() == Some(name.as_str()) {
                    defs.last_mut().expect("previous clause").clauses.push(clause);
                } else {
                    if defs.iter().any(|d| d.name == name) {
                        return Err(Error::invalid(format!("line {line}: clauses of `{name}` must be consecutive")));
                    }
                    defs.push(FunDef { name: name.clone(), clauses: vec![clause] });
                    last_name = Some(name);
                }
            }
        }
    }
    let (main_params, main) = main.ok_or_else(|| Error::invalid("program has no `main`"))?;
    for name in sigs.keys() {
        if name != "main" && !defs.iter().any(|d| &d.name == name) {
            return Err(Error::invalid(format!("signature for undefined function `{name}`")));
        }
    }
    Ok(Program { types, sigs, main_params, main, defs })
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    arities: &'a HashMap<Name, usize>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        let t = &self.toks[self.pos];
        Error::Parse { line: t.line, col: t.col, msg: msg.into() }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == &tok {
            self.next();
            Ok(())
        } else {
            Err(self.error(format!("expected {what}, found {}", describe(self.peek()))))
        }
    }

    fn ident(&mut self) -> Result<Name> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.next();
                Ok(x)
            }
            t => Err(self.error(format!("expected identifier, found {}", describe(&t)))),
        }
    }

    fn arity(&self, con: &str) -> Result<usize> {
        self.arities.get(con).copied().ok_or_else(|| self.error(format!("unknown constructor `{con}`")))
    }

    fn items(&mut self) -> Result<Vec<Item>> {
        let mut out = Vec::new();
        while self.peek() != &Tok::Eof {
            if self.peek() == &Tok::End {
                self.next();
                continue;
            }
            let item = match self.peek() {
                Tok::Data => {
                    self.data_decl()?;
                    Item::Data
                }
                Tok::Ident(_) if self.peek_at(1) == &Tok::Sig => {
                    let name = self.ident()?;
                    self.next();
                    Item::Sig(name, self.ty()?)
                }
                Tok::Ident(_) => {
                    let line = self.toks[self.pos].line;
                    let (name, clause) = self.clause()?;
                    Item::Clause(name, clause, line)
                }
                t => return Err(self.error(format!("expected a definition, found {}", describe(t)))),
            };
            out.push(item);
            if self.peek() != &Tok::Eof {
                self.expect(Tok::End, "`;;`")?;
            }
        }
        Ok(out)
    }

    fn data_decl(&mut self) -> Result<TypeDecl> {
        self.expect(Tok::Data, "`data`")?;
        let name = match self.next().tok {
            Tok::ConId(n) => n,
            t => return Err(self.error(format!("expected type name, found {}", describe(&t)))),
        };
        let mut params = Vec::new();
        while let Tok::Ident(_) = self.peek() {
            params.push(self.ident()?);
        }
        self.expect(Tok::DefEq, "`::=`")?;
        let mut ctors = Vec::new();
        loop {
            let cname = match self.next().tok {
                Tok::ConId(n) => n,
                t => return Err(self.error(format!("expected constructor, found {}", describe(&t)))),
            };
            if cname == NIL || cname == CONS {
                return Err(self.error(format!("constructor `{cname}` is builtin")));
            }
            let mut fields = Vec::new();
            while matches!(self.peek(), Tok::Ident(_) | Tok::ConId(_) | Tok::LParen | Tok::LBracket) {
                fields.push(self.atype()?);
            }
            ctors.push(CtorDecl { name: cname, fields });
            if self.peek() == &Tok::Bar {
                self.next();
            } else {
                break;
            }
        }
        Ok(TypeDecl { name, params, ctors })
    }

    fn ty(&mut self) -> Result<Type> {
        let lhs = self.btype()?;
        if self.peek() == &Tok::Arrow {
            self.next();
            Ok(Type::Arrow(Box::new(lhs), Box::new(self.ty()?)))
        } else {
            Ok(lhs)
        }
    }

    fn btype(&mut self) -> Result<Type> {
        if let Tok::ConId(c) = self.peek().clone() {
            self.next();
            let mut args = Vec::new();
            while matches!(self.peek(), Tok::Ident(_) | Tok::ConId(_) | Tok::LParen | Tok::LBracket) {
                args.push(self.atype()?);
            }
            return Ok(Type::Con(c, args));
        }
        self.atype()
    }

    fn atype(&mut self) -> Result<Type> {
        match self.next().tok {
            Tok::Ident(v) => Ok(Type::Var(v)),
            Tok::ConId(c) => Ok(Type::Con(c, vec![])),
            Tok::LBracket => {
                let t = self.ty()?;
                self.expect(Tok::RBracket, "`]`")?;
                Ok(Type::list(t))
            }
            Tok::LParen => {
                let t = self.ty()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            t => Err(self.error(format!("expected a type, found {}", describe(&t)))),
        }
    }

    fn clause(&mut self) -> Result<(Name, Clause)> {
        let name = self.ident()?;
        let mut params = Vec::new();
        while self.peek() != &Tok::Eq {
            params.push(self.apat()?);
        }
        self.next();
        let body = self.expr()?;
        Ok((name, Clause { params, body }))
    }

    fn pattern(&mut self) -> Result<Pattern> {
        let head = self.cpat()?;
        if self.peek() == &Tok::Colon {
            self.next();
            Ok(Pattern::cons(head, self.pattern()?))
        } else {
            Ok(head)
        }
    }

    fn cpat(&mut self) -> Result<Pattern> {
        if let Tok::ConId(c) = self.peek().clone() {
            let n = self.arity(&c)?;
            self.next();
            let mut args = Vec::with_capacity(n);
            for _ in 0..n {
                args.push(self.apat()?);
            }
            return Ok(Pattern::Con(c, args));
        }
        self.apat()
    }

    fn apat(&mut self) -> Result<Pattern> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.next();
                Ok(Pattern::Var(x))
            }
            Tok::ConId(c) => {
                let n = self.arity(&c)?;
                if n != 0 {
                    return Err(Error::Arity { name: c, expected: n, found: 0 });
                }
                self.next();
                Ok(Pattern::Con(c, vec![]))
            }
            Tok::LParen => {
                self.next();
                let p = self.pattern()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(p)
            }
            Tok::LBracket => {
                self.next();
                let mut items = Vec::new();
                if self.peek() != &Tok::RBracket {
                    items.push(self.pattern()?);
                    while self.peek() == &Tok::Comma {
                        self.next();
                        items.push(self.pattern()?);
                    }
                }
                self.expect(Tok::RBracket, "`]`")?;
                Ok(items.into_iter().rev().fold(Pattern::nil(), |t, h| Pattern::cons(h, t)))
            }
            t => Err(self.error(format!("expected a pattern, found {}", describe(&t)))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let e = match self.peek() {
            Tok::Backslash => {
                self.next();
                let mut params = vec![self.ident()?];
                while let Tok::Ident(_) = self.peek() {
                    params.push(self.ident()?);
                }
                self.expect(Tok::Dot, "`.`")?;
                let body = self.expr()?;
                return Ok(params.into_iter().rev().fold(body, |b, x| Expr::lam(x, b)));
            }
            Tok::Let => {
                self.next();
                let mut binds = Vec::new();
                loop {
                    let x = self.ident()?;
                    self.expect(Tok::Eq, "`=`")?;
                    binds.push((x, self.expr()?));
                    if self.peek() == &Tok::Semi {
                        self.next();
                    } else {
                        break;
                    }
                }
                self.expect(Tok::In, "`in`")?;
                let body = self.expr()?;
                return Ok(Expr::Let(binds, Box::new(body)));
            }
            _ => self.op_expr(0)?,
        };
        let mut e = e;
        while self.peek() == &Tok::Where {
            self.next();
            e = Expr::Where(Box::new(e), self.where_block()?);
        }
        Ok(e)
    }

    fn where_block(&mut self) -> Result<Vec<FunDef>> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut defs: Vec<FunDef> = Vec::new();
        while self.peek() != &Tok::RBrace {
            let (name, clause) = self.clause()?;
            match defs.last_mut() {
                Some(d) if d.name == name => d.clauses.push(clause),
                _ => {
                    if defs.iter().any(|d| d.name == name) {
                        return Err(self.error(format!("clauses of `{name}` must be consecutive")));
                    }
                    defs.push(FunDef { name, clauses: vec![clause] });
                }
            }
            if self.peek() == &Tok::Semi {
                self.next();
            } else {
                break;
            }
        }
        self.expect(Tok::RBrace, "`}`")?;
        Ok(defs)
    }

    fn op_expr(&mut self, min_prec: u8) -> Result<Expr> {
        let mut lhs = self.app_expr()?;
        loop {
            let (prec, right) = match self.peek() {
                Tok::Colon | Tok::Append => (5, true),
                Tok::Plus => (6, false),
                Tok::Star => (7, false),
                _ => break,
            };
            if prec < min_prec {
                break;
            }
            let op = self.next().tok;
            let rhs = self.op_expr(if right { prec } else { prec + 1 })?;
            lhs = match op {
                Tok::Colon => Expr::cons(lhs, rhs),
                Tok::Append => Expr::app(Expr::fun("++"), [lhs, rhs]),
                Tok::Plus => Expr::app(Expr::fun("+"), [lhs, rhs]),
                _ => Expr::app(Expr::fun("*"), [lhs, rhs]),
            };
        }
        Ok(lhs)
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_) | Tok::ConId(_) | Tok::Int(_) | Tok::LParen | Tok::LBracket)
    }

    fn app_expr(&mut self) -> Result<Expr> {
        if let Tok::ConId(c) = self.peek().clone() {
            let n = self.arity(&c)?;
            self.next();
            let mut args = Vec::with_capacity(n);
            while self.starts_atom() {
                args.push(self.atom()?);
            }
            if args.len() != n {
                return Err(Error::Arity { name: c, expected: n, found: args.len() });
            }
            return Ok(Expr::Con(c, args));
        }
        let head = self.atom()?;
        let mut args = Vec::new();
        while self.starts_atom() {
            args.push(self.atom()?);
        }
        Ok(Expr::app(head, args))
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.next();
                Ok(Expr::Var(x))
            }
            Tok::Int(n) => {
                self.next();
                Ok(Expr::Int(n))
            }
            Tok::ConId(c) => {
                let n = self.arity(&c)?;
                if n != 0 {
                    return Err(Error::Arity { name: c, expected: n, found: 0 });
                }
                self.next();
                Ok(Expr::Con(c, vec![]))
            }
            Tok::LParen => {
                self.next();
                let section = match self.peek() {
                    Tok::Plus => Some("+"),
                    Tok::Star => Some("*"),
                    Tok::Append => Some("++"),
                    _ => None,
                };
                if let (Some(op), Tok::RParen) = (section, self.peek_at(1)) {
                    self.next();
                    self.next();
                    return Ok(Expr::fun(op));
                }
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::LBracket => {
                self.next();
                let mut items = Vec::new();
                if self.peek() != &Tok::RBracket {
                    items.push(self.expr()?);
                    while self.peek() == &Tok::Comma {
                        self.next();
                        items.push(self.expr()?);
                    }
                }
                self.expect(Tok::RBracket, "`]`")?;
                Ok(Expr::list(items))
            }
            t => Err(self.error(format!("expected an expression, found {}", describe(&t)))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(x) => format!("`{x}`"),
        Tok::ConId(x) => format!("`{x}`"),
        Tok::Int(n) => format!("`{n}`"),
        Tok::Eof => "end of input".into(),
        other => format!("{other:?}"),
    }
}
