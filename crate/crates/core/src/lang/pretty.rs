//! Pretty printer emitting the same concrete syntax the parser accepts.

use std::fmt::{self, Display, Write};

use super::ast::*;
use super::lexer::GENERATED_PRAGMA;

const P_LOW: u8 = 0;
const P_WHERE_BODY: u8 = 1;
const P_APP: u8 = 10;
const P_ATOM: u8 = 11;

fn binop(e: &Expr) -> Option<(&'static str, &Expr, &Expr)> {
    if let Expr::App(f, r) = e {
        if let Expr::App(op, l) = &**f {
            if let Expr::Fun(name) = &**op {
                let sym = match name.as_str() {
                    "+" => "+",
                    "*" => "*",
                    "++" => "++",
                    _ => return None,
                };
                return Some((sym, l, r));
            }
        }
    }
    None
}

fn list_items(e: &Expr) -> Option<Vec<&Expr>> {
    let mut items = Vec::new();
    let mut cur = e;
    loop {
        match cur {
            Expr::Con(c, args) if c == CONS => {
                items.push(&args[0]);
                cur = &args[1];
            }
            Expr::Con(c, _) if c == NIL => return Some(items),
            _ => return None,
        }
    }
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Lam(..) | Expr::Let(..) | Expr::Where(..) => P_LOW,
        Expr::Con(c, _) if c == CONS => {
            if list_items(e).is_some() {
                P_ATOM
            } else {
                5
            }
        }
        Expr::Con(_, args) if !args.is_empty() => P_APP,
        Expr::App(..) => match binop(e) {
            Some(("+", ..)) => 6,
            Some(("*", ..)) => 7,
            Some(_) => 5,
            None => P_APP,
        },
        _ => P_ATOM,
    }
}

fn write_expr(out: &mut String, e: &Expr, ctx: u8) {
    let paren = prec(e) < ctx;
    if paren {
        out.push('(');
    }
    match e {
        Expr::Var(x) => out.push_str(x),
        Expr::Int(n) => {
            let _ = write!(out, "{n}");
        }
        Expr::Fun(f) => {
            if matches!(f.as_str(), "+" | "*" | "++") {
                let _ = write!(out, "({f})");
            } else {
                out.push_str(f);
            }
        }
        Expr::Con(c, args) => {
            if c == NIL {
                out.push_str("[]");
            } else if let Some(items) = list_items(e) {
                out.push('[');
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_expr(out, it, P_LOW);
                }
                out.push(']');
            } else if c == CONS {
                write_expr(out, &args[0], 6);
                out.push_str(" : ");
                write_expr(out, &args[1], 5);
            } else {
                out.push_str(c);
                for a in args {
                    out.push(' ');
                    write_expr(out, a, P_ATOM);
                }
            }
        }
        Expr::App(..) => {
            if let Some((op, l, r)) = binop(e) {
                let (lp, rp) = match op {
                    "+" => (6, 7),
                    "*" => (7, 8),
                    _ => (6, 5),
                };
                write_expr(out, l, lp);
                let _ = write!(out, " {op} ");
                write_expr(out, r, rp);
            } else {
                let (head, args) = e.spine();
                write_expr(out, head, P_ATOM);
                for a in args {
                    out.push(' ');
                    write_expr(out, a, P_ATOM);
                }
            }
        }
        Expr::Lam(..) => {
            out.push('\\');
            let mut cur = e;
            let mut first = true;
            while let Expr::Lam(x, body) = cur {
                if !first {
                    out.push(' ');
                }
                out.push_str(x);
                first = false;
                cur = body;
            }
            out.push_str(". ");
            write_expr(out, cur, P_LOW);
        }
        Expr::Let(binds, body) => {
            out.push_str("let ");
            for (i, (x, rhs)) in binds.iter().enumerate() {
                if i > 0 {
                    out.push_str("; ");
                }
                let _ = write!(out, "{x} = ");
                write_expr(out, rhs, P_LOW);
            }
            out.push_str(" in ");
            write_expr(out, body, P_LOW);
        }
        Expr::Where(body, defs) => {
            write_expr(out, body, P_WHERE_BODY);
            out.push_str(" where { ");
            let mut first = true;
            for d in defs {
                for c in &d.clauses {
                    if !first {
                        out.push_str("; ");
                    }
                    first = false;
                    write_clause(out, &d.name, c);
                }
            }
            out.push_str(" }");
        }
    }
    if paren {
        out.push(')');
    }
}

fn write_clause(out: &mut String, name: &str, c: &Clause) {
    out.push_str(name);
    for p in &c.params {
        out.push(' ');
        out.push_str(&pattern_atom(p));
    }
    out.push_str(" = ");
    write_expr(out, &c.body, P_LOW);
}

fn pattern_str(p: &Pattern, atomic: bool) -> String {
    match p {
        Pattern::Var(x) => x.clone(),
        Pattern::Con(c, ps) if c == NIL && ps.is_empty() => "[]".into(),
        Pattern::Con(c, ps) if c == CONS => {
            let s = format!("{} : {}", pattern_str(&ps[0], true), pattern_str(&ps[1], false));
            if atomic {
                format!("({s})")
            } else {
                s
            }
        }
        Pattern::Con(c, ps) if ps.is_empty() => c.clone(),
        Pattern::Con(c, ps) => {
            let args: Vec<String> = ps.iter().map(|q| pattern_str(q, true)).collect();
            let s = format!("{c} {}", args.join(" "));
            if atomic {
                format!("({s})")
            } else {
                s
            }
        }
    }
}

/// A pattern in argument position, parenthesised when needed.
pub fn pattern_atom(p: &Pattern) -> String {
    pattern_str(p, true)
}

fn type_str(t: &Type, ctx: u8) -> String {
    match t {
        Type::Var(v) => v.clone(),
        Type::Con(c, args) if c == LIST && args.len() == 1 => format!("[{}]", type_str(&args[0], 0)),
        Type::Con(c, args) if args.is_empty() => c.clone(),
        Type::Con(c, args) => {
            let parts: Vec<String> = args.iter().map(|a| type_str(a, 2)).collect();
            let s = format!("{c} {}", parts.join(" "));
            if ctx >= 2 {
                format!("({s})")
            } else {
                s
            }
        }
        Type::Arrow(a, b) => {
            let s = format!("{} -> {}", type_str(a, 1), type_str(b, 0));
            if ctx >= 1 {
                format!("({s})")
            } else {
                s
            }
        }
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(&mut s, self, P_LOW);
        f.write_str(&s)
    }
}

impl Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pattern_str(self, false))
    }
}

impl Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&type_str(self, 0))
    }
}

impl Display for TypeDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "data {}", self.name)?;
        for p in &self.params {
            write!(f, " {p}")?;
        }
        f.write_str(" ::= ")?;
        for (i, c) in self.ctors.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            f.write_str(&c.name)?;
            for t in &c.fields {
                write!(f, " {}", type_str(t, 2))?;
            }
        }
        Ok(())
    }
}

pub fn clause_to_string(name: &str, c: &Clause) -> String {
    let mut s = String::new();
    write_clause(&mut s, name, c);
    s
}

pub fn def_to_string(d: &FunDef) -> String {
    d.clauses.iter().map(|c| format!("{};;\n", clause_to_string(&d.name, c))).collect()
}

/// Renders a whole program. Output starts with the generated pragma so
/// that generated names and partial encoded functions parse back.
pub fn program_to_string(p: &Program) -> String {
    let mut out = String::new();
    out.push_str(GENERATED_PRAGMA);
    out.push('\n');
    for t in &p.types {
        let _ = writeln!(out, "{t};;");
    }
    if !p.types.is_empty() {
        out.push('\n');
    }
    if let Some(t) = p.sigs.get("main") {
        let _ = writeln!(out, "main :: {t};;");
    }
    let main = Clause { params: p.main_params.iter().map(Pattern::var).collect(), body: p.main.clone() };
    let _ = writeln!(out, "{};;", clause_to_string("main", &main));
    for d in &p.defs {
        out.push('\n');
        if let Some(t) = p.sigs.get(&d.name) {
            let _ = writeln!(out, "{} :: {t};;", d.name);
        }
        out.push_str(&def_to_string(d));
    }
    out
}

impl Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&program_to_string(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    #[test]
    fn prints_operators_with_minimal_parens() {
        let p = parse_program("main a b c = (a + b) * c + a * (b + c) : [] ++ [a, b];;").unwrap();
        assert_eq!(p.main.to_string(), "(a + b) * c + a * (b + c) : [] ++ [a, b]");
    }

    #[test]
    fn round_trips_binders_and_where() {
        let src = "main xs = let v = \\y z. g y where { g [] = 0; g (x : ys) = x } in map xs (v 1);;";
        let p = parse_program(src).unwrap();
        let again = parse_program(&program_to_string(&p)).unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn prints_types() {
        let t = Type::Arrow(
            Box::new(Type::list(Type::list(Type::Var("a".into())))),
            Box::new(Type::Arrow(
                Box::new(Type::Arrow(Box::new(Type::Var("a".into())), Box::new(Type::Var("a".into())))),
                Box::new(Type::Con("BTree".into(), vec![Type::Var("a".into())])),
            )),
        );
        assert_eq!(t.to_string(), "[[a]] -> (a -> a) -> BTree a");
    }
}
