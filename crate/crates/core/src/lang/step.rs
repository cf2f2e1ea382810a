//! Small-step leftmost-outermost reduction over expressions.
//!
//! This is a direct term-rewriting evaluator without sharing. It is slow
//! but simple, and serves as a reference for the environment machine.

use std::collections::HashMap;

use super::ast::*;
use super::names::fresh_avoiding;
use super::prelude;
use super::subst::{free_vars, substitute};
use super::value::Value;
use crate::error::{Error, Result};

pub struct Stepper<'p> {
    defs: HashMap<&'p str, &'p FunDef>,
}

enum MatchStep {
    Yes(Vec<(Name, Expr)>),
    No,
    Stepped(Expr),
}

impl<'p> Stepper<'p> {
    /// `prog` must be lambda-lifted.
    pub fn new(prog: &'p Program) -> Result<Stepper<'p>> {
        if prog.has_where() {
            return Err(Error::invalid("program must be lambda-lifted before stepping"));
        }
        let mut defs: HashMap<&str, &FunDef> = prelude::defs().iter().map(|d| (d.name.as_str(), d)).collect();
        for d in &prog.defs {
            defs.insert(d.name.as_str(), d);
        }
        Ok(Stepper { defs })
    }

    fn arity(&self, f: &str) -> Result<usize> {
        if matches!(f, "+" | "*") {
            return Ok(2);
        }
        self.defs.get(f).map(|d| d.arity()).ok_or_else(|| Error::Unbound(f.to_string()))
    }

    /// One reduction step, or `None` when `e` is in normal form.
    pub fn step(&self, e: &Expr) -> Result<Option<Expr>> {
        match e {
            Expr::Var(x) => Err(Error::Unbound(x.clone())),
            Expr::Int(_) | Expr::Lam(..) => Ok(None),
            Expr::Where(..) => Err(Error::invalid("local definitions must be lambda-lifted")),
            Expr::Con(c, args) => {
                for (i, a) in args.iter().enumerate() {
                    if let Some(a2) = self.step(a)? {
                        let mut args = args.clone();
                        args[i] = a2;
                        return Ok(Some(Expr::Con(c.clone(), args)));
                    }
                }
                Ok(None)
            }
            Expr::Let(binds, body) => {
                let map: HashMap<Name, Expr> = binds.iter().cloned().collect();
                Ok(Some(substitute(body, &map)))
            }
            Expr::Fun(f) => {
                if self.arity(f)? == 0 {
                    Ok(Some(self.defs[f.as_str()].clauses[0].body.clone()))
                } else {
                    Ok(None)
                }
            }
            Expr::App(..) => {
                let (head, args) = e.spine();
                let args: Vec<Expr> = args.into_iter().cloned().collect();
                self.step_app(head, args)
            }
        }
    }

    fn step_app(&self, head: &Expr, args: Vec<Expr>) -> Result<Option<Expr>> {
        match head {
            Expr::Lam(x, body) => {
                let mut rest = args.into_iter();
                let a = rest.next().expect("application has an argument");
                let mut m = HashMap::new();
                m.insert(x.clone(), a);
                Ok(Some(Expr::app(substitute(body, &m), rest)))
            }
            Expr::Fun(f) if matches!(f.as_str(), "+" | "*") => {
                if args.len() < 2 {
                    return Ok(None);
                }
                for i in 0..2 {
                    if !matches!(args[i], Expr::Int(_)) {
                        return match self.step(&args[i])? {
                            Some(a2) => {
                                let mut args = args;
                                args[i] = a2;
                                Ok(Some(Expr::app(head.clone(), args)))
                            }
                            None => Err(Error::runtime(format!("`{f}` applied to a non-integer {}", args[i]))),
                        };
                    }
                }
                let (Expr::Int(a), Expr::Int(b)) = (&args[0], &args[1]) else { unreachable!() };
                let r = if f == "+" { a.wrapping_add(*b) } else { a.wrapping_mul(*b) };
                Ok(Some(Expr::app(Expr::Int(r), args.into_iter().skip(2))))
            }
            Expr::Fun(f) => {
                let n = self.arity(f)?;
                if args.len() < n {
                    return Ok(None);
                }
                let def = self.defs[f.as_str()];
                for c in &def.clauses {
                    let mut binds = Vec::new();
                    let mut matched = true;
                    for (j, p) in c.params.iter().enumerate() {
                        match self.step_match(p, &args[j])? {
                            MatchStep::Yes(b) => binds.extend(b),
                            MatchStep::No => {
                                matched = false;
                                break;
                            }
                            MatchStep::Stepped(a2) => {
                                let mut args = args;
                                args[j] = a2;
                                return Ok(Some(Expr::app(head.clone(), args)));
                            }
                        }
                    }
                    if matched {
                        let map: HashMap<Name, Expr> = binds.into_iter().collect();
                        let body = substitute(&c.body, &map);
                        return Ok(Some(Expr::app(body, args.into_iter().skip(n))));
                    }
                }
                Err(Error::runtime(format!("no clause of `{f}` matches its arguments")))
            }
            Expr::Let(..) | Expr::App(..) => match self.step(head)? {
                Some(h2) => Ok(Some(Expr::app(h2, args))),
                None => Err(Error::runtime(format!("cannot apply {head}"))),
            },
            Expr::Var(x) => Err(Error::Unbound(x.clone())),
            other => Err(Error::runtime(format!("cannot apply {other} to an argument"))),
        }
    }

    fn step_match(&self, p: &Pattern, e: &Expr) -> Result<MatchStep> {
        match p {
            Pattern::Var(x) => Ok(MatchStep::Yes(vec![(x.clone(), e.clone())])),
            Pattern::Con(c, ps) => match e {
                Expr::Con(d, args) => {
                    if c != d {
                        return Ok(MatchStep::No);
                    }
                    let mut binds = Vec::new();
                    for (i, (q, a)) in ps.iter().zip(args).enumerate() {
                        match self.step_match(q, a)? {
                            MatchStep::Yes(b) => binds.extend(b),
                            MatchStep::No => return Ok(MatchStep::No),
                            MatchStep::Stepped(a2) => {
                                let mut args = args.clone();
                                args[i] = a2;
                                return Ok(MatchStep::Stepped(Expr::Con(d.clone(), args)));
                            }
                        }
                    }
                    Ok(MatchStep::Yes(binds))
                }
                _ => match self.step_whnf(e)? {
                    Some(e2) => Ok(MatchStep::Stepped(e2)),
                    None => Err(Error::runtime(format!("cannot match {e} against constructor `{c}`"))),
                },
            },
        }
    }

    /// Steps `e` towards weak head normal form only.
    fn step_whnf(&self, e: &Expr) -> Result<Option<Expr>> {
        match e {
            Expr::Con(..) => Ok(None),
            _ => self.step(e),
        }
    }

    /// Reduces to full normal form and converts to a value.
    pub fn normalize(&self, e: &Expr, fuel: u64) -> Result<(Value, u64)> {
        let mut cur = e.clone();
        let mut steps = 0;
        while let Some(next) = self.step(&cur)? {
            steps += 1;
            if steps > fuel {
                return Err(Error::FuelExhausted(fuel));
            }
            cur = next;
        }
        Ok((self.to_value(&cur)?, steps))
    }

    fn to_value(&self, e: &Expr) -> Result<Value> {
        match e {
            Expr::Int(n) => Ok(Value::Int(*n)),
            Expr::Con(c, args) => {
                Ok(Value::Con(c.clone(), args.iter().map(|a| self.to_value(a)).collect::<Result<_>>()?))
            }
            Expr::Lam(x, body) => Ok(Value::Closure { param: x.clone(), body: (**body).clone() }),
            _ => {
                // Partial application: eta-expand into a lambda.
                let (head, args) = e.spine();
                let Expr::Fun(f) = head else {
                    return Err(Error::runtime(format!("stuck term {e}")));
                };
                let missing = self.arity(f)? - args.len();
                let taken = free_vars(e);
                let mut params: Vec<Name> = Vec::new();
                for _ in 0..missing {
                    let p = fresh_avoiding("x", |n| taken.contains(n) || params.iter().any(|q| q == n));
                    params.push(p);
                }
                let body = Expr::app(e.clone(), params.iter().map(Expr::var));
                let lam = params.iter().rev().fold(body, |b, p| Expr::lam(p.clone(), b));
                self.to_value(&lam)
            }
        }
    }
}

/// Reference evaluation of `main` applied to `args` by repeated stepping.
pub fn evaluate_by_steps(prog: &Program, args: &[Value], fuel: u64) -> Result<Value> {
    let lifted = super::lift::lambda_lift(prog);
    let map: HashMap<Name, Expr> = lifted.main_params.iter().cloned().zip(args.iter().map(Value::to_expr)).collect();
    let e = substitute(&lifted.main, &map);
    super::eval::with_big_stack(|| {
        let s = Stepper::new(&lifted)?;
        s.normalize(&e, fuel).map(|(v, _)| v)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    fn prog(src: &str) -> Program {
        parse_program(src).unwrap()
    }

    #[test]
    fn beta_and_let_rules() {
        let p = prog("data C ::= K;; main = K;;");
        let s = Stepper::new(&p).unwrap();
        let id = Expr::app(Expr::lam("x", Expr::var("x")), [Expr::Con("K".into(), vec![])]);
        assert_eq!(s.step(&id).unwrap(), Some(Expr::Con("K".into(), vec![])));
        let e = Expr::Let(vec![("v".into(), Expr::Int(1))], Box::new(Expr::var("v")));
        assert_eq!(s.step(&e).unwrap(), Some(Expr::Int(1)));
    }

    #[test]
    fn unfolds_map_on_empty_list() {
        let p = prog("main = 0;;");
        let s = Stepper::new(&p).unwrap();
        let e = Expr::app(Expr::fun("map"), [Expr::nil(), Expr::var("f")]);
        assert_eq!(s.step(&e).unwrap(), Some(Expr::nil()));
    }

    #[test]
    fn forces_arguments_only_for_patterns() {
        let p = prog("loop x = loop x;; hd [] = 0;; hd (x : xs) = x;; main = hd (1 : loop 0);;");
        assert_eq!(evaluate_by_steps(&p, &[], 1000).unwrap(), Value::Int(1));
    }

    #[test]
    fn agrees_with_machine_on_small_program() {
        let p = prog("sum [] = 0;; sum (x : xs) = x + sum xs;; main xs = sum (map xs (\\y. y * y));;");
        let xs = Value::list([1, 2, 3].map(Value::Int));
        let a = evaluate_by_steps(&p, std::slice::from_ref(&xs), 10_000).unwrap();
        let b = crate::lang::evaluate(&p, &[xs], 10_000).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, Value::Int(14));
    }
}
