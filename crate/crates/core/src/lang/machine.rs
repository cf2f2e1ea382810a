//! Environment machine for lambda-lifted programs.
//!
//! Expressions are compiled to a slot-addressed form. Arguments are passed
//! as shared suspensions that are evaluated at most once, which gives the
//! same results as call-by-name substitution for this pure language while
//! avoiding repeated work. Pattern matching forces arguments only as deep
//! as the patterns require.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use super::ast::*;
use super::names::fresh_avoiding;
use super::prelude;
use super::subst::{free_vars, substitute};
use super::value::Value;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimOp {
    Add,
    Mul,
}

impl PrimOp {
    fn from_name(name: &str) -> Option<PrimOp> {
        match name {
            "+" => Some(PrimOp::Add),
            "*" => Some(PrimOp::Mul),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            PrimOp::Add => "+",
            PrimOp::Mul => "*",
        }
    }

    fn apply(self, a: i64, b: i64) -> i64 {
        match self {
            PrimOp::Add => a.wrapping_add(b),
            PrimOp::Mul => a.wrapping_mul(b),
        }
    }
}

enum Code {
    Slot(u32),
    Global(u32),
    Prim(PrimOp),
    Int(i64),
    Con(u32, Vec<Arg>),
    Call(u32, Vec<Arg>),
    PrimCall(PrimOp, Rc<Code>, Rc<Code>),
    Apply(Rc<Code>, Vec<Arg>),
    Let(Vec<(u32, Arg)>, Rc<Code>),
    Lam(u32, Vec<u32>),
}

enum Arg {
    Slot(u32),
    Const(Val),
    Lam(u32, Vec<u32>),
    Delay(u32, Vec<u32>),
}

enum Pat {
    Var(u32),
    Con(u32, Vec<Pat>),
}

struct Body {
    code: Rc<Code>,
    nslots: usize,
}

struct LamInfo {
    body: Body,
    source: Expr,
    captured: Vec<Name>,
}

struct FunInfo {
    name: Name,
    clauses: Vec<(Vec<Pat>, Body)>,
}

/// Runtime value in weak head normal form.
#[derive(Clone)]
pub enum Val {
    Int(i64),
    Con(u32, Rc<[Thunk]>),
    Fun(Rc<FunVal>),
}

pub enum FunVal {
    Closure { lam: u32, env: Vec<Thunk> },
    Partial { head: Head, args: Vec<Thunk> },
}

#[derive(Clone, Copy)]
pub enum Head {
    Global(u32),
    Prim(PrimOp),
}

enum ThunkState {
    Pending(u32, Vec<Thunk>),
    Forcing,
    Done(Val),
}

#[derive(Clone)]
pub struct Thunk(Rc<RefCell<ThunkState>>);

impl Thunk {
    fn done(v: Val) -> Thunk {
        Thunk(Rc::new(RefCell::new(ThunkState::Done(v))))
    }
}

/// The builtin list skeletons that a runtime hook may take over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Skeleton {
    Map,
    MapReduce,
    MapReduce1,
}

impl Skeleton {
    pub fn from_name(name: &str) -> Option<Skeleton> {
        match name {
            "map" => Some(Skeleton::Map),
            "mapReduce" => Some(Skeleton::MapReduce),
            "mapReduce1" => Some(Skeleton::MapReduce1),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Skeleton::Map => "map",
            Skeleton::MapReduce => "mapReduce",
            Skeleton::MapReduce1 => "mapReduce1",
        }
    }
}

/// Intercepts saturated skeleton calls. Returning `Ok(None)` falls back to
/// the sequential definition. While a hook runs it is detached from the
/// machine, so skeleton calls reached from inside it run sequentially.
pub trait SkeletonHook {
    fn intercept(&mut self, m: &mut Machine, skel: Skeleton, args: &[Thunk]) -> Result<Option<Val>>;
}

enum Applied {
    Value(Val),
    /// Continue with code in a fresh frame.
    Tail(Rc<Code>, Vec<Thunk>),
    /// Continue with code in the current frame.
    Continue(Rc<Code>),
}

pub struct Machine {
    funs: Vec<Rc<FunInfo>>,
    fun_ids: HashMap<Name, u32>,
    fun_arity: Vec<usize>,
    lams: Vec<Rc<LamInfo>>,
    bodies: Vec<Rc<Body>>,
    ctor_ids: HashMap<Name, u32>,
    ctor_names: Vec<Name>,
    skeleton_of: HashMap<u32, Skeleton>,
    dummy: Thunk,
    fuel: u64,
    steps: u64,
    hook: Option<Box<dyn SkeletonHook>>,
}

struct Scope {
    names: Vec<(Name, u32)>,
    next: u32,
}

impl Scope {
    fn lookup(&self, x: &str) -> Option<u32> {
        self.names.iter().rev().find(|(n, _)| n == x).map(|(_, s)| *s)
    }

    fn alloc(&mut self, x: &str) -> u32 {
        let s = self.next;
        self.next += 1;
        self.names.push((x.to_string(), s));
        s
    }
}

impl Machine {
    /// Compiles a lambda-lifted program together with the prelude.
    pub fn new(prog: &Program, fuel: u64) -> Result<Machine> {
        if prog.has_where() {
            return Err(Error::invalid("program must be lambda-lifted before evaluation"));
        }
        let mut m = Machine {
            funs: Vec::new(),
            fun_ids: HashMap::new(),
            fun_arity: Vec::new(),
            lams: Vec::new(),
            bodies: Vec::new(),
            ctor_ids: HashMap::new(),
            ctor_names: Vec::new(),
            skeleton_of: HashMap::new(),
            dummy: Thunk::done(Val::Int(0)),
            fuel,
            steps: 0,
            hook: None,
        };
        for c in [NIL, CONS] {
            m.ctor_id(c);
        }
        for t in &prog.types {
            for c in &t.ctors {
                m.ctor_id(&c.name);
            }
        }
        let defs: Vec<&FunDef> = prelude::defs().iter().chain(prog.defs.iter()).collect();
        for (i, d) in defs.iter().enumerate() {
            m.fun_ids.insert(d.name.clone(), i as u32);
            m.fun_arity.push(d.arity());
            if let Some(s) = Skeleton::from_name(&d.name) {
                m.skeleton_of.insert(i as u32, s);
            }
        }
        for d in defs {
            let mut clauses = Vec::with_capacity(d.clauses.len());
            for c in &d.clauses {
                let mut scope = Scope { names: Vec::new(), next: 0 };
                let pats = c.params.iter().map(|p| m.compile_pat(p, &mut scope)).collect::<Result<Vec<_>>>()?;
                let code = m.compile(&c.body, &mut scope)?;
                clauses.push((pats, Body { code: Rc::new(code), nslots: scope.next as usize }));
            }
            m.funs.push(Rc::new(FunInfo { name: d.name.clone(), clauses }));
        }
        Ok(m)
    }

    pub fn set_hook(&mut self, hook: Option<Box<dyn SkeletonHook>>) {
        self.hook = hook;
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn set_fuel(&mut self, fuel: u64) {
        self.fuel = fuel;
    }

    fn ctor_id(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.ctor_ids.get(name) {
            return id;
        }
        let id = self.ctor_names.len() as u32;
        self.ctor_names.push(name.to_string());
        self.ctor_ids.insert(name.to_string(), id);
        id
    }

    fn known_ctor(&self, name: &str) -> Result<u32> {
        self.ctor_ids.get(name).copied().ok_or_else(|| Error::invalid(format!("unknown constructor `{name}`")))
    }

    fn compile_pat(&mut self, p: &Pattern, scope: &mut Scope) -> Result<Pat> {
        Ok(match p {
            Pattern::Var(x) => Pat::Var(scope.alloc(x)),
            Pattern::Con(c, ps) => {
                let id = self.known_ctor(c)?;
                Pat::Con(id, ps.iter().map(|q| self.compile_pat(q, scope)).collect::<Result<_>>()?)
            }
        })
    }

    fn fun_ref(&self, f: &str) -> Result<Head> {
        if let Some(op) = PrimOp::from_name(f) {
            return Ok(Head::Prim(op));
        }
        self.fun_ids.get(f).map(|&id| Head::Global(id)).ok_or_else(|| Error::Unbound(f.to_string()))
    }

    fn arity_of(&self, h: Head) -> usize {
        match h {
            Head::Prim(_) => 2,
            Head::Global(id) => self.fun_arity[id as usize],
        }
    }

    fn compile(&mut self, e: &Expr, scope: &mut Scope) -> Result<Code> {
        Ok(match e {
            Expr::Var(x) => Code::Slot(scope.lookup(x).ok_or_else(|| Error::Unbound(x.clone()))?),
            Expr::Int(n) => Code::Int(*n),
            Expr::Fun(f) => match self.fun_ref(f)? {
                Head::Prim(op) => Code::Prim(op),
                Head::Global(id) if self.arity_of(Head::Global(id)) == 0 => Code::Call(id, vec![]),
                Head::Global(id) => Code::Global(id),
            },
            Expr::Con(c, args) => {
                let id = self.known_ctor(c)?;
                Code::Con(id, args.iter().map(|a| self.compile_arg(a, scope)).collect::<Result<_>>()?)
            }
            Expr::App(..) => {
                let (head, args) = e.spine();
                if let Expr::Fun(f) = head {
                    let h = self.fun_ref(f)?;
                    let n = self.arity_of(h);
                    if let (Head::Prim(op), 2) = (h, args.len()) {
                        let a = self.compile(args[0], scope)?;
                        let b = self.compile(args[1], scope)?;
                        return Ok(Code::PrimCall(op, Rc::new(a), Rc::new(b)));
                    }
                    if let Head::Global(id) = h {
                        if args.len() >= n {
                            let first = args[..n].iter().map(|a| self.compile_arg(a, scope)).collect::<Result<_>>()?;
                            let call = Code::Call(id, first);
                            if args.len() == n {
                                return Ok(call);
                            }
                            let rest = args[n..].iter().map(|a| self.compile_arg(a, scope)).collect::<Result<_>>()?;
                            return Ok(Code::Apply(Rc::new(call), rest));
                        }
                    }
                }
                let h = self.compile(head, scope)?;
                let args = args.iter().map(|a| self.compile_arg(a, scope)).collect::<Result<_>>()?;
                Code::Apply(Rc::new(h), args)
            }
            Expr::Let(binds, body) => {
                let args: Vec<Arg> = binds.iter().map(|(_, r)| self.compile_arg(r, scope)).collect::<Result<_>>()?;
                let mark = scope.names.len();
                let slots: Vec<u32> = binds.iter().map(|(x, _)| scope.alloc(x)).collect();
                let body = self.compile(body, scope)?;
                scope.names.truncate(mark);
                Code::Let(slots.into_iter().zip(args).collect(), Rc::new(body))
            }
            Expr::Lam(..) => {
                let (id, caps) = self.compile_lam(e, scope)?;
                Code::Lam(id, caps)
            }
            Expr::Where(..) => return Err(Error::invalid("local definitions must be lambda-lifted")),
        })
    }

    fn captured(e: &Expr, scope: &Scope) -> Result<Vec<(Name, u32)>> {
        let fv: BTreeSet<Name> = free_vars(e);
        fv.into_iter().map(|x| scope.lookup(&x).map(|s| (x.clone(), s)).ok_or(Error::Unbound(x))).collect()
    }

    fn compile_lam(&mut self, e: &Expr, scope: &Scope) -> Result<(u32, Vec<u32>)> {
        let Expr::Lam(x, body) = e else { unreachable!("compile_lam on non-lambda") };
        let caps = Self::captured(e, scope)?;
        let mut inner = Scope { names: Vec::new(), next: 0 };
        for (n, _) in &caps {
            inner.alloc(n);
        }
        inner.alloc(x);
        let code = self.compile(body, &mut inner)?;
        let id = self.lams.len() as u32;
        self.lams.push(Rc::new(LamInfo {
            body: Body { code: Rc::new(code), nslots: inner.next as usize },
            source: e.clone(),
            captured: caps.iter().map(|(n, _)| n.clone()).collect(),
        }));
        Ok((id, caps.into_iter().map(|(_, s)| s).collect()))
    }

    fn compile_arg(&mut self, e: &Expr, scope: &mut Scope) -> Result<Arg> {
        Ok(match e {
            Expr::Var(x) => Arg::Slot(scope.lookup(x).ok_or_else(|| Error::Unbound(x.clone()))?),
            Expr::Int(n) => Arg::Const(Val::Int(*n)),
            Expr::Con(c, args) if args.is_empty() => Arg::Const(Val::Con(self.known_ctor(c)?, Rc::from(vec![]))),
            Expr::Fun(f) => match self.fun_ref(f)? {
                h @ Head::Prim(_) => Arg::Const(Val::Fun(Rc::new(FunVal::Partial { head: h, args: vec![] }))),
                Head::Global(id) if self.arity_of(Head::Global(id)) > 0 => {
                    Arg::Const(Val::Fun(Rc::new(FunVal::Partial { head: Head::Global(id), args: vec![] })))
                }
                Head::Global(_) => self.delay(e, scope)?,
            },
            Expr::Lam(..) => {
                let (id, caps) = self.compile_lam(e, scope)?;
                Arg::Lam(id, caps)
            }
            _ => self.delay(e, scope)?,
        })
    }

    fn delay(&mut self, e: &Expr, scope: &Scope) -> Result<Arg> {
        let caps = Self::captured(e, scope)?;
        let mut inner = Scope { names: Vec::new(), next: 0 };
        for (n, _) in &caps {
            inner.alloc(n);
        }
        let code = self.compile(e, &mut inner)?;
        let id = self.bodies.len() as u32;
        self.bodies.push(Rc::new(Body { code: Rc::new(code), nslots: inner.next as usize }));
        Ok(Arg::Delay(id, caps.into_iter().map(|(_, s)| s).collect()))
    }

    fn tick(&mut self) -> Result<()> {
        self.steps += 1;
        if self.steps > self.fuel {
            return Err(Error::FuelExhausted(self.fuel));
        }
        Ok(())
    }

    fn make_arg(&self, a: &Arg, frame: &[Thunk]) -> Thunk {
        match a {
            Arg::Slot(s) => frame[*s as usize].clone(),
            Arg::Const(v) => Thunk::done(v.clone()),
            Arg::Lam(id, caps) => Thunk::done(Val::Fun(Rc::new(FunVal::Closure {
                lam: *id,
                env: caps.iter().map(|&s| frame[s as usize].clone()).collect(),
            }))),
            Arg::Delay(id, caps) => Thunk(Rc::new(RefCell::new(ThunkState::Pending(
                *id,
                caps.iter().map(|&s| frame[s as usize].clone()).collect(),
            )))),
        }
    }

    pub fn force(&mut self, t: &Thunk) -> Result<Val> {
        let pending = {
            let mut st = t.0.borrow_mut();
            match &*st {
                ThunkState::Done(v) => return Ok(v.clone()),
                ThunkState::Forcing => return Err(Error::runtime("value depends on itself")),
                ThunkState::Pending(..) => std::mem::replace(&mut *st, ThunkState::Forcing),
            }
        };
        let ThunkState::Pending(id, mut frame) = pending else { unreachable!() };
        let body = self.bodies[id as usize].clone();
        frame.resize(body.nslots, self.dummy.clone());
        let v = self.eval(body.code.clone(), &mut frame)?;
        *t.0.borrow_mut() = ThunkState::Done(v.clone());
        Ok(v)
    }

    fn eval_int(&mut self, code: &Rc<Code>, frame: &mut Vec<Thunk>) -> Result<i64> {
        match self.eval(code.clone(), frame)? {
            Val::Int(n) => Ok(n),
            other => Err(Error::runtime(format!("expected an integer, found {}", self.describe(&other)))),
        }
    }

    fn describe(&self, v: &Val) -> String {
        match v {
            Val::Int(n) => n.to_string(),
            Val::Con(c, _) => format!("constructor `{}`", self.ctor_names[*c as usize]),
            Val::Fun(_) => "a function".into(),
        }
    }

    fn eval(&mut self, code: Rc<Code>, frame: &mut Vec<Thunk>) -> Result<Val> {
        let mut code = code;
        let mut own: Option<Vec<Thunk>> = None;
        loop {
            let fr: &mut Vec<Thunk> = match own.as_mut() {
                Some(f) => f,
                None => &mut *frame,
            };
            let next: Applied = match &*code {
                Code::Slot(s) => {
                    let t = fr[*s as usize].clone();
                    return self.force(&t);
                }
                Code::Int(n) => return Ok(Val::Int(*n)),
                Code::Global(id) => {
                    return Ok(Val::Fun(Rc::new(FunVal::Partial { head: Head::Global(*id), args: vec![] })))
                }
                Code::Prim(op) => {
                    return Ok(Val::Fun(Rc::new(FunVal::Partial { head: Head::Prim(*op), args: vec![] })))
                }
                Code::Con(c, args) => {
                    let ts: Vec<Thunk> = args.iter().map(|a| self.make_arg(a, fr)).collect();
                    return Ok(Val::Con(*c, Rc::from(ts)));
                }
                Code::Lam(id, caps) => {
                    let env = caps.iter().map(|&s| fr[s as usize].clone()).collect();
                    return Ok(Val::Fun(Rc::new(FunVal::Closure { lam: *id, env })));
                }
                Code::PrimCall(op, a, b) => {
                    let x = self.eval_int(a, fr)?;
                    let y = self.eval_int(b, fr)?;
                    self.tick()?;
                    return Ok(Val::Int(op.apply(x, y)));
                }
                Code::Call(id, args) => {
                    let ts: Vec<Thunk> = args.iter().map(|a| self.make_arg(a, fr)).collect();
                    self.enter(*id, ts)?
                }
                Code::Apply(head, args) => {
                    let f = self.eval(head.clone(), fr)?;
                    let ts: Vec<Thunk> = args.iter().map(|a| self.make_arg(a, fr)).collect();
                    self.apply(f, ts)?
                }
                Code::Let(binds, body) => {
                    for (slot, a) in binds {
                        let t = self.make_arg(a, fr);
                        fr[*slot as usize] = t;
                    }
                    self.tick()?;
                    Applied::Continue(body.clone())
                }
            };
            match next {
                Applied::Value(v) => return Ok(v),
                Applied::Tail(c, f) => {
                    code = c;
                    own = Some(f);
                }
                Applied::Continue(c) => code = c,
            }
        }
    }

    fn enter(&mut self, id: u32, args: Vec<Thunk>) -> Result<Applied> {
        self.tick()?;
        if let Some(&skel) = self.skeleton_of.get(&id) {
            if let Some(mut hook) = self.hook.take() {
                let r = hook.intercept(self, skel, &args);
                self.hook = Some(hook);
                if let Some(v) = r? {
                    return Ok(Applied::Value(v));
                }
            }
        }
        let fun = self.funs[id as usize].clone();
        for (pats, body) in &fun.clauses {
            let mut frame = vec![self.dummy.clone(); body.nslots];
            let mut ok = true;
            for (p, t) in pats.iter().zip(&args) {
                if !self.matches(p, t, &mut frame)? {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(Applied::Tail(body.code.clone(), frame));
            }
        }
        Err(Error::runtime(format!("no clause of `{}` matches its arguments", fun.name)))
    }

    fn matches(&mut self, p: &Pat, t: &Thunk, frame: &mut [Thunk]) -> Result<bool> {
        match p {
            Pat::Var(s) => {
                frame[*s as usize] = t.clone();
                Ok(true)
            }
            Pat::Con(c, subs) => match self.force(t)? {
                Val::Con(d, fields) => {
                    if *c != d {
                        return Ok(false);
                    }
                    for (q, f) in subs.iter().zip(fields.iter()) {
                        if !self.matches(q, f, frame)? {
                            return Ok(false);
                        }
                    }
                    Ok(true)
                }
                other => Err(Error::runtime(format!(
                    "cannot match {} against constructor `{}`",
                    self.describe(&other),
                    self.ctor_names[*c as usize]
                ))),
            },
        }
    }

    fn apply(&mut self, f: Val, args: Vec<Thunk>) -> Result<Applied> {
        let mut f = f;
        let mut args = args.into_iter().peekable();
        loop {
            let Val::Fun(fv) = &f else {
                return Err(Error::runtime(format!("cannot apply {} to an argument", self.describe(&f))));
            };
            let applied = match &**fv {
                FunVal::Closure { lam, env } => {
                    let Some(a) = args.next() else { return Ok(Applied::Value(f)) };
                    self.tick()?;
                    let info = self.lams[*lam as usize].clone();
                    let mut frame = env.clone();
                    frame.push(a);
                    frame.resize(info.body.nslots, self.dummy.clone());
                    Applied::Tail(info.body.code.clone(), frame)
                }
                FunVal::Partial { head, args: have } => {
                    let n = self.arity_of(*head);
                    let mut all = have.clone();
                    while all.len() < n {
                        match args.next() {
                            Some(a) => all.push(a),
                            None => break,
                        }
                    }
                    if all.len() < n {
                        return Ok(Applied::Value(Val::Fun(Rc::new(FunVal::Partial { head: *head, args: all }))));
                    }
                    match head {
                        Head::Global(id) => self.enter(*id, all)?,
                        Head::Prim(op) => {
                            let x = self.force_int(&all[0])?;
                            let y = self.force_int(&all[1])?;
                            self.tick()?;
                            Applied::Value(Val::Int(op.apply(x, y)))
                        }
                    }
                }
            };
            if args.peek().is_none() {
                return Ok(applied);
            }
            f = self.finish(applied)?;
        }
    }

    fn force_int(&mut self, t: &Thunk) -> Result<i64> {
        match self.force(t)? {
            Val::Int(n) => Ok(n),
            other => Err(Error::runtime(format!("expected an integer, found {}", self.describe(&other)))),
        }
    }

    /// Applies a function value to arguments and evaluates to weak head normal form.
    pub fn apply_val(&mut self, f: Val, args: Vec<Thunk>) -> Result<Val> {
        let applied = self.apply(f, args)?;
        self.finish(applied)
    }

    fn finish(&mut self, applied: Applied) -> Result<Val> {
        match applied {
            Applied::Value(v) => Ok(v),
            Applied::Tail(code, mut frame) => self.eval(code, &mut frame),
            Applied::Continue(_) => unreachable!("let continuation outside eval"),
        }
    }

    /// Calls a global function by name with the given arguments.
    pub fn call(&mut self, name: &str, args: Vec<Thunk>) -> Result<Val> {
        let head = self.fun_ref(name)?;
        self.apply_val(Val::Fun(Rc::new(FunVal::Partial { head, args: vec![] })), args)
    }

    /// Compiles and evaluates a closed expression to weak head normal form.
    pub fn eval_closed(&mut self, e: &Expr) -> Result<Val> {
        let mut scope = Scope { names: Vec::new(), next: 0 };
        let code = self.compile(e, &mut scope)?;
        let mut frame = vec![self.dummy.clone(); scope.next as usize];
        self.eval(Rc::new(code), &mut frame)
    }

    /// Evaluates `body` with `params` bound to the given suspensions.
    pub fn eval_open(&mut self, params: &[Name], args: Vec<Thunk>, body: &Expr) -> Result<Val> {
        let mut scope = Scope { names: Vec::new(), next: 0 };
        for p in params {
            scope.alloc(p);
        }
        let code = self.compile(body, &mut scope)?;
        let mut frame = args;
        frame.resize(scope.next as usize, self.dummy.clone());
        self.eval(Rc::new(code), &mut frame)
    }

    /// Turns an evaluated value back into a suspension.
    pub fn load(&mut self, v: &Value) -> Result<Thunk> {
        Ok(Thunk::done(self.load_val(v)?))
    }

    pub fn load_val(&mut self, v: &Value) -> Result<Val> {
        Ok(match v {
            Value::Int(n) => Val::Int(*n),
            Value::Con(c, args) => {
                let id = self.known_ctor(c)?;
                let ts = args.iter().map(|a| self.load(a)).collect::<Result<Vec<_>>>()?;
                Val::Con(id, Rc::from(ts))
            }
            Value::Closure { .. } => self.eval_closed(&v.to_expr())?,
        })
    }

    pub fn thunk(v: Val) -> Thunk {
        Thunk::done(v)
    }

    /// Evaluates a suspension completely and reads the result back.
    pub fn deep(&mut self, t: &Thunk) -> Result<Value> {
        let v = self.force(t)?;
        self.deep_val(v)
    }

    pub fn deep_val(&mut self, v: Val) -> Result<Value> {
        match v {
            Val::Int(n) => Ok(Value::Int(n)),
            Val::Con(c, fields) => {
                let name = self.ctor_names[c as usize].clone();
                // Walk list spines iteratively to keep recursion shallow.
                if name == CONS {
                    let mut items = Vec::new();
                    let mut cur = Val::Con(c, fields);
                    loop {
                        match cur {
                            Val::Con(c2, fs) if self.ctor_names[c2 as usize] == CONS => {
                                items.push(self.deep(&fs[0])?);
                                cur = self.force(&fs[1])?;
                            }
                            other => {
                                let tail = self.deep_val(other)?;
                                return Ok(items
                                    .into_iter()
                                    .rev()
                                    .fold(tail, |t, h| Value::Con(CONS.into(), vec![h, t])));
                            }
                        }
                    }
                }
                let args = fields.iter().map(|f| self.deep(f)).collect::<Result<Vec<_>>>()?;
                Ok(Value::Con(name, args))
            }
            Val::Fun(fv) => self.read_fun(&fv),
        }
    }

    fn read_fun(&mut self, fv: &FunVal) -> Result<Value> {
        let e = match fv {
            FunVal::Closure { lam, env } => {
                let info = self.lams[*lam as usize].clone();
                let mut map = HashMap::new();
                for (name, t) in info.captured.iter().zip(env) {
                    let v = self.deep(t)?;
                    map.insert(name.clone(), v.to_expr());
                }
                substitute(&info.source, &map)
            }
            FunVal::Partial { head, args } => {
                let head_expr = match head {
                    Head::Prim(op) => Expr::fun(op.name()),
                    Head::Global(id) => Expr::Fun(self.funs[*id as usize].name.clone()),
                };
                let arg_exprs = args.iter().map(|t| Ok(self.deep(t)?.to_expr())).collect::<Result<Vec<_>>>()?;
                let missing = self.arity_of(*head) - args.len();
                let taken: BTreeSet<Name> = arg_exprs.iter().flat_map(free_vars).collect();
                let mut params: Vec<Name> = Vec::new();
                for _ in 0..missing {
                    let p = fresh_avoiding("x", |n| taken.contains(n) || params.iter().any(|q| q == n));
                    params.push(p);
                }
                let body = Expr::app(head_expr, arg_exprs.into_iter().chain(params.iter().map(Expr::var)));
                params.iter().rev().fold(body, |b, p| Expr::lam(p.clone(), b))
            }
        };
        match e {
            Expr::Lam(param, body) => Ok(Value::Closure { param, body: *body }),
            other => Err(Error::runtime(format!("cannot read back function value {other}"))),
        }
    }

    pub fn ctor_name(&self, id: u32) -> &str {
        &self.ctor_names[id as usize]
    }

    /// Constructor name and fields of a constructor value.
    pub fn con_parts(v: &Val) -> Option<(u32, Rc<[Thunk]>)> {
        match v {
            Val::Con(c, f) => Some((*c, f.clone())),
            _ => None,
        }
    }

    pub fn make_con(&mut self, name: &str, fields: Vec<Thunk>) -> Result<Val> {
        Ok(Val::Con(self.known_ctor(name)?, Rc::from(fields)))
    }
}
