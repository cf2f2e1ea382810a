//! Encoding of recursive functions over a synthesized list type.
//!
//! Each recursive function `f` gets a data type `T_f` with one constructor
//! per clause, a function `encode_f` that unrolls the recursion on the
//! pattern-matched inputs into a list of such cells, and a rewritten `f'`
//! that consumes one cell per step.

mod canon;
mod equiv;

pub use canon::canonical_form;
pub use equiv::{check_equivalence, random_value, type_directed_args, Counterexample, EquivReport};

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::lang::ast::*;
use crate::lang::names::{fresh_avoiding, NameGen};
use crate::lang::subst::free_vars;
use crate::lang::{lambda_lift, prelude};

/// Placeholder variable marking the hole of a context.
pub const HOLE: &str = "#hole";

/// Argument positions of a function split by whether any clause matches a
/// constructor there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inputs {
    pub matched: Vec<usize>,
    pub plain: Vec<usize>,
}

impl Inputs {
    pub fn arity(&self) -> usize {
        self.matched.len() + self.plain.len()
    }
}

pub fn classify_inputs(f: &FunDef) -> Inputs {
    let (matched, plain) = (0..f.arity()).partition(|&i| f.clauses.iter().any(|c| !c.params[i].is_var()));
    Inputs { matched, plain }
}

/// The self-call of a clause chosen for encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecCall {
    /// Arguments at matched positions; always pattern-bound variables.
    pub matched_args: Vec<Name>,
    /// Arguments at plain positions, in order.
    pub plain_args: Vec<Expr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseShape {
    pub index: usize,
    pub matched: Vec<Pattern>,
    /// Parameter names at plain positions.
    pub plain: Vec<Name>,
    pub call: Option<RecCall>,
    /// The body with the chosen call replaced by [`HOLE`], or the body
    /// itself when there is no call.
    pub context: Expr,
    /// Pattern variables the rest of the computation needs from this step.
    pub captured: Vec<Name>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecursiveShape {
    pub name: Name,
    pub inputs: Inputs,
    pub clauses: Vec<ClauseShape>,
}

/// Outcome of encoding one function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedFunction {
    pub original: Name,
    pub encoder: Name,
    pub primed: Name,
    pub shape: RecursiveShape,
    /// Constructor `k` encodes clause `k`.
    pub decl: TypeDecl,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Encoded {
    pub program: Program,
    pub functions: Vec<EncodedFunction>,
    /// Recursive functions left unchanged, with the reason.
    pub skipped: Vec<(Name, String)>,
}

impl Encoded {
    pub fn function(&self, original: &str) -> Option<&EncodedFunction> {
        self.functions.iter().find(|f| f.original == original)
    }
}

/// `mMul_1` becomes `mMul'_1`, `dotP` becomes `dotP'`.
pub fn primed_name(name: &str) -> Name {
    if let Some(i) = name.rfind('_') {
        let digits = &name[i + 1..];
        if i > 0 && !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
            return format!("{}'{}", &name[..i], &name[i..]);
        }
    }
    format!("{name}'")
}

/// Arguments of `e` when it is a saturated call `f a1 .. an`.
fn self_call<'e>(e: &'e Expr, f: &str, arity: usize) -> Option<Vec<&'e Expr>> {
    let (head, args) = e.spine();
    match head {
        Expr::Fun(g) if g == f && args.len() == arity => Some(args),
        _ => None,
    }
}

fn count_sites(e: &Expr, f: &str, arity: usize) -> usize {
    let mut n = 0;
    e.walk(&mut |x| {
        if self_call(x, f, arity).is_some() {
            n += 1;
        }
    });
    n
}

/// Replaces the `target`-th self-call site (pre-order) with the hole.
fn plug(e: &Expr, f: &str, arity: usize, target: usize, seen: &mut usize, out: &mut Option<Vec<Expr>>) -> Expr {
    if let Some(args) = self_call(e, f, arity) {
        let here = *seen;
        *seen += 1;
        if here == target {
            *out = Some(args.into_iter().cloned().collect());
            return Expr::var(HOLE);
        }
    }
    match e {
        Expr::Var(_) | Expr::Int(_) | Expr::Fun(_) => e.clone(),
        Expr::Con(c, args) => Expr::Con(c.clone(), args.iter().map(|a| plug(a, f, arity, target, seen, out)).collect()),
        Expr::App(g, a) => {
            let g = plug(g, f, arity, target, seen, out);
            let a = plug(a, f, arity, target, seen, out);
            Expr::App(Box::new(g), Box::new(a))
        }
        Expr::Let(bs, body) => {
            let bs = bs.iter().map(|(x, r)| (x.clone(), plug(r, f, arity, target, seen, out))).collect();
            Expr::Let(bs, Box::new(plug(body, f, arity, target, seen, out)))
        }
        Expr::Lam(x, body) => Expr::Lam(x.clone(), Box::new(plug(body, f, arity, target, seen, out))),
        Expr::Where(..) => e.clone(),
    }
}

/// Pattern variables with their field path, ordered by path first and
/// argument position second, so that the `k`-th components of all matched
/// inputs come before the `k+1`-th.
fn ordered_pattern_vars(patterns: &[Pattern]) -> Vec<Name> {
    fn go(p: &Pattern, path: &mut Vec<usize>, pos: usize, out: &mut Vec<(Vec<usize>, usize, Name)>) {
        match p {
            Pattern::Var(x) => out.push((path.clone(), pos, x.clone())),
            Pattern::Con(_, ps) => {
                for (i, q) in ps.iter().enumerate() {
                    path.push(i);
                    go(q, path, pos, out);
                    path.pop();
                }
            }
        }
    }
    let mut all = Vec::new();
    for (pos, p) in patterns.iter().enumerate() {
        go(p, &mut Vec::new(), pos, &mut all);
    }
    all.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
    all.into_iter().map(|(_, _, x)| x).collect()
}

pub fn extract_shape(f: &FunDef) -> Result<RecursiveShape> {
    let inputs = classify_inputs(f);
    if inputs.matched.is_empty() {
        return Err(Error::NotEncodable { fun: f.name.clone(), reason: "no input is pattern-matched".into() });
    }
    let arity = f.arity();
    let mut clauses = Vec::new();
    for (k, c) in f.clauses.iter().enumerate() {
        let matched: Vec<Pattern> = inputs.matched.iter().map(|&i| c.params[i].clone()).collect();
        let plain: Vec<Name> = inputs
            .plain
            .iter()
            .map(|&i| match &c.params[i] {
                Pattern::Var(x) => x.clone(),
                Pattern::Con(..) => unreachable!("plain positions hold variables"),
            })
            .collect();
        let matched_vars: BTreeSet<Name> = matched.iter().flat_map(Pattern::vars).collect();
        let sites = count_sites(&c.body, &f.name, arity);
        let (context, call, mut used) = if sites == 0 {
            (c.body.clone(), None, free_vars(&c.body))
        } else {
            let mut out = None;
            let context = plug(&c.body, &f.name, arity, sites - 1, &mut 0, &mut out);
            let args = out.expect("site exists");
            let mut matched_args = Vec::new();
            for &i in &inputs.matched {
                match &args[i] {
                    Expr::Var(x) if matched_vars.contains(x) => matched_args.push(x.clone()),
                    other => {
                        return Err(Error::NotEncodable {
                            fun: f.name.clone(),
                            reason: format!(
                                "clause {}: recursive call passes `{other}` at matched argument {}",
                                k + 1,
                                i + 1
                            ),
                        })
                    }
                }
            }
            let plain_args: Vec<Expr> = inputs.plain.iter().map(|&i| args[i].clone()).collect();
            let mut used = free_vars(&context);
            for a in &plain_args {
                used.extend(free_vars(a));
            }
            (context, Some(RecCall { matched_args, plain_args }), used)
        };
        used.remove(HOLE);
        let captured =
            ordered_pattern_vars(&matched).into_iter().filter(|x| used.contains(x) && !plain.contains(x)).collect();
        clauses.push(ClauseShape { index: k, matched, plain, call, context, captured });
    }
    Ok(RecursiveShape { name: f.name.clone(), inputs, clauses })
}

/// Types of the variables bound by `p` when it matches a value of type `ty`.
fn pattern_var_types(prog: &Program, p: &Pattern, ty: Option<&Type>, out: &mut HashMap<Name, Type>) {
    match p {
        Pattern::Var(x) => {
            if let Some(t) = ty {
                out.insert(x.clone(), t.clone());
            }
        }
        Pattern::Con(c, ps) => {
            let fields: Option<Vec<Type>> = (|| {
                let Type::Con(tname, targs) = ty? else { return None };
                let (decl, cdecl) = prog.ctor(c)?;
                if &decl.name != tname || decl.params.len() != targs.len() {
                    return None;
                }
                let map = decl.params.iter().cloned().zip(targs.iter().cloned()).collect();
                Some(cdecl.fields.iter().map(|t| t.substitute(&map)).collect())
            })();
            for (i, q) in ps.iter().enumerate() {
                pattern_var_types(prog, q, fields.as_ref().map(|fs| &fs[i]), out);
            }
        }
    }
}

fn fresh_con_name(base: &str, taken: &HashSet<Name>) -> Name {
    if !taken.contains(base) {
        base.to_string()
    } else {
        fresh_avoiding(base, |n| taken.contains(n))
    }
}

/// Builds `data T_f a.. ::= C_f_1 .. | ..` for a shape. `taken` holds every
/// type and constructor name already in use and is extended.
pub fn derive_encoded_type(shape: &RecursiveShape, prog: &Program, taken: &mut HashSet<Name>) -> TypeDecl {
    let param_types: Vec<Option<Type>> = match prog.sigs.get(&shape.name) {
        Some(sig) => {
            let (args, _) = sig.split_arrows();
            (0..shape.inputs.arity()).map(|i| args.get(i).map(|t| (*t).clone())).collect()
        }
        None => vec![None; shape.inputs.arity()],
    };
    let mut params = Vec::new();
    for &i in &shape.inputs.matched {
        if let Some(t) = &param_types[i] {
            t.vars(&mut params);
        }
    }
    let mut ctors = Vec::new();
    let mut fallback_needed = false;
    let mut field_types = Vec::new();
    for c in &shape.clauses {
        let mut types = HashMap::new();
        for (p, &i) in c.matched.iter().zip(&shape.inputs.matched) {
            pattern_var_types(prog, p, param_types[i].as_ref(), &mut types);
        }
        let fields: Vec<Option<Type>> = c.captured.iter().map(|z| types.get(z).cloned()).collect();
        fallback_needed |= fields.iter().any(Option::is_none);
        field_types.push(fields);
    }
    if fallback_needed && params.is_empty() {
        params.push("a".to_string());
    }
    let name = fresh_con_name(&format!("T_{}", shape.name), taken);
    taken.insert(name.clone());
    for (c, fields) in shape.clauses.iter().zip(field_types) {
        let cname = fresh_con_name(&format!("C_{}_{}", shape.name, c.index + 1), taken);
        taken.insert(cname.clone());
        let fields = fields.into_iter().map(|t| t.unwrap_or_else(|| Type::Var(params[0].clone()))).collect();
        ctors.push(CtorDecl { name: cname, fields });
    }
    TypeDecl { name, params, ctors }
}

fn cell(decl: &TypeDecl, c: &ClauseShape) -> Expr {
    Expr::Con(decl.ctors[c.index].name.clone(), c.captured.iter().map(Expr::var).collect())
}

pub fn derive_encode_fn(shape: &RecursiveShape, decl: &TypeDecl, name: &str) -> FunDef {
    let clauses = shape
        .clauses
        .iter()
        .map(|c| {
            let head = Expr::list([cell(decl, c)]);
            let body = match &c.call {
                None => head,
                Some(call) => Expr::app(
                    Expr::fun("++"),
                    [head, Expr::app(Expr::fun(name), call.matched_args.iter().map(Expr::var))],
                ),
            };
            Clause { params: c.matched.clone(), body }
        })
        .collect();
    FunDef { name: name.to_string(), clauses }
}

fn clause_names(c: &ClauseShape) -> HashSet<Name> {
    let mut names: HashSet<Name> = c.matched.iter().flat_map(Pattern::vars).collect();
    names.extend(c.plain.iter().cloned());
    names.extend(free_vars(&c.context));
    let mut binders = HashSet::new();
    c.context.walk(&mut |e| match e {
        Expr::Lam(x, _) => {
            binders.insert(x.clone());
        }
        Expr::Let(bs, _) => binders.extend(bs.iter().map(|(x, _)| x.clone())),
        _ => {}
    });
    names.extend(binders);
    names
}

/// Builds `f'` from the shape. Bodies are returned before inner calls to
/// encoded functions are rewritten; [`encode_program`] does that for the
/// whole program at once.
pub fn rewrite_function(shape: &RecursiveShape, decl: &TypeDecl, primed: &str) -> FunDef {
    let clauses = shape
        .clauses
        .iter()
        .map(|c| {
            let names = clause_names(c);
            let w = if names.contains("w") { fresh_avoiding("w", |n| names.contains(n)) } else { "w".to_string() };
            let cell_pat =
                Pattern::Con(decl.ctors[c.index].name.clone(), c.captured.iter().map(Pattern::var).collect());
            let mut params = vec![Pattern::cons(cell_pat, Pattern::var(w.clone()))];
            params.extend(c.plain.iter().map(Pattern::var));
            let body = match &c.call {
                None => c.context.clone(),
                Some(call) => {
                    let rec = Expr::app(
                        Expr::fun(primed),
                        std::iter::once(Expr::var(w)).chain(call.plain_args.iter().cloned()),
                    );
                    fill_hole(&c.context, &rec)
                }
            };
            Clause { params, body }
        })
        .collect();
    FunDef { name: primed.to_string(), clauses }
}

fn fill_hole(e: &Expr, with: &Expr) -> Expr {
    match e {
        Expr::Var(x) if x == HOLE => with.clone(),
        Expr::Var(_) | Expr::Int(_) | Expr::Fun(_) | Expr::Where(..) => e.clone(),
        Expr::Con(c, args) => Expr::Con(c.clone(), args.iter().map(|a| fill_hole(a, with)).collect()),
        Expr::App(f, a) => Expr::App(Box::new(fill_hole(f, with)), Box::new(fill_hole(a, with))),
        Expr::Let(bs, body) => Expr::Let(
            bs.iter().map(|(x, r)| (x.clone(), fill_hole(r, with))).collect(),
            Box::new(fill_hole(body, with)),
        ),
        Expr::Lam(x, body) => Expr::Lam(x.clone(), Box::new(fill_hole(body, with))),
    }
}

struct Target {
    inputs: Inputs,
    encoder: Name,
    primed: Name,
}

/// Rewrites every call `g a..` of an encoded `g` into `g' (encode_g a_m..) a_p..`.
fn rewrite_calls(e: &Expr, targets: &HashMap<Name, Target>) -> Expr {
    if let (Expr::Fun(g), args) = e.spine() {
        if let Some(t) = targets.get(g) {
            let mut args: Vec<Expr> = args.into_iter().map(|a| rewrite_calls(a, targets)).collect();
            let n = t.inputs.arity();
            // Eta-expand when some matched argument is missing.
            let mut params = Vec::new();
            if t.inputs.matched.iter().any(|&i| i >= args.len()) {
                let mut taken: BTreeSet<Name> = BTreeSet::new();
                for a in &args {
                    taken.extend(free_vars(a));
                }
                while args.len() < n {
                    let p = fresh_avoiding("x", |x| taken.contains(x));
                    taken.insert(p.clone());
                    args.push(Expr::var(p.clone()));
                    params.push(p);
                }
            }
            let extra: Vec<Expr> = args.split_off(n.min(args.len()));
            let encoded = Expr::app(Expr::fun(&t.encoder), t.inputs.matched.iter().map(|&i| args[i].clone()));
            let plain = t.inputs.plain.iter().filter(|&&i| i < args.len()).map(|&i| args[i].clone());
            let call = Expr::app(Expr::app(Expr::fun(&t.primed), std::iter::once(encoded).chain(plain)), extra);
            return params.into_iter().rev().fold(call, |b, p| Expr::lam(p, b));
        }
    }
    match e {
        Expr::Var(_) | Expr::Int(_) | Expr::Fun(_) => e.clone(),
        Expr::Con(c, args) => Expr::Con(c.clone(), args.iter().map(|a| rewrite_calls(a, targets)).collect()),
        Expr::App(f, a) => Expr::App(Box::new(rewrite_calls(f, targets)), Box::new(rewrite_calls(a, targets))),
        Expr::Let(bs, body) => Expr::Let(
            bs.iter().map(|(x, r)| (x.clone(), rewrite_calls(r, targets))).collect(),
            Box::new(rewrite_calls(body, targets)),
        ),
        Expr::Lam(x, body) => Expr::Lam(x.clone(), Box::new(rewrite_calls(body, targets))),
        Expr::Where(..) => e.clone(),
    }
}

/// Functions that lie on a call cycle through some other function.
fn mutually_recursive(prog: &Program) -> HashSet<Name> {
    let names: HashSet<&str> = prog.defs.iter().map(|d| d.name.as_str()).collect();
    let calls: HashMap<&str, Vec<Name>> = prog
        .defs
        .iter()
        .map(|d| {
            let mut cs: Vec<Name> = d.clauses.iter().flat_map(|c| c.body.called_functions()).collect();
            cs.retain(|c| names.contains(c.as_str()) && c != &d.name);
            cs.sort();
            cs.dedup();
            (d.name.as_str(), cs)
        })
        .collect();
    let reach = |from: &str| -> HashSet<Name> {
        let mut seen = HashSet::new();
        let mut stack: Vec<Name> = calls[from].clone();
        while let Some(n) = stack.pop() {
            if seen.insert(n.clone()) {
                stack.extend(calls[n.as_str()].iter().cloned());
            }
        }
        seen
    };
    let mut out = HashSet::new();
    for d in &prog.defs {
        if reach(&d.name).contains(&d.name) {
            out.insert(d.name.clone());
        }
    }
    out
}

fn fun_sig(args: Vec<Type>, result: Type) -> Type {
    args.into_iter().rev().fold(result, |r, a| Type::Arrow(Box::new(a), Box::new(r)))
}

/// Encodes every self-recursive function with at least one matched input.
pub fn encode_program(prog: &Program) -> Result<Encoded> {
    let lifted = lambda_lift(prog);
    let mutual = mutually_recursive(&lifted);

    let mut taken: HashSet<Name> = HashSet::new();
    for t in &lifted.types {
        taken.insert(t.name.clone());
        taken.extend(t.ctors.iter().map(|c| c.name.clone()));
    }
    let mut funs = NameGen::new();
    funs.reserve("main");
    for d in &lifted.defs {
        funs.reserve(d.name.clone());
    }
    for n in prelude::prelude_names().chain(prelude::PRIMITIVES.iter().map(|s| s.to_string())) {
        funs.reserve(n);
    }

    let mut functions = Vec::new();
    let mut skipped = Vec::new();
    for d in &lifted.defs {
        if !d.is_self_recursive() {
            continue;
        }
        if mutual.contains(&d.name) {
            skipped.push((d.name.clone(), "mutually recursive".to_string()));
            continue;
        }
        let shape = match extract_shape(d) {
            Ok(s) => s,
            Err(Error::NotEncodable { reason, .. }) => {
                skipped.push((d.name.clone(), reason));
                continue;
            }
            Err(e) => return Err(e),
        };
        let decl = derive_encoded_type(&shape, &lifted, &mut taken);
        let encoder = funs.prefer(&format!("encode_{}", d.name));
        let primed = funs.prefer(&primed_name(&d.name));
        functions.push(EncodedFunction { original: d.name.clone(), encoder, primed, shape, decl });
    }

    let targets: HashMap<Name, Target> = functions
        .iter()
        .map(|f| {
            (
                f.original.clone(),
                Target { inputs: f.shape.inputs.clone(), encoder: f.encoder.clone(), primed: f.primed.clone() },
            )
        })
        .collect();
    let rewrite_def = |d: FunDef| FunDef {
        name: d.name,
        clauses: d
            .clauses
            .into_iter()
            .map(|c| Clause { params: c.params, body: rewrite_calls(&c.body, &targets) })
            .collect(),
    };

    let mut sigs = lifted.sigs.clone();
    let mut defs = Vec::new();
    for d in &lifted.defs {
        match functions.iter().find(|f| f.original == d.name) {
            Some(f) => {
                defs.push(derive_encode_fn(&f.shape, &f.decl, &f.encoder));
                defs.push(rewrite_def(rewrite_function(&f.shape, &f.decl, &f.primed)));
                if let Some(sig) = sigs.remove(&d.name) {
                    let (args, result) = sig.split_arrows();
                    if args.len() >= f.shape.inputs.arity() {
                        let cells = Type::list(Type::Con(
                            f.decl.name.clone(),
                            f.decl.params.iter().cloned().map(Type::Var).collect(),
                        ));
                        let matched: Vec<Type> = f.shape.inputs.matched.iter().map(|&i| args[i].clone()).collect();
                        let plain: Vec<Type> = f.shape.inputs.plain.iter().map(|&i| args[i].clone()).collect();
                        let rest: Vec<Type> = args[f.shape.inputs.arity()..].iter().map(|t| (*t).clone()).collect();
                        let result = fun_sig(rest, result.clone());
                        sigs.insert(f.encoder.clone(), fun_sig(matched, cells.clone()));
                        sigs.insert(f.primed.clone(), fun_sig(std::iter::once(cells).chain(plain).collect(), result));
                    }
                }
            }
            None => defs.push(rewrite_def(d.clone())),
        }
    }
    let mut types: Vec<TypeDecl> = functions.iter().map(|f| f.decl.clone()).collect();
    types.extend(lifted.types.iter().cloned());
    let program = Program {
        types,
        sigs,
        main_params: lifted.main_params.clone(),
        main: rewrite_calls(&lifted.main, &targets),
        defs,
    };
    Ok(Encoded { program, functions, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::lang::{evaluate, parse_program, program_to_string, Value, DEFAULT_FUEL};

    fn distilled_mmul() -> Program {
        corpus::entry("mmul-distilled").unwrap().program().unwrap()
    }

    fn dotp() -> Program {
        corpus::entry("dotp").unwrap().program().unwrap()
    }

    #[test]
    fn primes_before_numeric_suffix() {
        assert_eq!(primed_name("mMul_1"), "mMul'_1");
        assert_eq!(primed_name("dotP"), "dotP'");
        assert_eq!(primed_name("f_x"), "f_x'");
    }

    #[test]
    fn classifies_matched_and_plain_inputs() {
        let p = distilled_mmul();
        let i = classify_inputs(p.def("mMul_3").unwrap());
        assert_eq!((i.matched.len(), i.plain.len()), (2, 1));
        let i = classify_inputs(dotp().def("dotP").unwrap());
        assert_eq!((i.matched.len(), i.plain.len()), (2, 0));
        let f = parse_program("f x y = y;; main = f 1 2;;").unwrap();
        assert!(classify_inputs(f.def("f").unwrap()).matched.is_empty());
    }

    #[test]
    fn chooses_the_last_self_call() {
        let s = extract_shape(dotp().def("dotP").unwrap()).unwrap();
        let c = &s.clauses[2];
        assert_eq!(c.call.as_ref().unwrap().matched_args, vec!["xt2", "yt2"]);
        assert_eq!(c.context.to_string(), "x * y + dotP xt1 yt1 + #hole");
        assert_eq!(c.captured, vec!["x", "y", "xt1", "yt1"]);
        assert!(s.clauses[0].call.is_none());
        assert!(s.clauses[0].captured.is_empty());
    }

    #[test]
    fn captures_only_variables_the_context_needs() {
        let p = lambda_lift(&distilled_mmul());
        let s = extract_shape(p.def("mMul_1").unwrap()).unwrap();
        assert_eq!(s.clauses[2].captured, vec!["xs", "zs"]);
        let s = extract_shape(p.def("mMul_2").unwrap()).unwrap();
        assert!(s.clauses[1].captured.is_empty());
    }

    #[test]
    fn derives_component_types_from_signatures() {
        let e = encode_program(&dotp()).unwrap();
        let decl = &e.function("dotP").unwrap().decl;
        let shown = TypeDecl { ctors: decl.ctors.clone(), ..decl.clone() }.to_string();
        assert_eq!(shown, "data T_dotP a ::= C_dotP_1 | C_dotP_2 | C_dotP_3 a a (BTree a) (BTree a)");
        let e = encode_program(&distilled_mmul()).unwrap();
        let decls: Vec<String> = e.functions.iter().map(|f| f.decl.to_string()).collect();
        assert_eq!(
            decls,
            [
                "data T_mMul_1 a ::= C_mMul_1_1 | C_mMul_1_2 | C_mMul_1_3 [a] [a]",
                "data T_mMul_2 a ::= C_mMul_2_1 | C_mMul_2_2",
                "data T_mMul_3 a ::= C_mMul_3_1 | C_mMul_3_2 | C_mMul_3_3 a [a]",
            ]
        );
    }

    #[test]
    fn encoder_of_small_trees() {
        let e = encode_program(&dotp()).unwrap();
        let leaf = corpus::leaf();
        let args = [corpus::branch(2, leaf.clone(), leaf.clone()), corpus::branch(3, leaf.clone(), leaf)];
        let mut p = e.program.clone();
        p.main = Expr::app(Expr::fun("encode_dotP"), [Expr::var("xt"), Expr::var("yt")]);
        let v = evaluate(&p, &args, DEFAULT_FUEL).unwrap();
        assert_eq!(v.to_string(), "[C_dotP_3 2 3 E E, C_dotP_1]");
        assert_eq!(evaluate(&e.program, &args, DEFAULT_FUEL).unwrap(), Value::Int(6));
    }

    #[test]
    fn rewritten_clauses_consume_one_cell() {
        let e = encode_program(&dotp()).unwrap();
        let f = e.program.def("dotP'").unwrap();
        let text: Vec<String> = f.clauses.iter().map(|c| crate::lang::pretty::clause_to_string("dotP'", c)).collect();
        assert_eq!(text[0], "dotP' (C_dotP_1 : w) = 0");
        assert_eq!(text[2], "dotP' ((C_dotP_3 x y xt1 yt1) : w) = x * y + dotP' (encode_dotP xt1 yt1) + dotP' w");
        assert_eq!(e.program.main.to_string(), "dotP' (encode_dotP xt yt)");
    }

    #[test]
    fn leaves_non_recursive_programs_alone() {
        let p = parse_program("hd [] = 0;; hd (x : xs) = x;; main xs = hd xs;;").unwrap();
        let e = encode_program(&p).unwrap();
        assert!(e.functions.is_empty());
        assert_eq!(e.program.defs, p.defs);
        assert_eq!(e.program.types.len(), p.types.len());
    }

    #[test]
    fn reports_mutual_recursion() {
        let src = "ev [] = 1;; ev (x : xs) = od xs;; od [] = 0;; od (x : xs) = ev xs;; main xs = ev xs;;";
        let e = encode_program(&parse_program(src).unwrap()).unwrap();
        assert!(e.functions.is_empty());
        assert_eq!(e.skipped.len(), 0, "neither function calls itself directly");
        let src = "ev [] = 1;; ev (x : xs) = od xs + ev xs;; od [] = 0;; od (x : xs) = ev xs;; main xs = ev xs;;";
        let e = encode_program(&parse_program(src).unwrap()).unwrap();
        assert_eq!(e.skipped, vec![("ev".to_string(), "mutually recursive".to_string())]);
    }

    #[test]
    fn partial_applications_are_eta_expanded() {
        let src = "len [] = 0;; len (x : xs) = 1 + len xs;; main xss = map xss len;;";
        let p = parse_program(src).unwrap();
        let e = encode_program(&p).unwrap();
        assert_eq!(e.program.main.to_string(), "map xss (\\x#1. len' (encode_len x#1))");
        let arg = Value::list([Value::nil(), Value::list([Value::Int(4), Value::Int(5)])]);
        let a = evaluate(&p, std::slice::from_ref(&arg), DEFAULT_FUEL).unwrap();
        let b = evaluate(&e.program, &[arg], DEFAULT_FUEL).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn matches_golden_files() {
        for (src, golden) in [("mmul-distilled", "mmul-encoded"), ("dotp", "dotp-encoded")] {
            let e = encode_program(&corpus::entry(src).unwrap().program().unwrap()).unwrap();
            let g = corpus::entry(golden).unwrap().program().unwrap();
            assert_eq!(canonical_form(&e.program), canonical_form(&g), "{src}");
        }
    }

    #[test]
    fn output_reparses() {
        for p in [distilled_mmul(), dotp()] {
            let e = encode_program(&p).unwrap();
            let text = program_to_string(&e.program);
            let back = parse_program(&text).unwrap();
            assert_eq!(program_to_string(&back), text);
        }
    }
}
