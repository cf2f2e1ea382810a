use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::lang::ast::*;
use crate::lang::machine::Skeleton;
use crate::lang::names::prefer_avoiding;
use crate::lang::subst::substitute;
use crate::lang::{lambda_lift, prelude};

use super::matcher::{sink_lets, ListEnd, SkeletonMatch, Unit};
use super::{binders, build_function_lts, build_lts, match_template, Action, Lts, SkeletonTemplate, StateId, TERMINAL};

/// One row of an identification table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Identification {
    pub function: Name,
    pub skeleton: Option<Skeleton>,
}

struct Residualizer<'a> {
    l: &'a Lts,
    bound: BTreeSet<Name>,
}

impl Residualizer<'_> {
    fn expr(&self, s: StateId) -> Result<Expr> {
        let l = self.l;
        if s == TERMINAL {
            return Err(Error::invalid("dangling transition into the final state"));
        }
        if let Some(f) = &l.states[s].function {
            return Ok(Expr::Fun(f.clone()));
        }
        if let Some((head, args)) = l.app_parts(s) {
            let args = args.into_iter().map(|a| self.expr(a)).collect::<Result<Vec<_>>>()?;
            return Ok(Expr::app(self.expr(head)?, args));
        }
        if let Some((c, args)) = l.con_parts(s) {
            let args = args.into_iter().map(|a| self.expr(a)).collect::<Result<Vec<_>>>()?;
            return Ok(Expr::Con(c.to_string(), args));
        }
        match l.edges(s) {
            [(Action::Var(x), TERMINAL)] if prelude::is_builtin(x) && !self.bound.contains(x) => {
                Ok(Expr::Fun(x.clone()))
            }
            [(Action::Var(x), TERMINAL)] => Ok(Expr::Var(x.clone())),
            [(Action::Int(n), TERMINAL)] => Ok(Expr::Int(*n)),
            [(Action::Lambda(x), b)] => Ok(Expr::lam(x.clone(), self.expr(*b)?)),
            [(Action::LetBody, b), bindings @ ..] => {
                let mut bs = Vec::new();
                for (a, t) in bindings {
                    let Action::LetBinding(x) = a else {
                        return Err(Error::invalid(format!("unexpected action `{a}` in a let state")));
                    };
                    bs.push((x.clone(), self.expr(*t)?));
                }
                Ok(Expr::Let(bs, Box::new(self.expr(*b)?)))
            }
            edges => Err(Error::invalid(format!("state {s} has no expression shape ({} edges)", edges.len()))),
        }
    }

    fn function(&self, s: StateId) -> Result<FunDef> {
        let name =
            self.l.states[s].function.clone().ok_or_else(|| Error::invalid(format!("state {s} is not a function")))?;
        let clauses = self
            .l
            .clauses(s)
            .into_iter()
            .map(|(ps, b)| Ok(Clause { params: ps.to_vec(), body: self.expr(b)? }))
            .collect::<Result<Vec<_>>>()?;
        Ok(FunDef { name, clauses })
    }

    /// The wrapper calling the skeleton and the element function it maps.
    fn skeleton_defs(&self, m: &SkeletonMatch, taken: &mut BTreeSet<Name>) -> Result<Vec<FunDef>> {
        let plain = m.elements[0].plain.clone();
        let list_var = prefer_avoiding("w", |n| plain.iter().any(|p| p == n));
        let elem_name =
            prefer_avoiding(&format!("{}_elem", m.function), |n| taken.contains(n) || prelude::is_builtin(n));
        taken.insert(elem_name.clone());

        let rename = |from: &[Name]| -> HashMap<Name, Expr> {
            from.iter().zip(&plain).map(|(a, b)| (a.clone(), Expr::var(b.clone()))).collect()
        };
        let elem_fn = Expr::app(Expr::fun(elem_name.clone()), plain.iter().map(|p| Expr::var(p.clone())));
        let combine = match &m.combine {
            Some(c) => Some(substitute(&self.expr(c.state)?, &rename(&c.plain))),
            None => None,
        };
        let unit = match &m.unit {
            Some(Unit::Identity(n)) => Some(Expr::Int(*n)),
            Some(Unit::Body { plain: from, body }) => Some(substitute(&self.expr(*body)?, &rename(from))),
            None => None,
        };
        let w = Expr::var(list_var.clone());
        let missing = || Error::invalid(format!("incomplete {} match for `{}`", m.skeleton.name(), m.function));
        let call = match m.skeleton {
            Skeleton::Map => {
                let mapped = Expr::app(Expr::fun("map"), [w, elem_fn]);
                match m.end {
                    // The final cell's image is not part of the result.
                    ListEnd::Cell => Expr::app(Expr::fun("init"), [mapped]),
                    ListEnd::Nil => mapped,
                }
            }
            Skeleton::MapReduce => {
                Expr::app(Expr::fun("mapReduce"), [w, combine.ok_or_else(missing)?, unit.ok_or_else(missing)?, elem_fn])
            }
            Skeleton::MapReduce1 => Expr::app(Expr::fun("mapReduce1"), [w, combine.ok_or_else(missing)?, elem_fn]),
        };
        let mut params: Vec<Pattern> = plain.iter().map(|p| Pattern::var(p.clone())).collect();
        params.insert(m.list_pos, Pattern::var(list_var));
        let wrapper = FunDef { name: m.function.clone(), clauses: vec![Clause { params, body: call }] };

        let clauses = m
            .elements
            .iter()
            .map(|e| {
                let mut params: Vec<Pattern> = e.plain.iter().map(|p| Pattern::var(p.clone())).collect();
                params.push(e.cell.clone());
                Ok(Clause { params, body: self.expr(e.body)? })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(vec![wrapper, FunDef { name: elem_name, clauses }])
    }
}

/// Function states reachable from `root`, in state order.
fn reachable_functions(l: &Lts, root: StateId) -> Vec<StateId> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![root];
    while let Some(s) = stack.pop() {
        if !seen.insert(s) {
            continue;
        }
        stack.extend(l.edges(s).iter().map(|(_, t)| *t));
    }
    seen.into_iter().filter(|&s| l.is_function(s)).collect()
}

/// Residualizes an LTS into a program. Function states whose definitions
/// match one of `templates` (tried in order) become calls of that skeleton
/// with a generated element function; every other state is rebuilt as it
/// was.
pub fn extract_program(l: &Lts, templates: &[SkeletonTemplate]) -> Result<Program> {
    Ok(extract_with_matches(l, templates, |_| true)?.0)
}

fn extract_with_matches(
    l: &Lts,
    templates: &[SkeletonTemplate],
    candidate: impl Fn(&str) -> bool,
) -> Result<(Program, Vec<SkeletonMatch>)> {
    let r = Residualizer { l, bound: binders(l) };
    let functions = reachable_functions(l, l.start);
    let mut taken: BTreeSet<Name> = functions.iter().filter_map(|&s| l.states[s].function.clone()).collect();
    taken.insert("main".into());
    let mut defs = Vec::new();
    let mut matches = Vec::new();
    for s in functions {
        let name = l.states[s].function.as_deref().unwrap_or_default();
        let found = if candidate(name) { templates.iter().find_map(|t| match_template(l, s, t)) } else { None };
        match found {
            Some(m) => {
                defs.extend(r.skeleton_defs(&m, &mut taken)?);
                matches.push(m);
            }
            None => defs.push(r.function(s)?),
        }
    }
    let main = if l.is_function(l.start) {
        Expr::Fun(l.states[l.start].function.clone().unwrap_or_default())
    } else {
        r.expr(l.start)?
    };
    let prog = Program { types: l.types.clone(), sigs: BTreeMap::new(), main_params: l.params.clone(), main, defs };
    Ok((prog, matches))
}

/// Lifts local definitions, sinks `let`s and rebuilds the program with
/// every matching function that walks an encoded list replaced by a
/// skeleton call.
pub fn skeletonize(prog: &Program, templates: &[SkeletonTemplate]) -> Result<(Program, Vec<Identification>)> {
    let prepared = sink_lets(&lambda_lift(prog));
    let l = build_lts(&prepared)?;
    let walkers: BTreeSet<&str> =
        prepared.defs.iter().filter(|d| walks_encoded_list(d)).map(|d| d.name.as_str()).collect();
    let (out, matches) = extract_with_matches(&l, templates, |f| walkers.contains(f))?;
    let table =
        matches.into_iter().map(|m| Identification { function: m.function, skeleton: Some(m.skeleton) }).collect();
    Ok((out, table))
}

/// Whether a definition walks an encoded list: it is self-recursive and
/// pattern matches only on one parameter, always with a cell pattern
/// `p : w`.
pub fn walks_encoded_list(d: &FunDef) -> bool {
    if !d.is_self_recursive() {
        return false;
    }
    let matched: Vec<usize> = (0..d.arity()).filter(|&i| d.clauses.iter().any(|c| !c.params[i].is_var())).collect();
    let [pos] = matched[..] else { return false };
    d.clauses.iter().all(|c| matches!(&c.params[pos], Pattern::Con(k, _) if k == CONS))
}

fn identify_where(
    prog: &Program,
    templates: &[SkeletonTemplate],
    keep: impl Fn(&FunDef) -> bool,
) -> Result<Vec<Identification>> {
    let prepared = sink_lets(&lambda_lift(prog));
    let mut out = Vec::new();
    for d in prepared.defs.iter().filter(|d| keep(d)) {
        let l = build_function_lts(&prepared, &d.name)?;
        let skeleton = templates.iter().find_map(|t| match_template(&l, l.start, t)).map(|m| m.skeleton);
        out.push(Identification { function: d.name.clone(), skeleton });
    }
    Ok(out)
}

/// Identification table for the functions that walk encoded lists.
pub fn identify(prog: &Program, templates: &[SkeletonTemplate]) -> Result<Vec<Identification>> {
    identify_where(prog, templates, walks_encoded_list)
}

/// Identification table for every definition.
pub fn identify_all(prog: &Program, templates: &[SkeletonTemplate]) -> Result<Vec<Identification>> {
    identify_where(prog, templates, |_| true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::lang::pretty::program_to_string;
    use crate::lang::{evaluate, parse_program, parse_program_with, ParseOptions, Value, DEFAULT_FUEL};
    use crate::lts::builtin_templates;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table(rows: &[Identification]) -> Vec<(String, Option<&'static str>)> {
        rows.iter().map(|r| (r.function.clone(), r.skeleton.map(Skeleton::name))).collect()
    }

    fn reparse(p: &Program) -> Program {
        let opts = ParseOptions { require_exhaustive: false, with_prelude: true };
        parse_program_with(&program_to_string(p), opts).unwrap()
    }

    #[test]
    fn constructor_application_round_trips() {
        let p = parse_program("data P ::= C Int Int;; main x y = C x y;;").unwrap();
        let out = extract_program(&build_lts(&p).unwrap(), &[]).unwrap();
        assert_eq!(out.main, p.main);
        assert!(out.defs.is_empty());
    }

    #[test]
    fn empty_template_set_preserves_meaning() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for e in corpus::corpus() {
            let p = e.program().unwrap();
            let out = reparse(&extract_program(&build_lts(&p).unwrap(), &[]).unwrap());
            for _ in 0..5 {
                let args = corpus::random_args(e.inputs, &mut rng, 5);
                assert_eq!(
                    evaluate(&out, &args, DEFAULT_FUEL).unwrap(),
                    evaluate(&p, &args, DEFAULT_FUEL).unwrap(),
                    "{}",
                    e.id
                );
            }
        }
    }

    #[test]
    fn encoded_matrix_table() {
        let p = corpus::entry("mmul-encoded").unwrap().program().unwrap();
        let rows = identify(&p, builtin_templates()).unwrap();
        assert_eq!(
            table(&rows),
            [("mMul'_1".into(), Some("map")), ("mMul'_2".into(), None), ("mMul'_3".into(), Some("mapReduce"))]
        );
    }

    #[test]
    fn encoded_tree_table() {
        let p = corpus::entry("dotp-encoded").unwrap().program().unwrap();
        let rows = identify(&p, builtin_templates()).unwrap();
        assert_eq!(table(&rows), [("dotP'".into(), Some("mapReduce1"))]);
    }

    #[test]
    fn skeletonized_programs_agree_with_their_sources() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for id in ["mmul-encoded", "dotp-encoded"] {
            let e = corpus::entry(id).unwrap();
            let p = e.program().unwrap();
            let (out, rows) = skeletonize(&p, builtin_templates()).unwrap();
            assert!(!rows.is_empty());
            let text = program_to_string(&out);
            let out = reparse(&out);
            for _ in 0..10 {
                let args = corpus::random_args(e.inputs, &mut rng, 5);
                assert_eq!(
                    evaluate(&out, &args, DEFAULT_FUEL).unwrap(),
                    evaluate(&p, &args, DEFAULT_FUEL).unwrap(),
                    "{text}"
                );
            }
        }
    }

    #[test]
    fn dot_product_becomes_a_reduction() {
        let p = corpus::entry("dotp-encoded").unwrap().program().unwrap();
        let (out, _) = skeletonize(&p, builtin_templates()).unwrap();
        let text = program_to_string(&out);
        assert!(text.contains("dotP' w = mapReduce1 w (+) dotP'_elem;;"), "{text}");
        let args =
            [corpus::branch(2, corpus::leaf(), corpus::leaf()), corpus::branch(3, corpus::leaf(), corpus::leaf())];
        assert_eq!(evaluate(&out, &args, DEFAULT_FUEL).unwrap(), Value::Int(6));
    }
}
