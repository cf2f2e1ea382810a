//! Whole-program evaluation entry points.

use super::ast::{Expr, Program};
use super::lift::lambda_lift;
use super::machine::Machine;
use super::value::Value;
use crate::error::{Error, Result};

pub const DEFAULT_FUEL: u64 = 100_000_000;

/// Stack size for evaluator threads; recursion depth follows list length.
pub const EVAL_STACK: usize = 1 << 30;

/// Runs `f` on a thread with a large stack.
pub fn with_big_stack<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .name("skelc-eval".into())
            .stack_size(EVAL_STACK)
            .spawn_scoped(s, f)
            .expect("spawn evaluator thread")
            .join()
            .unwrap_or_else(|e| std::panic::resume_unwind(e))
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub value: Value,
    pub steps: u64,
}

/// Evaluates `main` applied to `args` to a full normal form.
pub fn evaluate(prog: &Program, args: &[Value], fuel: u64) -> Result<Value> {
    evaluate_counted(prog, args, fuel).map(|o| o.value)
}

pub fn evaluate_counted(prog: &Program, args: &[Value], fuel: u64) -> Result<Outcome> {
    if args.len() != prog.main_params.len() {
        return Err(Error::Arity { name: "main".into(), expected: prog.main_params.len(), found: args.len() });
    }
    let lifted = lambda_lift(prog);
    with_big_stack(|| {
        let mut m = Machine::new(&lifted, fuel)?;
        run_main(&mut m, &lifted, args)
    })
}

/// Evaluates `main` on an existing machine (lifted program).
pub fn run_main(m: &mut Machine, prog: &Program, args: &[Value]) -> Result<Outcome> {
    let thunks = args.iter().map(|a| m.load(a)).collect::<Result<Vec<_>>>()?;
    let v = m.eval_open(&prog.main_params, thunks, &prog.main)?;
    let value = m.deep_val(v)?;
    Ok(Outcome { value, steps: m.steps() })
}

/// Evaluates a closed expression in the context of `prog`'s definitions.
pub fn evaluate_expr(prog: &Program, e: &Expr, fuel: u64) -> Result<Value> {
    let lifted = lambda_lift(prog);
    with_big_stack(|| {
        let mut m = Machine::new(&lifted, fuel)?;
        let v = m.eval_closed(e)?;
        m.deep_val(v)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_program;

    fn run(src: &str, args: &[Value]) -> Result<Value> {
        evaluate(&parse_program(src).unwrap(), args, DEFAULT_FUEL)
    }

    #[test]
    fn evaluates_constructors_and_arithmetic() {
        assert_eq!(run("data B ::= T | F;; main = T;;", &[]).unwrap(), Value::Con("T".into(), vec![]));
        assert_eq!(run("main x = x * 2 + 1;;", &[Value::Int(4)]).unwrap(), Value::Int(9));
    }

    #[test]
    fn evaluates_prelude_skeletons() {
        let src = "main xs = mapReduce1 xs (+) (\\x. x * x) : map xs (\\x. x + 1) ++ init xs;;";
        let xs = Value::list([1, 2, 3].map(Value::Int));
        let v = run(src, &[xs]).unwrap();
        assert_eq!(v.to_string(), "[14, 2, 3, 4, 1, 2]");
    }

    #[test]
    fn call_by_name_ignores_unused_divergence() {
        let src = "loop x = loop x;; k a b = a;; main = k 1 (loop 0);;";
        assert_eq!(run(src, &[]).unwrap(), Value::Int(1));
    }

    #[test]
    fn runs_out_of_fuel_on_divergence() {
        let p = parse_program("loop x = loop x;; main = loop 0;;").unwrap();
        assert_eq!(evaluate(&p, &[], 1000), Err(Error::FuelExhausted(1000)));
    }

    #[test]
    fn reads_back_functions() {
        let v = run("main = map [1] (+);;", &[]).unwrap();
        assert_eq!(v.to_string(), "[\\x#1. 1 + x#1]");
        let v = run("main y = \\x. x + y;;", &[Value::Int(3)]).unwrap();
        assert_eq!(v.to_string(), "\\x. x + 3");
    }

    #[test]
    fn where_blocks_are_lifted_transparently() {
        let src = "main y xs = h xs where { h [] = y; h (x : zs) = x + h zs };;";
        let v = run(src, &[Value::Int(10), Value::list([1, 2].map(Value::Int))]).unwrap();
        assert_eq!(v, Value::Int(13));
    }

    #[test]
    fn incomplete_match_is_reported() {
        let src = "main xs = init xs;;";
        assert!(matches!(run(src, &[Value::nil()]), Err(Error::Runtime(_))));
    }
}
