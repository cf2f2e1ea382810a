//! Differential testing of a program against its encoding.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::lang::ast::*;
use crate::lang::{evaluate, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub args: Vec<Value>,
    pub expected: String,
    pub actual: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EquivReport {
    pub trials: usize,
    /// Trials where the results differ or either side failed.
    pub counterexamples: Vec<Counterexample>,
}

impl EquivReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

fn show(r: &Result<Value, Error>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => format!("error: {e}"),
    }
}

/// Evaluates both programs on `trials` generated argument lists. A trial
/// counts as a failure if the values differ or if either evaluation fails,
/// including running out of fuel.
pub fn check_equivalence(
    original: &Program,
    encoded: &Program,
    mut gen: impl FnMut(&mut ChaCha8Rng) -> Vec<Value>,
    seed: u64,
    trials: usize,
    fuel: u64,
) -> EquivReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = EquivReport { trials, counterexamples: Vec::new() };
    for _ in 0..trials {
        let args = gen(&mut rng);
        let a = evaluate(original, &args, fuel);
        let b = evaluate(encoded, &args, fuel);
        let agree = matches!((&a, &b), (Ok(x), Ok(y)) if x == y);
        if !agree {
            report.counterexamples.push(Counterexample { args, expected: show(&a), actual: show(&b) });
        }
    }
    report
}

/// A random value of type `ty`. Lists have up to `size` elements and user
/// data types are unfolded to a depth of about `size`; type variables are
/// instantiated with integers.
pub fn random_value(prog: &Program, ty: &Type, rng: &mut impl Rng, size: usize) -> Value {
    match ty {
        Type::Var(_) | Type::Arrow(..) => Value::Int(rng.gen_range(-9..=9)),
        Type::Con(c, args) if c == INT && args.is_empty() => Value::Int(rng.gen_range(-9..=9)),
        Type::Con(c, args) if c == LIST && args.len() == 1 => {
            let n = rng.gen_range(0..=size);
            Value::list((0..n).map(|_| random_value(prog, &args[0], rng, size)))
        }
        Type::Con(c, args) => {
            let Some(decl) = prog.types.iter().find(|t| &t.name == c) else {
                return Value::Int(rng.gen_range(-9..=9));
            };
            let map = decl.params.iter().cloned().zip(args.iter().cloned()).collect();
            let recursive = |cd: &CtorDecl| cd.fields.iter().any(|f| mentions(f, c));
            let choices: Vec<&CtorDecl> = if size == 0 {
                let base: Vec<&CtorDecl> = decl.ctors.iter().filter(|cd| !recursive(cd)).collect();
                if base.is_empty() {
                    decl.ctors.iter().collect()
                } else {
                    base
                }
            } else {
                decl.ctors.iter().collect()
            };
            let cd = choices[rng.gen_range(0..choices.len())];
            let fields = cd
                .fields
                .iter()
                .map(|f| random_value(prog, &f.substitute(&map), rng, size.saturating_sub(1)))
                .collect();
            Value::Con(cd.name.clone(), fields)
        }
    }
}

fn mentions(t: &Type, name: &str) -> bool {
    match t {
        Type::Var(_) => false,
        Type::Con(c, args) => c == name || args.iter().any(|a| mentions(a, name)),
        Type::Arrow(a, b) => mentions(a, name) || mentions(b, name),
    }
}

/// Random arguments for `main` following its signature, or `None` when
/// the program declares none.
pub fn type_directed_args(prog: &Program, rng: &mut impl Rng, size: usize) -> Option<Vec<Value>> {
    let sig = prog.sigs.get("main")?;
    let (args, _) = sig.split_arrows();
    if args.len() < prog.main_params.len() {
        return None;
    }
    Some(args[..prog.main_params.len()].iter().map(|t| random_value(prog, t, rng, size)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::encode::encode_program;
    use crate::lang::{parse_program, DEFAULT_FUEL};

    #[test]
    fn identical_programs_agree() {
        let p = corpus::entry("dotp").unwrap().program().unwrap();
        let r = check_equivalence(&p, &p, |rng| corpus::random_tree_args(rng, 8), 1, 20, DEFAULT_FUEL);
        assert!(r.passed());
        assert_eq!(r.trials, 20);
    }

    #[test]
    fn finds_counterexamples() {
        let a = parse_program("main x = x + 1;;").unwrap();
        let b = parse_program("main x = x + 2;;").unwrap();
        let r = check_equivalence(&a, &b, |rng| vec![Value::Int(rng.gen_range(0..5))], 3, 5, 1000);
        assert_eq!(r.counterexamples.len(), 5);
    }

    #[test]
    fn type_directed_inputs_follow_the_signature() {
        let p = corpus::entry("dotp").unwrap().program().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let enc = encode_program(&p).unwrap().program;
        for _ in 0..20 {
            let args = type_directed_args(&p, &mut rng, 4).unwrap();
            assert_eq!(args.len(), 2);
            assert_eq!(evaluate(&p, &args, DEFAULT_FUEL), evaluate(&enc, &args, DEFAULT_FUEL));
        }
    }
}
