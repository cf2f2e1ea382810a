//! Bundled example programs and random input generators for them.

use rand::Rng;

use crate::error::{Error, Result};
use crate::lang::{parse_program, Program, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Original,
    Distilled,
    HandParallel,
    ExpectedEncoded,
    EncodedParallel,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Original => "original",
            Role::Distilled => "distilled",
            Role::HandParallel => "hand-parallel",
            Role::ExpectedEncoded => "expected-encoded",
            Role::EncodedParallel => "encoded-parallel",
        }
    }
}

/// Shape of the arguments `main` expects.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputKind {
    /// Two integer matrices, `n x m` and `m x p`.
    Matrices,
    /// Two binary trees built from `E` and `B label left right`.
    Trees,
}

#[derive(Clone, Copy, Debug)]
pub struct CorpusEntry {
    pub id: &'static str,
    pub file: &'static str,
    pub source: &'static str,
    pub role: Role,
    pub inputs: InputKind,
}

impl CorpusEntry {
    pub fn program(&self) -> Result<Program> {
        parse_program(self.source).map_err(|e| Error::Invalid(format!("{}: {e}", self.file)))
    }
}

macro_rules! entry {
    ($id:literal, $role:expr, $inputs:expr) => {
        CorpusEntry {
            id: $id,
            file: concat!($id, ".mfl"),
            source: include_str!(concat!("../corpus/", $id, ".mfl")),
            role: $role,
            inputs: $inputs,
        }
    };
}

const ENTRIES: &[CorpusEntry] = &[
    entry!("mmul-original", Role::Original, InputKind::Matrices),
    entry!("mmul-hand-skeletons", Role::HandParallel, InputKind::Matrices),
    entry!("mmul-distilled", Role::Distilled, InputKind::Matrices),
    entry!("mmul-encoded", Role::ExpectedEncoded, InputKind::Matrices),
    entry!("mmul-encoded-parallel", Role::EncodedParallel, InputKind::Matrices),
    entry!("mmul-hand-parallel", Role::HandParallel, InputKind::Matrices),
    entry!("dotp", Role::Distilled, InputKind::Trees),
    entry!("dotp-encoded", Role::ExpectedEncoded, InputKind::Trees),
    entry!("dotp-encoded-parallel", Role::EncodedParallel, InputKind::Trees),
];

pub fn corpus() -> &'static [CorpusEntry] {
    ENTRIES
}

pub fn entry(id: &str) -> Option<&'static CorpusEntry> {
    ENTRIES.iter().find(|e| e.id == id || e.file == id)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Vec<Vec<i64>> {
    (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(-9..=9)).collect()).collect()
}

/// Arguments for `n x m` times `m x p`.
pub fn matrix_args(rng: &mut impl Rng, n: usize, m: usize, p: usize) -> Vec<Value> {
    vec![Value::int_matrix(&random_matrix(rng, n, m)), Value::int_matrix(&random_matrix(rng, m, p))]
}

/// Random dimensions up to `max` with `n <= m`. The distilled program
/// walks the rows of both matrices in lockstep, so it only agrees with the
/// direct definition when the first matrix has no more rows than the
/// second.
pub fn random_matrix_args(rng: &mut impl Rng, max: usize) -> Vec<Value> {
    let m = rng.gen_range(1..=max);
    let n = rng.gen_range(1..=m);
    let p = rng.gen_range(1..=max);
    matrix_args(rng, n, m, p)
}

pub fn leaf() -> Value {
    Value::Con("E".into(), vec![])
}

pub fn branch(label: i64, left: Value, right: Value) -> Value {
    Value::Con("B".into(), vec![Value::Int(label), left, right])
}

/// A tree with exactly `nodes` branch nodes, split evenly.
pub fn balanced_tree(rng: &mut impl Rng, nodes: usize) -> Value {
    if nodes == 0 {
        return leaf();
    }
    let left = (nodes - 1) / 2;
    let l = balanced_tree(rng, left);
    let r = balanced_tree(rng, nodes - 1 - left);
    branch(rng.gen_range(-9..=9), l, r)
}

/// A tree with exactly `nodes` branch nodes and a random shape.
pub fn random_tree(rng: &mut impl Rng, nodes: usize) -> Value {
    if nodes == 0 {
        return leaf();
    }
    let left = rng.gen_range(0..nodes);
    let l = random_tree(rng, left);
    let r = random_tree(rng, nodes - 1 - left);
    branch(rng.gen_range(-9..=9), l, r)
}

/// Two independent random trees of up to `max` nodes each.
pub fn random_tree_args(rng: &mut impl Rng, max: usize) -> Vec<Value> {
    let a = rng.gen_range(0..=max);
    let b = rng.gen_range(0..=max);
    vec![random_tree(rng, a), random_tree(rng, b)]
}

/// Random arguments for an entry, scaled by `max`.
pub fn random_args(kind: InputKind, rng: &mut impl Rng, max: usize) -> Vec<Value> {
    match kind {
        InputKind::Matrices => random_matrix_args(rng, max),
        InputKind::Trees => random_tree_args(rng, max),
    }
}

/// Benchmark arguments for a size: square-ish matrices `n x m` and `m x n`,
/// or two balanced trees of `n` nodes.
pub fn sized_args(kind: InputKind, rng: &mut impl Rng, n: usize, m: usize) -> Vec<Value> {
    match kind {
        InputKind::Matrices => matrix_args(rng, n, m, n),
        InputKind::Trees => vec![balanced_tree(rng, n), balanced_tree(rng, n)],
    }
}

/// Reference product of two integer matrices.
pub fn matrix_product(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let p = b.first().map_or(0, Vec::len);
    a.iter().map(|row| (0..p).map(|j| row.iter().zip(b).map(|(x, brow)| x * brow[j]).sum()).collect()).collect()
}

/// Reference tree dot product.
pub fn tree_dot(a: &Value, b: &Value) -> i64 {
    match (a, b) {
        (Value::Con(_, x), Value::Con(_, y)) if x.len() == 3 && y.len() == 3 => {
            x[0].as_int().unwrap_or(0) * y[0].as_int().unwrap_or(0) + tree_dot(&x[1], &y[1]) + tree_dot(&x[2], &y[2])
        }
        _ => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{evaluate, validate_distilled, DEFAULT_FUEL};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn every_entry_parses() {
        for e in corpus() {
            e.program().unwrap();
        }
    }

    #[test]
    fn distilled_entries_are_valid() {
        let distilled: Vec<_> = corpus().iter().filter(|e| e.role == Role::Distilled).collect();
        assert_eq!(distilled.len(), 2);
        for e in distilled {
            let r = validate_distilled(&e.program().unwrap());
            assert!(r.is_valid(), "{}: {:?}", e.id, r.violations);
        }
    }

    #[test]
    fn matrix_programs_compute_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let args = random_matrix_args(&mut rng, 4);
            let a = args[0].to_int_matrix().unwrap();
            let b = args[1].to_int_matrix().unwrap();
            let expected = Value::int_matrix(&matrix_product(&a, &b));
            for e in corpus().iter().filter(|e| e.inputs == InputKind::Matrices) {
                let got = evaluate(&e.program().unwrap(), &args, DEFAULT_FUEL).unwrap();
                assert_eq!(got, expected, "{} on {} {}", e.id, args[0], args[1]);
            }
        }
    }

    #[test]
    fn tree_programs_compute_dot_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let args = random_tree_args(&mut rng, 12);
            let expected = Value::Int(tree_dot(&args[0], &args[1]));
            for e in corpus().iter().filter(|e| e.inputs == InputKind::Trees) {
                let got = evaluate(&e.program().unwrap(), &args, DEFAULT_FUEL).unwrap();
                assert_eq!(got, expected, "{}", e.id);
            }
        }
    }

    #[test]
    fn small_tree_example() {
        let p = entry("dotp").unwrap().program().unwrap();
        let args = [branch(2, leaf(), leaf()), branch(3, leaf(), leaf())];
        assert_eq!(evaluate(&p, &args, DEFAULT_FUEL).unwrap(), Value::Int(6));
    }
}
