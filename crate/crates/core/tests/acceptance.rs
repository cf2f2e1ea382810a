//! Acceptance gate. Prints one PASS, FAIL or N/A line per criterion and
//! exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skelc::bench::median;
use skelc::corpus::{self, InputKind};
use skelc::encode::{canonical_form, encode_program, random_value};
use skelc::lang::{evaluate, Expr, Program, Value, DEFAULT_FUEL};
use skelc::lts::{build_lts, builtin_templates, extract_program, identify, skeletonize};
use skelc::runtime::{logical_cores, run, Chunking, ExecConfig};

const GOLDEN_LIMIT: Duration = Duration::from_secs(1);
const EQUIV_LIMIT: Duration = Duration::from_secs(60);
const EQUIV_TRIALS: usize = 200;
const MAX_MATRIX: usize = 8;
const MAX_TREE_NODES: usize = 256;
const SINGLETON_INPUTS: usize = 1000;
const ROUND_TRIP_TRIALS: usize = 100;
const DETERMINISM_TRIALS: usize = 50;
const DETERMINISM_WORKERS: [usize; 4] = [1, 2, 4, 8];
const SPEEDUP_SIZE: usize = 200;
const SPEEDUP_WORKERS: usize = 4;
const SPEEDUP_MIN: f64 = 1.5;
const SPEEDUP_REPS: usize = 5;

type Criterion = (&'static str, fn() -> Verdict);

enum Verdict {
    Pass(String),
    Fail(String),
    NotApplicable(String),
}

use Verdict::*;

fn program(id: &str) -> Program {
    corpus::entry(id).unwrap_or_else(|| panic!("corpus entry {id}")).program().unwrap()
}

fn matrix_oracle(a: &Value, b: &Value) -> Value {
    let a = a.to_int_matrix().expect("matrix");
    let b = b.to_int_matrix().expect("matrix");
    let cols = b.first().map_or(0, Vec::len);
    let mut out = vec![vec![0i64; cols]; a.len()];
    for (i, row) in a.iter().enumerate() {
        for j in 0..cols {
            for (k, x) in row.iter().enumerate() {
                out[i][j] += x * b[k][j];
            }
        }
    }
    Value::int_matrix(&out)
}

fn tree_oracle(a: &Value, b: &Value) -> i64 {
    match (a, b) {
        (Value::Con(x, xs), Value::Con(y, ys)) if x == "B" && y == "B" => {
            xs[0].as_int().unwrap() * ys[0].as_int().unwrap()
                + tree_oracle(&xs[1], &ys[1])
                + tree_oracle(&xs[2], &ys[2])
        }
        _ => 0,
    }
}

fn golden() -> Verdict {
    let start = Instant::now();
    let mut problems = Vec::new();
    for (src, golden) in [("mmul-distilled", "mmul-encoded"), ("dotp", "dotp-encoded")] {
        let e = match encode_program(&program(src)) {
            Ok(e) => e,
            Err(err) => return Fail(format!("{src}: {err}")),
        };
        if canonical_form(&e.program) != canonical_form(&program(golden)) {
            problems.push(format!("{src} differs from {golden}"));
        }
    }
    // Constructor field shapes of the three matrix cell types.
    let e = encode_program(&program("mmul-distilled")).unwrap();
    let shapes: Vec<Vec<String>> = e
        .functions
        .iter()
        .map(|f| {
            f.decl
                .ctors
                .iter()
                .map(|c| c.fields.iter().map(ToString::to_string).collect::<Vec<_>>().join(" "))
                .collect()
        })
        .collect();
    let expected: Vec<Vec<&str>> = vec![vec!["", "", "[a] [a]"], vec!["", ""], vec!["", "", "a [a]"]];
    if shapes != expected {
        problems.push(format!("matrix cell types {shapes:?}"));
    }
    let took = start.elapsed();
    if took > GOLDEN_LIMIT {
        problems.push(format!("took {took:.2?}"));
    }
    if problems.is_empty() {
        Pass(format!("both goldens match modulo renaming in {took:.2?}"))
    } else {
        Fail(problems.join("; "))
    }
}

fn equivalence() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let original = program("mmul-original");
    let mmul_encoded = encode_program(&program("mmul-distilled")).unwrap().program;
    let dotp = program("dotp");
    let dotp_encoded = encode_program(&dotp).unwrap().program;
    let mut mismatches = Vec::new();
    for _ in 0..EQUIV_TRIALS {
        let args = corpus::random_matrix_args(&mut rng, MAX_MATRIX);
        let want = matrix_oracle(&args[0], &args[1]);
        let a = evaluate(&original, &args, DEFAULT_FUEL);
        let b = evaluate(&mmul_encoded, &args, DEFAULT_FUEL);
        if a.as_ref() != Ok(&want) || b.as_ref() != Ok(&want) {
            mismatches.push(format!("matrices {} x {}: {a:?} vs {b:?}", args[0], args[1]));
        }
    }
    for _ in 0..EQUIV_TRIALS {
        let args = corpus::random_tree_args(&mut rng, MAX_TREE_NODES);
        let want = Value::Int(tree_oracle(&args[0], &args[1]));
        let a = evaluate(&dotp, &args, DEFAULT_FUEL);
        let b = evaluate(&dotp_encoded, &args, DEFAULT_FUEL);
        if a.as_ref() != Ok(&want) || b.as_ref() != Ok(&want) {
            mismatches.push(format!("trees: {a:?} vs {b:?}, expected {want}"));
        }
    }
    let took = start.elapsed();
    match (mismatches.first(), took > EQUIV_LIMIT) {
        (None, false) => Pass(format!("{} trials, 0 mismatches in {took:.2?}", 2 * EQUIV_TRIALS)),
        (Some(m), _) => Fail(format!("{} mismatches; first: {m}", mismatches.len())),
        (None, true) => Fail(format!("took {took:.2?}")),
    }
}

fn singletons() -> Verdict {
    let mut encoders = Vec::new();
    for id in ["mmul-distilled", "dotp"] {
        let p = program(id);
        let e = encode_program(&p).unwrap();
        for f in &e.functions {
            let sig = p.sigs.get(&f.original).unwrap_or_else(|| panic!("{} has no signature", f.original));
            let (params, _) = sig.split_arrows();
            let types: Vec<_> = f.shape.inputs.matched.iter().map(|&i| params[i].clone()).collect();
            encoders.push((e.program.clone(), f.encoder.clone(), types));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut violations = Vec::new();
    for i in 0..SINGLETON_INPUTS {
        let (prog, encoder, types) = &encoders[i % encoders.len()];
        let size = rng.gen_range(0..=8);
        let args: Vec<Value> = types.iter().map(|t| random_value(prog, t, &mut rng, size)).collect();
        let mut p = prog.clone();
        p.main_params = (0..args.len()).map(|k| format!("a{k}")).collect();
        p.main = Expr::app(Expr::fun(encoder.as_str()), p.main_params.iter().map(|x| Expr::var(x.as_str())));
        match evaluate(&p, &args, DEFAULT_FUEL) {
            Ok(v) if v.as_list().is_some_and(|l| !l.is_empty()) => {}
            other => violations.push(format!("{encoder} {args:?} = {other:?}")),
        }
    }
    match violations.first() {
        None => Pass(format!("{SINGLETON_INPUTS} inputs over {} encoders, 0 violations", encoders.len())),
        Some(v) => Fail(format!("{} violations; first: {v}", violations.len())),
    }
}

fn identification() -> Verdict {
    let table = |id: &str| -> BTreeSet<(String, String)> {
        let e = encode_program(&program(id)).unwrap();
        identify(&e.program, builtin_templates())
            .unwrap()
            .into_iter()
            .map(|r| (r.function, r.skeleton.map_or("none", |s| s.name()).to_string()))
            .collect()
    };
    let set = |rows: &[(&str, &str)]| -> BTreeSet<(String, String)> {
        rows.iter().map(|(f, s)| (f.to_string(), s.to_string())).collect()
    };
    let mmul = table("mmul-distilled");
    let dotp = table("dotp");
    let want_mmul = set(&[("mMul'_1", "map"), ("mMul'_2", "none"), ("mMul'_3", "mapReduce")]);
    let want_dotp = set(&[("dotP'", "mapReduce1")]);
    if mmul == want_mmul && dotp == want_dotp {
        Pass("matrix {mMul'_1 map, mMul'_2 none, mMul'_3 mapReduce}; tree {dotP' mapReduce1}".into())
    } else {
        Fail(format!("matrix {mmul:?}; tree {dotp:?}"))
    }
}

fn arguments(kind: InputKind, rng: &mut ChaCha8Rng) -> Vec<Value> {
    match kind {
        InputKind::Matrices => corpus::random_matrix_args(rng, 6),
        InputKind::Trees => corpus::random_tree_args(rng, 32),
    }
}

fn lts_round_trip() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut problems = Vec::new();
    let mut largest = (0, 0);
    for e in corpus::corpus() {
        let p = e.program().unwrap();
        let l = match build_lts(&p) {
            Ok(l) => l,
            Err(err) => {
                problems.push(format!("{}: {err}", e.id));
                continue;
            }
        };
        if l.len() > p.size() {
            problems.push(format!("{}: {} states for size {}", e.id, l.len(), p.size()));
        }
        if l.len() > largest.0 {
            largest = (l.len(), p.size());
        }
        let back = match extract_program(&l, &[]) {
            Ok(b) => b,
            Err(err) => {
                problems.push(format!("{}: extract: {err}", e.id));
                continue;
            }
        };
        for _ in 0..ROUND_TRIP_TRIALS {
            let args = arguments(e.inputs, &mut rng);
            let a = evaluate(&p, &args, DEFAULT_FUEL);
            let b = evaluate(&back, &args, DEFAULT_FUEL);
            if a != b {
                problems.push(format!("{}: {a:?} vs {b:?}", e.id));
                break;
            }
        }
    }
    match problems.first() {
        None => Pass(format!(
            "{} programs, largest {} states for size {}, {ROUND_TRIP_TRIALS} trials each",
            corpus::corpus().len(),
            largest.0,
            largest.1
        )),
        Some(p) => Fail(format!("{} problems; first: {p}", problems.len())),
    }
}

fn skeletonized_programs() -> Vec<(String, Program, InputKind)> {
    let mut out = Vec::new();
    for e in corpus::corpus() {
        let p = e.program().unwrap();
        if e.role == corpus::Role::Distilled {
            let encoded = encode_program(&p).unwrap().program;
            let (s, _) = skeletonize(&encoded, builtin_templates()).unwrap();
            out.push((format!("{}-skeletonized", e.id), s, e.inputs));
        } else if e.source.contains("map") {
            out.push((e.id.to_string(), p, e.inputs));
        }
    }
    out
}

fn determinism() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let programs = skeletonized_programs();
    let mut runs = 0;
    let mut problems = Vec::new();
    for (name, p, kind) in &programs {
        for _ in 0..DETERMINISM_TRIALS {
            let args = arguments(*kind, &mut rng);
            let seq = run(p, &ExecConfig::sequential(), &args).map(|o| o.value);
            for w in DETERMINISM_WORKERS {
                for c in [Chunking::RoundRobin, Chunking::Block] {
                    runs += 1;
                    let par = run(p, &ExecConfig::parallel(w, c), &args).map(|o| o.value);
                    if par != seq {
                        problems.push(format!("{name} with {w} workers ({c}): {par:?} vs {seq:?}"));
                    }
                }
            }
        }
    }
    match problems.first() {
        None => Pass(format!("{} programs, {runs} parallel runs equal to sequential", programs.len())),
        Some(p) => Fail(format!("{} mismatches; first: {p}", problems.len())),
    }
}

fn speedup() -> Verdict {
    let cores = logical_cores();
    if cores < SPEEDUP_WORKERS {
        return NotApplicable(format!("{cores} logical cores, need {SPEEDUP_WORKERS}"));
    }
    let encoded = encode_program(&program("mmul-distilled")).unwrap().program;
    let (p, _) = skeletonize(&encoded, builtin_templates()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let args = corpus::matrix_args(&mut rng, SPEEDUP_SIZE, SPEEDUP_SIZE, SPEEDUP_SIZE);
    let time = |workers: usize| -> f64 {
        let cfg = ExecConfig::parallel(workers, Chunking::RoundRobin);
        let mut ms: Vec<f64> = (0..SPEEDUP_REPS)
            .map(|_| {
                let t = Instant::now();
                run(&p, &cfg, &args).expect("run");
                t.elapsed().as_secs_f64() * 1e3
            })
            .collect();
        median(&mut ms).unwrap()
    };
    let one = time(1);
    let four = time(SPEEDUP_WORKERS);
    let s = one / four;
    let line = format!("{one:.1} ms with 1 worker, {four:.1} ms with {SPEEDUP_WORKERS}: {s:.2}x (need {SPEEDUP_MIN}x)");
    if s >= SPEEDUP_MIN {
        Pass(line)
    } else {
        Fail(line)
    }
}

fn registry() -> Verdict {
    let names: BTreeSet<&str> = builtin_templates().iter().map(|t| t.skeleton.name()).collect();
    let want: BTreeSet<&str> = ["map", "mapReduce", "mapReduce1"].into();
    if names == want && builtin_templates().len() == 3 {
        Pass(format!("{names:?}"))
    } else {
        Fail(format!("{names:?}"))
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("encoding goldens", golden),
        ("semantic equivalence", equivalence),
        ("encoded lists are non-empty", singletons),
        ("skeleton identification", identification),
        ("LTS size and round trip", lts_round_trip),
        ("parallel determinism", determinism),
        ("speedup", speedup),
        ("template registry", registry),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (tag, detail) = match check() {
            Pass(d) => ("PASS", d),
            Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            NotApplicable(d) => ("N/A ", d),
        };
        println!("{tag} {}. {name}: {detail}", i + 1);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
