use proptest::prelude::*;

use skelc::encode::{encode_program, random_value};
use skelc::lang::{evaluate, parse_program, program_to_string, Expr, Program, Value, DEFAULT_FUEL};
use skelc::lts::{build_lts, builtin_templates, extract_program, isomorphic, skeletonize};
use skelc::runtime::{run, Chunking, Direction, ExecConfig};

const SKELETONS: &str = "-- skelc: generated
main :: [Int] -> [Int];;
main xs = map xs (\\x. x * x + 1);;
";

const SUM_SQUARES: &str = "main :: [Int] -> Int;; main xs = mapReduce xs (+) 0 (\\x. x * x);;";

const DIGITS: &str = "main :: [Int] -> Int;; main xs = mapReduce1 xs (\\a. \\b. a * 10 + b) (\\x. x);;";

const LENGTHS: &str = "
main :: [[Int]] -> Int;;
main xss = total xss;;
total :: [[Int]] -> Int;;
total [] = 0;;
total (xs : xss) = len xs + total xss;;
len :: [Int] -> Int;;
len [] = 0;;
len (x : xs) = 1 + len xs;;
";

fn parsed(src: &str) -> Program {
    parse_program(src).unwrap()
}

fn ints(xs: &[i64]) -> Value {
    Value::list(xs.iter().map(|&x| Value::Int(x)))
}

fn config() -> impl Strategy<Value = ExecConfig> {
    (1usize..9, any::<bool>())
        .prop_map(|(w, block)| ExecConfig::parallel(w, if block { Chunking::Block } else { Chunking::RoundRobin }))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parallel_map_matches_the_oracle(xs in prop::collection::vec(-50i64..50, 0..40), cfg in config()) {
        let out = run(&parsed(SKELETONS), &cfg, &[ints(&xs)]).unwrap();
        let want: Vec<i64> = xs.iter().map(|x| x * x + 1).collect();
        prop_assert_eq!(out.value, ints(&want));
        prop_assert!(out.stats.peak_tasks <= cfg.workers);
    }

    #[test]
    fn parallel_map_reduce_matches_the_oracle(xs in prop::collection::vec(-50i64..50, 0..40), cfg in config()) {
        let out = run(&parsed(SUM_SQUARES), &cfg, &[ints(&xs)]).unwrap();
        prop_assert_eq!(out.value, Value::Int(xs.iter().map(|x| x * x).sum()));
    }

    #[test]
    fn fold_direction_is_honoured(xs in prop::collection::vec(-9i64..9, 1..12), cfg in config(), left: bool) {
        let direction = if left { Direction::Left } else { Direction::Right };
        let cfg = ExecConfig { direction, ..cfg };
        let out = run(&parsed(DIGITS), &cfg, &[ints(&xs)]).unwrap();
        let want = if left {
            xs[1..].iter().fold(xs[0], |a, b| a * 10 + b)
        } else {
            xs[..xs.len() - 1].iter().rev().fold(xs[xs.len() - 1], |b, a| a * 10 + b)
        };
        prop_assert_eq!(out.value, Value::Int(want));
    }

    #[test]
    fn encoders_return_non_empty_lists(seed: u64, size in 0usize..10) {
        use rand::SeedableRng;
        let p = parsed(LENGTHS);
        let e = encode_program(&p).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for f in &e.functions {
            let (params, _) = p.sigs[&f.original].split_arrows();
            let args: Vec<Value> = f.shape.inputs.matched.iter().map(|&i| random_value(&p, params[i], &mut rng, size)).collect();
            let mut q = e.program.clone();
            q.main_params = (0..args.len()).map(|k| format!("a{k}")).collect();
            q.main = Expr::app(Expr::fun(f.encoder.as_str()), q.main_params.iter().map(|x| Expr::var(x.as_str())));
            let v = evaluate(&q, &args, DEFAULT_FUEL).unwrap();
            prop_assert!(v.as_list().is_some_and(|l| !l.is_empty()), "{} gave {}", f.encoder, v);
        }
    }

    #[test]
    fn encoding_and_skeletonizing_preserve_meaning(xss in prop::collection::vec(prop::collection::vec(-9i64..9, 0..6), 0..6)) {
        let p = parsed(LENGTHS);
        let encoded = encode_program(&p).unwrap().program;
        let (skel, _) = skeletonize(&encoded, builtin_templates()).unwrap();
        let arg = Value::list(xss.iter().map(|xs| ints(xs)));
        let want = Value::Int(xss.iter().map(|xs| xs.len() as i64).sum());
        prop_assert_eq!(&evaluate(&encoded, std::slice::from_ref(&arg), DEFAULT_FUEL).unwrap(), &want);
        prop_assert_eq!(&evaluate(&skel, std::slice::from_ref(&arg), DEFAULT_FUEL).unwrap(), &want);
        for workers in [1, 3] {
            let out = run(&skel, &ExecConfig::parallel(workers, Chunking::Block), std::slice::from_ref(&arg)).unwrap();
            prop_assert_eq!(&out.value, &want);
        }
    }
}

#[test]
fn rebuilt_programs_have_isomorphic_graphs() {
    for e in skelc::corpus::corpus() {
        let p = e.program().unwrap();
        let l = build_lts(&p).unwrap();
        let back = extract_program(&l, &[]).unwrap();
        assert!(isomorphic(&l, &build_lts(&back).unwrap()), "{}", e.id);
    }
}

#[test]
fn printed_programs_reparse() {
    for e in skelc::corpus::corpus() {
        let p = e.program().unwrap();
        let text = program_to_string(&p);
        assert_eq!(program_to_string(&parse_program(&text).unwrap()), text, "{}", e.id);
    }
}
