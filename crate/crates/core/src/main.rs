use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use skelc::bench::{bench, BenchConfig};
use skelc::corpus;
use skelc::encode::{check_equivalence, encode_program, type_directed_args};
use skelc::lang::{
    evaluate_expr, lambda_lift, parse_expr_in, parse_program, program_to_string, validate_distilled, Program, Value,
};
use skelc::lts::{
    build_function_lts, build_lts, builtin_templates, extract_program, identify, identify_all, skeletonize, to_dot,
};
use skelc::pipeline::{pipeline_source, PipelineConfig};
use skelc::runtime::{run, Chunking, Direction, ExecConfig, Mode};
use skelc::{Error, Result};

/// Encode recursive functions over synthesized lists, find map and
/// map-reduce skeletons in them and run the result in parallel.
#[derive(Parser)]
#[command(name = "skelc", version)]
struct Cli {
    /// Evaluation step budget.
    #[arg(long, global = true, default_value_t = skelc::lang::DEFAULT_FUEL)]
    fuel: u64,
    /// Seed for generated inputs.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a program and print it back.
    Parse { file: String },
    /// Check that a program is in distilled form.
    Validate { file: String },
    /// Encode the recursive functions of a program.
    Encode {
        file: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print which skeleton each function matches.
    Identify {
        file: String,
        /// Include every definition, not only those walking encoded lists.
        #[arg(long)]
        all: bool,
    },
    /// Build the transition system of a program.
    Lts {
        file: String,
        /// Write Graphviz output here.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Root the graph at this function instead of `main`.
        #[arg(long)]
        function: Option<String>,
    },
    /// Rebuild a program from its transition system, with skeleton calls.
    Extract {
        file: String,
        /// Match every definition, not only those walking encoded lists.
        #[arg(long)]
        all: bool,
        /// Use no templates; the output is the input rebuilt.
        #[arg(long, conflicts_with = "all")]
        no_templates: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Evaluate a program on arguments given as expressions.
    Run {
        file: String,
        #[arg(long, default_value = "seq")]
        mode: String,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value = "rr")]
        chunking: String,
        /// Fold direction of parallel mapReduce1: right or left.
        #[arg(long, default_value = "right")]
        direction: String,
        #[arg(long, num_args = 0..)]
        args: Vec<String>,
        /// Print run statistics as JSON.
        #[arg(long)]
        stats: bool,
    },
    /// Compare two programs on random arguments typed by the first's `main` signature.
    CheckEquiv {
        first: String,
        second: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 6)]
        size: usize,
    },
    /// Run every stage and print a JSON report.
    Pipeline {
        file: String,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 6)]
        size: usize,
    },
    /// Time corpus programs; prints CSV.
    Bench {
        /// Corpus entry ids (default: the matrix programs).
        #[arg(long, value_delimiter = ',')]
        entries: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "50,100")]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
        workers: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value = "rr")]
        chunking: String,
        /// Seconds after which a cell is recorded as timed out.
        #[arg(long, default_value_t = 60)]
        timeout: u64,
        /// Also write the JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

/// Reads a program file, or a bundled corpus entry by id.
fn load_source(file: &str) -> Result<(String, String)> {
    let path = Path::new(file);
    if !path.exists() {
        if let Some(e) = corpus::entry(file) {
            return Ok((e.file.to_string(), e.source.to_string()));
        }
    }
    let src = fs::read_to_string(path).map_err(|e| Error::Io(format!("{file}: {e}")))?;
    Ok((file.to_string(), src))
}

fn load(file: &str) -> Result<Program> {
    let (name, src) = load_source(file)?;
    parse_program(&src).map_err(|e| match e {
        Error::Parse { .. } => Error::Invalid(format!("{name}: {e}")),
        other => other,
    })
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_direction(s: &str) -> Result<Direction> {
    match s {
        "right" | "r" => Ok(Direction::Right),
        "left" | "l" => Ok(Direction::Left),
        _ => Err(Error::invalid(format!("unknown direction `{s}` (expected right or left)"))),
    }
}

fn parse_args(p: &Program, args: &[String], fuel: u64) -> Result<Vec<Value>> {
    args.iter()
        .map(|a| {
            let e = parse_expr_in(p, a)?;
            evaluate_expr(p, &e, fuel)
        })
        .collect()
}

fn execute(cli: Cli) -> Result<()> {
    let fuel = cli.fuel;
    match cli.command {
        Command::Parse { file } => emit(&program_to_string(&load(&file)?), None),
        Command::Validate { file } => {
            let report = validate_distilled(&load(&file)?);
            if report.is_valid() {
                println!("{file}: distilled form");
                return Ok(());
            }
            for v in &report.violations {
                println!("{v}");
            }
            Err(Error::NotDistilled(format!("{} violations", report.violations.len())))
        }
        Command::Encode { file, output } => {
            let encoded = encode_program(&load(&file)?)?;
            for (f, why) in &encoded.skipped {
                eprintln!("skipped {f}: {why}");
            }
            emit(&program_to_string(&encoded.program), output.as_deref())
        }
        Command::Identify { file, all } => {
            let p = load(&file)?;
            let rows = if all { identify_all(&p, builtin_templates())? } else { identify(&p, builtin_templates())? };
            let width = rows.iter().map(|r| r.function.len()).max().unwrap_or(0);
            for r in rows {
                println!("{:width$}  {}", r.function, r.skeleton.map_or("-", |s| s.name()));
            }
            Ok(())
        }
        Command::Lts { file, dot, function } => {
            let p = load(&file)?;
            let l = match &function {
                Some(f) => build_function_lts(&p, f)?,
                None => build_lts(&p)?,
            };
            match dot {
                Some(path) => fs::write(path, to_dot(&l))?,
                None => println!(
                    "states: {}\ntransitions: {}\nback edges: {}\nprogram size: {}",
                    l.len(),
                    l.transitions(),
                    l.back_edges.len(),
                    p.size()
                ),
            }
            Ok(())
        }
        Command::Extract { file, all, no_templates, output } => {
            let p = load(&file)?;
            let out = if no_templates {
                extract_program(&build_lts(&p)?, &[])?
            } else if all {
                let prepared = skelc::lts::sink_lets(&lambda_lift(&p));
                extract_program(&build_lts(&prepared)?, builtin_templates())?
            } else {
                skeletonize(&p, builtin_templates())?.0
            };
            emit(&program_to_string(&out), output.as_deref())
        }
        Command::Run { file, mode, workers, chunking, direction, args, stats } => {
            let p = load(&file)?;
            let mut cfg = ExecConfig { fuel, ..ExecConfig::default() };
            cfg.mode = mode.parse::<Mode>()?;
            cfg.chunking = chunking.parse::<Chunking>()?;
            cfg.direction = parse_direction(&direction)?;
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let values = parse_args(&p, &args, fuel)?;
            let out = run(&p, &cfg, &values)?;
            println!("{}", out.value);
            if stats {
                println!("{}", out.stats.to_json());
            }
            Ok(())
        }
        Command::CheckEquiv { first, second, trials, size } => {
            let a = load(&first)?;
            let b = load(&second)?;
            let mut probe = ChaCha8Rng::seed_from_u64(cli.seed);
            if type_directed_args(&a, &mut probe, size).is_none() {
                return Err(Error::invalid(format!("{first}: `main` needs a type signature to generate arguments")));
            }
            let gen = |rng: &mut ChaCha8Rng| type_directed_args(&a, rng, size).unwrap_or_default();
            let report = check_equivalence(&a, &b, gen, cli.seed, trials, fuel);
            println!("{} trials, {} mismatches", report.trials, report.counterexamples.len());
            if let Some(c) = report.counterexamples.first() {
                let args: Vec<String> = c.args.iter().map(ToString::to_string).collect();
                println!("counterexample: [{}]\n  {first}: {}\n  {second}: {}", args.join(", "), c.expected, c.actual);
                return Err(Error::invalid("programs differ"));
            }
            Ok(())
        }
        Command::Pipeline { file, trials, size } => {
            let (name, src) = load_source(&file)?;
            let cfg = PipelineConfig { trials, seed: cli.seed, size, fuel };
            let report = pipeline_source(&name, &src, &cfg)?;
            println!("{}", report.to_json());
            if report.succeeded() {
                Ok(())
            } else {
                Err(Error::invalid("pipeline reported failures"))
            }
        }
        Command::Bench { entries, sizes, workers, reps, chunking, timeout, json, csv } => {
            let ids: Vec<&str> = if entries.is_empty() {
                vec!["mmul-original", "mmul-distilled", "mmul-hand-parallel", "mmul-encoded-parallel"]
            } else {
                entries.iter().map(String::as_str).collect()
            };
            let bc = BenchConfig {
                sizes,
                workers,
                reps,
                chunking: chunking.parse()?,
                seed: cli.seed,
                fuel,
                timeout: Some(Duration::from_secs(timeout)),
            };
            let report = bench(&ids, &bc)?;
            if let Some(path) = json {
                fs::write(path, report.to_json())?;
            }
            emit(&report.to_csv(), csv.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
