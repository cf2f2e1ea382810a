//! Execution of skeletonized programs, either with the sequential prelude
//! definitions or with a worker pool for the outermost skeleton calls.

mod hook;
mod pool;

pub use pool::{par_farm, par_map_reduce, par_map_reduce1, Direction};

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lang::eval::{run_main, with_big_stack};
use crate::lang::machine::Machine;
use crate::lang::{lambda_lift, Program, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Sequential,
    Parallel,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "seq" | "sequential" => Ok(Mode::Sequential),
            "par" | "parallel" => Ok(Mode::Parallel),
            _ => Err(Error::invalid(format!("unknown mode `{s}` (expected seq or par)"))),
        }
    }
}

/// How a list is split between workers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chunking {
    /// Element `i` goes to worker `i mod workers`.
    RoundRobin,
    /// Each worker takes one contiguous run of elements.
    Block,
}

impl FromStr for Chunking {
    type Err = Error;

    fn from_str(s: &str) -> Result<Chunking> {
        match s {
            "rr" | "round-robin" => Ok(Chunking::RoundRobin),
            "block" | "blocks" => Ok(Chunking::Block),
            _ => Err(Error::invalid(format!("unknown chunking `{s}` (expected rr or block)"))),
        }
    }
}

impl fmt::Display for Chunking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Chunking::RoundRobin => "rr",
            Chunking::Block => "block",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExecConfig {
    pub mode: Mode,
    pub workers: usize,
    pub chunking: Chunking,
    /// Step budget for the main evaluation and for each element task.
    pub fuel: u64,
    /// Fold direction of parallel `mapReduce1`.
    pub direction: Direction,
}

pub fn logical_cores() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig {
            mode: Mode::Sequential,
            workers: logical_cores(),
            chunking: Chunking::RoundRobin,
            fuel: crate::lang::DEFAULT_FUEL,
            direction: Direction::Right,
        }
    }
}

impl ExecConfig {
    pub fn sequential() -> ExecConfig {
        ExecConfig::default()
    }

    pub fn parallel(workers: usize, chunking: Chunking) -> ExecConfig {
        ExecConfig { mode: Mode::Parallel, workers, chunking, ..ExecConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::invalid("worker count must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunStats {
    pub wall_ms: f64,
    pub per_worker_busy_ms: Vec<f64>,
    /// Worker tasks started by parallel skeleton calls.
    pub tasks: usize,
    /// Largest number of worker tasks alive at once.
    pub peak_tasks: usize,
    /// Skeleton calls run on the worker pool.
    pub parallel_calls: usize,
    /// Applications of element functions on workers.
    pub element_evaluations: usize,
}

impl RunStats {
    fn for_workers(n: usize) -> RunStats {
        RunStats { per_worker_busy_ms: vec![0.0; n], ..RunStats::default() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("stats serialize")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub value: Value,
    pub stats: RunStats,
}

pub(crate) type SharedStats = Arc<Mutex<RunStats>>;

/// Evaluates `main` on `args`. In parallel mode the first skeleton call on
/// any evaluation path runs on the pool; skeleton calls reached while it
/// runs are evaluated sequentially inside the tasks.
pub fn run(p: &Program, cfg: &ExecConfig, args: &[Value]) -> Result<RunOutcome> {
    cfg.validate()?;
    if args.len() != p.main_params.len() {
        return Err(Error::Arity { name: "main".into(), expected: p.main_params.len(), found: args.len() });
    }
    let lifted = Arc::new(lambda_lift(p));
    let stats: SharedStats = Arc::new(Mutex::new(RunStats::for_workers(match cfg.mode {
        Mode::Sequential => 1,
        Mode::Parallel => cfg.workers,
    })));
    let start = Instant::now();
    let value = with_big_stack(|| {
        let mut m = Machine::new(&lifted, cfg.fuel)?;
        if cfg.mode == Mode::Parallel {
            m.set_hook(Some(Box::new(hook::PoolHook::new(lifted.clone(), *cfg, stats.clone()))));
        }
        run_main(&mut m, &lifted, args).map(|o| o.value)
    })?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut stats = stats.lock().expect("stats lock").clone();
    stats.wall_ms = wall_ms;
    if cfg.mode == Mode::Sequential {
        stats.per_worker_busy_ms = vec![wall_ms];
    }
    Ok(RunOutcome { value, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::lang::{evaluate, parse_program, DEFAULT_FUEL};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parses_flags() {
        assert_eq!("par".parse::<Mode>().unwrap(), Mode::Parallel);
        assert_eq!("block".parse::<Chunking>().unwrap(), Chunking::Block);
        assert!("both".parse::<Chunking>().is_err());
        assert!(ExecConfig::parallel(0, Chunking::Block).validate().is_err());
    }

    #[test]
    fn parallel_runs_agree_on_the_corpus() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for e in corpus::corpus() {
            let p = e.program().unwrap();
            let args = corpus::random_args(e.inputs, &mut rng, 6);
            let expected = evaluate(&p, &args, DEFAULT_FUEL).unwrap();
            for workers in [1, 3] {
                for chunking in [Chunking::RoundRobin, Chunking::Block] {
                    let out = run(&p, &ExecConfig::parallel(workers, chunking), &args).unwrap();
                    assert_eq!(out.value, expected, "{} with {workers} workers", e.id);
                    assert!(out.stats.peak_tasks <= workers);
                }
            }
        }
    }

    #[test]
    fn top_level_map_uses_the_pool() {
        let p = corpus::entry("mmul-hand-parallel").unwrap().program().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let args = corpus::matrix_args(&mut rng, 5, 3, 4);
        let out = run(&p, &ExecConfig::parallel(2, Chunking::RoundRobin), &args).unwrap();
        assert_eq!(out.stats.parallel_calls, 1);
        assert_eq!(out.stats.tasks, 2);
        assert_eq!(out.stats.element_evaluations, 5);
        assert_eq!(out.stats.per_worker_busy_ms.len(), 2);
        let seq = run(&p, &ExecConfig::sequential(), &args).unwrap();
        assert_eq!(seq.stats.tasks, 0);
        assert_eq!(seq.value, out.value);
    }

    #[test]
    fn element_failures_name_the_index() {
        let src = "-- skelc: generated\ndata B ::= T | F;;\nmain xs = map xs (\\x. 10 * h x);; h T = 1;;";
        let p = parse_program(src).unwrap();
        let b = |c: &str| Value::Con(c.into(), vec![]);
        let xs = Value::list([b("T"), b("T"), b("F"), b("T")]);
        let err = run(&p, &ExecConfig::parallel(2, Chunking::Block), &[xs]).unwrap_err();
        assert!(matches!(err, Error::Task { index: 2, .. }), "{err}");
    }
}
