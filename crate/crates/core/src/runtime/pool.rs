use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::lang::eval::{with_big_stack, EVAL_STACK};
use crate::lang::machine::{Machine, Thunk};
use crate::lang::{Program, Value};

use super::{Chunking, ExecConfig, RunStats};

/// Fold direction for reductions without a unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `g x1 (g x2 (... xn))`
    Right,
    /// `g (... (g x1 x2) ...) xn`
    Left,
}

/// Live task count shared by every pool call of one run.
#[derive(Debug, Default)]
pub(crate) struct Tracker {
    active: AtomicUsize,
    peak: AtomicUsize,
}

impl Tracker {
    fn enter(&self) {
        let now = self.active.fetch_add(1, Ordering::SeqCst) + 1;
        self.peak.fetch_max(now, Ordering::SeqCst);
    }

    fn leave(&self) {
        self.active.fetch_sub(1, Ordering::SeqCst);
    }

    pub(crate) fn peak(&self) -> usize {
        self.peak.load(Ordering::SeqCst)
    }
}

/// Element indices handled by each worker; empty partitions are dropped.
pub(crate) fn partition(n: usize, workers: usize, chunking: Chunking) -> Vec<Vec<usize>> {
    let workers = workers.max(1);
    let parts: Vec<Vec<usize>> = match chunking {
        Chunking::RoundRobin => (0..workers).map(|k| (k..n).step_by(workers).collect()).collect(),
        Chunking::Block => {
            let size = n.div_ceil(workers).max(1);
            (0..workers).map(|k| (k * size..((k + 1) * size).min(n)).collect()).collect()
        }
    };
    parts.into_iter().filter(|p| !p.is_empty()).collect()
}

fn panic_message(e: Box<dyn std::any::Any + Send>) -> String {
    e.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| e.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into())
}

struct WorkerResult {
    worker: usize,
    busy_ms: f64,
    results: Vec<(usize, Value)>,
    error: Option<(usize, Error)>,
}

fn work(prog: &Program, cfg: &ExecConfig, f: &Value, xs: &[Value], indices: &[usize], worker: usize) -> WorkerResult {
    let start = Instant::now();
    let mut out = WorkerResult { worker, busy_ms: 0.0, results: Vec::with_capacity(indices.len()), error: None };
    let mut machine = match Machine::new(prog, cfg.fuel) {
        Ok(m) => m,
        Err(e) => {
            out.error = Some((indices[0], e));
            return out;
        }
    };
    let mut fv = None;
    for &i in indices {
        let r = catch_unwind(AssertUnwindSafe(|| -> Result<Value> {
            machine.set_fuel(machine.steps().saturating_add(cfg.fuel));
            let fv = match &fv {
                Some(v) => Clone::clone(v),
                None => fv.insert(machine.load_val(f)?).clone(),
            };
            let x = machine.load(&xs[i])?;
            let y = machine.apply_val(fv, vec![x])?;
            machine.deep_val(y)
        }));
        match r {
            Ok(Ok(v)) => out.results.push((i, v)),
            Ok(Err(e)) => {
                out.error = Some((i, e));
                break;
            }
            Err(p) => {
                out.error = Some((i, Error::runtime(format!("worker panicked: {}", panic_message(p)))));
                break;
            }
        }
    }
    out.busy_ms = start.elapsed().as_secs_f64() * 1e3;
    out
}

/// Applies `f` to every element on the pool and reassembles the results in
/// list order. `prog` must be lambda-lifted.
pub(crate) fn farm(
    prog: &Program,
    cfg: &ExecConfig,
    xs: &[Value],
    f: &Value,
    tracker: &Tracker,
    stats: &mut RunStats,
) -> Result<Vec<Value>> {
    cfg.validate()?;
    let parts = partition(xs.len(), cfg.workers, cfg.chunking);
    let finished: Vec<WorkerResult> = std::thread::scope(|s| {
        let handles: Vec<_> = parts
            .iter()
            .enumerate()
            .map(|(k, idx)| {
                std::thread::Builder::new()
                    .name(format!("skelc-worker-{k}"))
                    .stack_size(EVAL_STACK)
                    .spawn_scoped(s, move || {
                        tracker.enter();
                        let r = work(prog, cfg, f, xs, idx, k);
                        tracker.leave();
                        r
                    })
                    .expect("spawn worker")
            })
            .collect();
        handles
            .into_iter()
            .zip(&parts)
            .enumerate()
            .map(|(k, (h, idx))| {
                h.join().unwrap_or_else(|p| WorkerResult {
                    worker: k,
                    busy_ms: 0.0,
                    results: Vec::new(),
                    error: Some((idx[0], Error::runtime(format!("worker panicked: {}", panic_message(p))))),
                })
            })
            .collect()
    });

    stats.tasks += parts.len();
    stats.parallel_calls += 1;
    stats.peak_tasks = stats.peak_tasks.max(tracker.peak());
    if stats.per_worker_busy_ms.len() < cfg.workers {
        stats.per_worker_busy_ms.resize(cfg.workers, 0.0);
    }
    let mut slots: Vec<Option<Value>> = vec![None; xs.len()];
    let mut first_error: Option<(usize, Error)> = None;
    for w in finished {
        stats.per_worker_busy_ms[w.worker] += w.busy_ms;
        stats.element_evaluations += w.results.len() + usize::from(w.error.is_some());
        for (i, v) in w.results {
            slots[i] = Some(v);
        }
        if let Some((i, e)) = w.error {
            if first_error.as_ref().is_none_or(|(j, _)| i < *j) {
                first_error = Some((i, e));
            }
        }
    }
    if let Some((index, e)) = first_error {
        return Err(Error::Task { index, source: Box::new(e) });
    }
    Ok(slots.into_iter().map(|v| v.expect("every slot filled")).collect())
}

pub(crate) fn empty_reduce_error() -> Error {
    Error::runtime("mapReduce1 needs a non-empty list")
}

/// Folds already mapped elements with a binary function.
pub(crate) fn fold1<T: Clone>(items: &[T], direction: Direction, mut g: impl FnMut(T, T) -> Result<T>) -> Result<T> {
    let (first, rest) = items.split_first().ok_or_else(empty_reduce_error)?;
    match direction {
        Direction::Left => rest.iter().try_fold(first.clone(), |acc, x| g(acc, x.clone())),
        Direction::Right => {
            let (last, init) = items.split_last().expect("non-empty");
            init.iter().rev().try_fold(last.clone(), |acc, x| g(x.clone(), acc))
        }
    }
}

fn with_machine<T: Send>(prog: &Program, fuel: u64, body: impl FnOnce(&mut Machine) -> Result<T> + Send) -> Result<T> {
    with_big_stack(|| {
        let mut m = Machine::new(prog, fuel)?;
        body(&mut m)
    })
}

fn apply2(m: &mut Machine, g: &Value, a: Thunk, b: Thunk) -> Result<Thunk> {
    let gv = m.load_val(g)?;
    Ok(Machine::thunk(m.apply_val(gv, vec![a, b])?))
}

/// Parallel `map`: applies the closure `f` to each element of `xs` on
/// `cfg.workers` workers. `prog` supplies the definitions `f` may call.
pub fn par_farm(prog: &Program, cfg: &ExecConfig, xs: &[Value], f: &Value) -> Result<(Vec<Value>, RunStats)> {
    let prog = crate::lang::lambda_lift(prog);
    let mut stats = RunStats::for_workers(cfg.workers);
    let out = farm(&prog, cfg, xs, f, &Tracker::default(), &mut stats)?;
    Ok((out, stats))
}

/// Parallel `mapReduce1`: maps `f` on the pool, then folds the results with
/// `g` sequentially in the given direction.
pub fn par_map_reduce1(
    prog: &Program,
    cfg: &ExecConfig,
    xs: &[Value],
    g: &Value,
    f: &Value,
    direction: Direction,
) -> Result<(Value, RunStats)> {
    if xs.is_empty() {
        return Err(empty_reduce_error());
    }
    let prog = crate::lang::lambda_lift(prog);
    let mut stats = RunStats::for_workers(cfg.workers);
    let ys = farm(&prog, cfg, xs, f, &Tracker::default(), &mut stats)?;
    let v = with_machine(&prog, cfg.fuel, |m| {
        let ts = ys.iter().map(|y| m.load(y)).collect::<Result<Vec<_>>>()?;
        let t = fold1(&ts, direction, |a, b| apply2(m, g, a, b))?;
        m.deep(&t)
    })?;
    Ok((v, stats))
}

/// Parallel `mapReduce`: maps `f` on the pool, then right-folds the results
/// with `g` starting from `v`.
pub fn par_map_reduce(
    prog: &Program,
    cfg: &ExecConfig,
    xs: &[Value],
    g: &Value,
    v: &Value,
    f: &Value,
) -> Result<(Value, RunStats)> {
    let prog = crate::lang::lambda_lift(prog);
    let mut stats = RunStats::for_workers(cfg.workers);
    let ys = farm(&prog, cfg, xs, f, &Tracker::default(), &mut stats)?;
    let out = with_machine(&prog, cfg.fuel, |m| {
        let mut acc = m.load(v)?;
        for y in ys.iter().rev() {
            let y = m.load(y)?;
            acc = apply2(m, g, y, acc)?;
        }
        m.deep(&acc)
    })?;
    Ok((out, stats))
}
