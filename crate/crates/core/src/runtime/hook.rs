use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lang::machine::{Machine, Skeleton, SkeletonHook, Thunk, Val};
use crate::lang::{Program, Value};

use super::pool::{empty_reduce_error, farm, fold1, Tracker};
use super::{ExecConfig, SharedStats};

/// Runs intercepted skeleton calls on the worker pool. The list and the
/// element function are fully evaluated first so they can be handed to
/// other threads; the combining function stays in the calling machine.
pub(crate) struct PoolHook {
    prog: Arc<Program>,
    cfg: ExecConfig,
    stats: SharedStats,
    tracker: Tracker,
}

impl PoolHook {
    pub(crate) fn new(prog: Arc<Program>, cfg: ExecConfig, stats: SharedStats) -> PoolHook {
        PoolHook { prog, cfg, stats, tracker: Tracker::default() }
    }

    fn map_on_pool(&self, m: &mut Machine, xs: &Thunk, f: &Thunk) -> Result<Vec<Value>> {
        let list = m.deep(xs)?;
        let items: Vec<Value> = list
            .as_list()
            .ok_or_else(|| Error::runtime(format!("skeleton applied to a non-list {list}")))?
            .into_iter()
            .cloned()
            .collect();
        let f = m.deep(f)?;
        let mut stats = self.stats.lock().expect("stats lock");
        farm(&self.prog, &self.cfg, &items, &f, &self.tracker, &mut stats)
    }
}

fn combine(m: &mut Machine, g: &Val, a: Thunk, b: Thunk) -> Result<Thunk> {
    Ok(Machine::thunk(m.apply_val(g.clone(), vec![a, b])?))
}

impl SkeletonHook for PoolHook {
    fn intercept(&mut self, m: &mut Machine, skel: Skeleton, args: &[Thunk]) -> Result<Option<Val>> {
        match skel {
            Skeleton::Map => {
                let ys = self.map_on_pool(m, &args[0], &args[1])?;
                Ok(Some(m.load_val(&Value::list(ys))?))
            }
            Skeleton::MapReduce => {
                let ys = self.map_on_pool(m, &args[0], &args[3])?;
                let g = m.force(&args[1])?;
                let mut acc = args[2].clone();
                for y in ys.iter().rev() {
                    let y = m.load(y)?;
                    acc = combine(m, &g, y, acc)?;
                }
                Ok(Some(m.force(&acc)?))
            }
            Skeleton::MapReduce1 => {
                let ys = self.map_on_pool(m, &args[0], &args[2])?;
                if ys.is_empty() {
                    return Err(empty_reduce_error());
                }
                let g = m.force(&args[1])?;
                let ts = ys.iter().map(|y| m.load(y)).collect::<Result<Vec<_>>>()?;
                let t = fold1(&ts, self.cfg.direction, |a, b| combine(m, &g, a, b))?;
                Ok(Some(m.force(&t)?))
            }
        }
    }
}
