//! Timing of corpus programs and the programs the pipeline derives from
//! them, across input sizes and worker counts.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{self, CorpusEntry, InputKind, Role};
use crate::encode::encode_program;
use crate::error::{Error, Result};
use crate::lang::{Program, Value, DEFAULT_FUEL};
use crate::lts::{builtin_templates, skeletonize};
use crate::runtime::{logical_cores, run, Chunking, ExecConfig};

pub const CSV_HEADER: &str = "variant,size,workers,median_ms,speedup";

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub workers: Vec<usize>,
    pub reps: usize,
    pub chunking: Chunking,
    pub seed: u64,
    pub fuel: u64,
    /// A cell whose first repetition takes longer than this is recorded as
    /// timed out and not repeated.
    pub timeout: Option<Duration>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec![50, 100],
            workers: vec![1, 2, 4],
            reps: 5,
            chunking: Chunking::RoundRobin,
            seed: 1,
            fuel: DEFAULT_FUEL,
            timeout: Some(Duration::from_secs(60)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub variant: String,
    pub size: usize,
    pub workers: usize,
    pub median_ms: Option<f64>,
    /// Median of the sequential original at the same size divided by this
    /// row's median.
    pub speedup: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub logical_cores: usize,
    pub reps: usize,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        let num = |x: Option<f64>| x.map(|v| format!("{v:.3}")).unwrap_or_default();
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{},{}\n", r.variant, r.size, r.workers, num(r.median_ms), num(r.speedup)));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn median(xs: &mut [f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    Some(if n % 2 == 1 { xs[n / 2] } else { (xs[n / 2 - 1] + xs[n / 2]) / 2.0 })
}

/// A program to time and how to run it.
#[derive(Clone, Debug)]
pub struct Variant {
    pub name: String,
    pub program: Program,
    pub inputs: InputKind,
    pub parallel: bool,
    /// The sequential reference speedups are computed against.
    pub baseline: bool,
}

/// Variants for a corpus entry. Distilled entries also yield the program
/// the pipeline derives from them, run in parallel.
pub fn variants_for(e: &CorpusEntry) -> Result<Vec<Variant>> {
    let program = e.program()?;
    let parallel = matches!(e.role, Role::HandParallel | Role::EncodedParallel);
    let mut out = vec![Variant {
        name: e.id.to_string(),
        program: program.clone(),
        inputs: e.inputs,
        parallel,
        baseline: e.role == Role::Original || (e.inputs == InputKind::Trees && e.role == Role::Distilled),
    }];
    if e.role == Role::Distilled {
        let encoded = encode_program(&program)?;
        let (skel, _) = skeletonize(&encoded.program, builtin_templates())?;
        out.push(Variant {
            name: format!("{}-skeletonized", e.id),
            program: skel,
            inputs: e.inputs,
            parallel: true,
            baseline: false,
        });
    }
    Ok(out)
}

/// Times one run; returns milliseconds.
pub fn time_run(p: &Program, cfg: &ExecConfig, args: &[Value]) -> Result<f64> {
    let start = Instant::now();
    run(p, cfg, args)?;
    Ok(start.elapsed().as_secs_f64() * 1e3)
}

fn measure(v: &Variant, cfg: &ExecConfig, args: &[Value], bc: &BenchConfig) -> (Option<f64>, Option<String>) {
    let mut times = Vec::with_capacity(bc.reps);
    for _ in 0..bc.reps.max(1) {
        match time_run(&v.program, cfg, args) {
            Ok(ms) => {
                times.push(ms);
                if bc.timeout.is_some_and(|t| ms > t.as_secs_f64() * 1e3) {
                    return (None, Some(format!("timeout after {ms:.0} ms")));
                }
            }
            Err(e) => return (None, Some(e.to_string())),
        }
    }
    (median(&mut times), None)
}

/// Benchmarks the given corpus entries. Failures and timeouts of single
/// cells are recorded in the report.
pub fn bench(entry_ids: &[&str], bc: &BenchConfig) -> Result<BenchReport> {
    let mut variants = Vec::new();
    for id in entry_ids {
        let e = corpus::entry(id).ok_or_else(|| Error::invalid(format!("unknown corpus entry `{id}`")))?;
        variants.extend(variants_for(e)?);
    }
    // Baselines first so speedups can be filled in as rows are produced.
    variants.sort_by_key(|v| !v.baseline);
    let mut rows: Vec<BenchRow> = Vec::new();
    for &size in &bc.sizes {
        for v in &variants {
            let mut rng = ChaCha8Rng::seed_from_u64(bc.seed ^ size as u64);
            let args = corpus::sized_args(v.inputs, &mut rng, size, size);
            let worker_counts: Vec<usize> = if v.parallel { bc.workers.clone() } else { vec![1] };
            for &w in &worker_counts {
                let cfg = if v.parallel {
                    ExecConfig { fuel: bc.fuel, ..ExecConfig::parallel(w, bc.chunking) }
                } else {
                    ExecConfig { fuel: bc.fuel, ..ExecConfig::sequential() }
                };
                let (median_ms, error) = measure(v, &cfg, &args, bc);
                let base = variants
                    .iter()
                    .find(|b| b.baseline && b.inputs == v.inputs)
                    .and_then(|b| rows.iter().find(|r| r.variant == b.name && r.size == size))
                    .and_then(|r| r.median_ms)
                    .or(if v.baseline { median_ms } else { None });
                let speedup = match (base, median_ms) {
                    (Some(b), Some(m)) if m > 0.0 => Some(b / m),
                    _ => None,
                };
                rows.push(BenchRow { variant: v.name.clone(), size, workers: w, median_ms, speedup, error });
            }
        }
    }
    Ok(BenchReport { logical_cores: logical_cores(), reps: bc.reps, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }

    #[test]
    fn small_bench_has_a_stable_schema() {
        let bc = BenchConfig { sizes: vec![4], workers: vec![1, 2], reps: 2, ..BenchConfig::default() };
        let r = bench(&["mmul-original", "mmul-encoded-parallel", "mmul-distilled"], &bc).unwrap();
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        // original once, encoded-parallel and the skeletonized program per
        // worker count, distilled once.
        assert_eq!(lines.count(), 1 + 2 + 1 + 2);
        assert!(r.rows.iter().all(|row| row.error.is_none() && row.speedup.is_some()), "{:?}", r.rows);
        assert_eq!(r.rows[0].variant, "mmul-original");
        assert!((r.rows[0].speedup.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_entries_are_rejected() {
        assert!(bench(&["nope"], &BenchConfig::default()).is_err());
    }
}
