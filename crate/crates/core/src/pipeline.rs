//! The end-to-end transformation: parse, check distilled form, encode,
//! identify skeletons, extract the skeletonized program and test it
//! against the input on random arguments.

use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::encode::{check_equivalence, encode_program, type_directed_args, EquivReport};
use crate::error::Result;
use crate::lang::{parse_program, validate_distilled, Program, DEFAULT_FUEL};
use crate::lts::{builtin_templates, identify_all, skeletonize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Ok,
    Warning,
    Failed,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageReport {
    pub stage: &'static str,
    pub status: StageStatus,
    pub detail: String,
    pub ms: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentRow {
    pub function: String,
    pub skeleton: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivSummary {
    /// Which transformed program was compared with the input.
    pub against: &'static str,
    pub trials: usize,
    pub mismatches: usize,
    pub first_counterexample: Option<String>,
}

impl EquivSummary {
    fn new(against: &'static str, r: &EquivReport) -> EquivSummary {
        EquivSummary {
            against,
            trials: r.trials,
            mismatches: r.counterexamples.len(),
            first_counterexample: r.counterexamples.first().map(|c| {
                let args: Vec<String> = c.args.iter().map(ToString::to_string).collect();
                format!("args [{}]: expected {}, got {}", args.join(", "), c.expected, c.actual)
            }),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub trials: usize,
    pub seed: u64,
    /// Size bound for generated arguments.
    pub size: usize,
    pub fuel: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { trials: 50, seed: 1, size: 6, fuel: DEFAULT_FUEL }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    pub source: String,
    pub stages: Vec<StageReport>,
    /// False when the input is not in distilled form; encoding still runs.
    pub distilled: bool,
    pub encoded_types: Vec<String>,
    pub identification: Vec<IdentRow>,
    pub equivalence: Vec<EquivSummary>,
    pub total_ms: f64,
    #[serde(skip)]
    pub encoded: Option<Program>,
    #[serde(skip)]
    pub skeletonized: Option<Program>,
}

impl PipelineReport {
    /// True when no stage failed and every equivalence trial agreed.
    pub fn succeeded(&self) -> bool {
        self.stages.iter().all(|s| s.status != StageStatus::Failed)
            && self.equivalence.iter().all(|e| e.mismatches == 0)
    }

    pub fn stage(&self, name: &str) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.stage == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    fn record(&mut self, stage: &'static str, status: StageStatus, detail: impl Into<String>, since: Instant) {
        let ms = since.elapsed().as_secs_f64() * 1e3;
        self.stages.push(StageReport { stage, status, detail: detail.into(), ms });
    }
}

/// Runs every stage on a source text. Parse errors abort; failures of later
/// stages are recorded and skip the stages that depend on them.
pub fn pipeline_source(source_name: &str, src: &str, cfg: &PipelineConfig) -> Result<PipelineReport> {
    let start = Instant::now();
    let mut r = PipelineReport {
        source: source_name.to_string(),
        stages: Vec::new(),
        distilled: false,
        encoded_types: Vec::new(),
        identification: Vec::new(),
        equivalence: Vec::new(),
        total_ms: 0.0,
        encoded: None,
        skeletonized: None,
    };

    let t = Instant::now();
    let prog = parse_program(src)?;
    r.record("parse", StageStatus::Ok, format!("{} definitions", prog.defs.len()), t);

    let t = Instant::now();
    let check = validate_distilled(&prog);
    r.distilled = check.is_valid();
    if r.distilled {
        r.record("validate", StageStatus::Ok, "distilled form", t);
    } else {
        let msgs: Vec<String> = check.violations.iter().map(|v| v.to_string()).collect();
        r.record("validate", StageStatus::Warning, msgs.join("; "), t);
    }

    let t = Instant::now();
    let encoded = match encode_program(&prog) {
        Ok(e) => e,
        Err(e) => {
            r.record("encode", StageStatus::Failed, e.to_string(), t);
            for stage in ["identify", "extract", "equivalence"] {
                r.record(stage, StageStatus::Skipped, "encoding failed", Instant::now());
            }
            r.total_ms = start.elapsed().as_secs_f64() * 1e3;
            return Ok(r);
        }
    };
    r.encoded_types = encoded.functions.iter().map(|f| f.decl.to_string()).collect();
    let mut detail = format!("{} functions encoded", encoded.functions.len());
    for (f, why) in &encoded.skipped {
        detail.push_str(&format!("; skipped {f}: {why}"));
    }
    r.record("encode", StageStatus::Ok, detail, t);

    let t = Instant::now();
    match identify_all(&encoded.program, builtin_templates()) {
        Ok(rows) => {
            r.identification = encoded
                .functions
                .iter()
                .map(|f| IdentRow {
                    function: f.primed.clone(),
                    skeleton: rows
                        .iter()
                        .find(|row| row.function == f.primed)
                        .and_then(|row| row.skeleton)
                        .map(|s| s.name().to_string()),
                })
                .collect();
            r.record("identify", StageStatus::Ok, format!("{} functions checked", r.identification.len()), t);
        }
        Err(e) => r.record("identify", StageStatus::Failed, e.to_string(), t),
    }

    let t = Instant::now();
    let skeletonized = match skeletonize(&encoded.program, builtin_templates()) {
        Ok((p, rows)) => {
            r.record("extract", StageStatus::Ok, format!("{} skeleton calls", rows.len()), t);
            Some(p)
        }
        Err(e) => {
            r.record("extract", StageStatus::Failed, e.to_string(), t);
            None
        }
    };

    let t = Instant::now();
    let mut probe = ChaCha8Rng::seed_from_u64(cfg.seed);
    if type_directed_args(&prog, &mut probe, cfg.size).is_none() {
        r.record("equivalence", StageStatus::Skipped, "main has no usable type signature", t);
    } else {
        let size = cfg.size;
        let gen = |rng: &mut ChaCha8Rng| type_directed_args(&prog, rng, size).unwrap_or_default();
        let rep = check_equivalence(&prog, &encoded.program, gen, cfg.seed, cfg.trials, cfg.fuel);
        r.equivalence.push(EquivSummary::new("encoded", &rep));
        if let Some(s) = &skeletonized {
            let rep = check_equivalence(&prog, s, gen, cfg.seed, cfg.trials, cfg.fuel);
            r.equivalence.push(EquivSummary::new("skeletonized", &rep));
        }
        let bad: usize = r.equivalence.iter().map(|e| e.mismatches).sum();
        let status = if bad == 0 { StageStatus::Ok } else { StageStatus::Failed };
        r.record("equivalence", status, format!("{bad} mismatches"), t);
    }

    r.encoded = Some(encoded.program);
    r.skeletonized = skeletonized;
    r.total_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(r)
}

/// Runs the pipeline on a file.
pub fn pipeline(path: &Path, cfg: &PipelineConfig) -> Result<PipelineReport> {
    let src = std::fs::read_to_string(path)?;
    pipeline_source(&path.display().to_string(), &src, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn run(id: &str) -> PipelineReport {
        let e = corpus::entry(id).unwrap();
        pipeline_source(e.file, e.source, &PipelineConfig { trials: 10, ..PipelineConfig::default() }).unwrap()
    }

    fn table(r: &PipelineReport) -> Vec<(&str, Option<&str>)> {
        r.identification.iter().map(|row| (row.function.as_str(), row.skeleton.as_deref())).collect()
    }

    #[test]
    fn matrix_program() {
        let r = run("mmul-distilled");
        assert!(r.succeeded(), "{}", r.to_json());
        assert!(r.distilled);
        assert_eq!(table(&r), [("mMul'_1", Some("map")), ("mMul'_2", None), ("mMul'_3", Some("mapReduce"))]);
        assert_eq!(r.encoded_types.len(), 3);
        assert_eq!(r.equivalence.len(), 2);
    }

    #[test]
    fn tree_program() {
        let r = run("dotp");
        assert!(r.succeeded(), "{}", r.to_json());
        assert_eq!(table(&r), [("dotP'", Some("mapReduce1"))]);
    }

    #[test]
    fn non_recursive_program_has_an_empty_table() {
        let r = pipeline_source("t", "main :: Int -> Int;; main x = x + 1;;", &PipelineConfig::default()).unwrap();
        assert!(r.succeeded());
        assert!(r.identification.is_empty());
    }

    #[test]
    fn non_distilled_input_is_flagged_but_encoded() {
        let r = run("mmul-original");
        assert!(!r.distilled);
        assert_eq!(r.stage("validate").unwrap().status, StageStatus::Warning);
        assert_eq!(r.stage("encode").unwrap().status, StageStatus::Ok);
        assert!(r.to_json().contains("\"validate\""));
    }
}
