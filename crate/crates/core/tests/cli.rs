use std::path::Path;
use std::process::{Command, Output};

fn skelc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skelc")).args(args).output().expect("spawn skelc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn identify_prints_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let encoded = dir.path().join("mmul.mfl");
    let o = skelc(&["encode", "mmul-distilled", "-o", encoded.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = skelc(&["identify", encoded.to_str().unwrap()]);
    assert!(o.status.success());
    let rows: Vec<Vec<String>> =
        stdout(&o).lines().map(|l| l.split_whitespace().map(str::to_string).collect()).collect();
    assert_eq!(rows, [["mMul'_1", "map"], ["mMul'_2", "-"], ["mMul'_3", "mapReduce"]]);
}

#[test]
fn run_in_parallel_with_stats() {
    let o = skelc(&[
        "run",
        "mmul-hand-parallel",
        "--mode",
        "par",
        "--workers",
        "2",
        "--args",
        "[[1, 2], [3, 4]]",
        "[[5, 6], [7, 8]]",
        "--stats",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("[[19, 22], [43, 50]]"));
    let stats: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(stats["parallel_calls"], 1);
    assert_eq!(stats["per_worker_busy_ms"].as_array().unwrap().len(), 2);
}

#[test]
fn extract_output_reparses_and_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let enc = dir.path().join("dotp-enc.mfl");
    let skel = dir.path().join("dotp-skel.mfl");
    assert!(skelc(&["encode", "dotp", "-o", enc.to_str().unwrap()]).status.success());
    assert!(skelc(&["extract", enc.to_str().unwrap(), "-o", skel.to_str().unwrap()]).status.success());
    let text = std::fs::read_to_string(&skel).unwrap();
    assert!(text.contains("mapReduce1"), "{text}");
    let o = skelc(&["check-equiv", "dotp", skel.to_str().unwrap(), "--trials", "20"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 mismatches"));
}

#[test]
fn lts_writes_dot() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("g.dot");
    let o = skelc(&["lts", "dotp", "--dot", dot.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("digraph lts {"));
}

#[test]
fn bench_csv_header() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv");
    let o = skelc(&[
        "bench",
        "--entries",
        "mmul-original,mmul-hand-parallel",
        "--sizes",
        "4",
        "--workers",
        "1,2",
        "--reps",
        "1",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("variant,size,workers,median_ms,speedup"));
    assert_eq!(text.lines().count(), 1 + 1 + 2);
}

#[test]
fn failures_exit_non_zero() {
    let o = skelc(&["validate", "mmul-original"]);
    assert!(!o.status.success());
    let o = skelc(&["parse", Path::new("/nonexistent/x.mfl").to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    let o = skelc(&["run", "dotp", "--mode", "fast"]);
    assert!(!o.status.success());
}
