use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use libc::c_char;
use skelc_ffi::*;

const DOTP: &str = include_str!("../../core/corpus/dotp.mfl");

fn parse(src: &str) -> *mut SkelcProgram {
    let src = CString::new(src).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { skelc_program_parse(src.as_ptr(), &mut p) }, SkelcStatus::Ok);
    assert!(!p.is_null());
    p
}

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { skelc_string_free(s) };
    out
}

fn last_error() -> String {
    let e = skelc_last_error();
    assert!(!e.is_null());
    unsafe { CStr::from_ptr(e) }.to_str().unwrap().to_string()
}

fn run(p: *const SkelcProgram, cfg: Option<&SkelcRunConfig>, args: &[&str]) -> Result<String, (SkelcStatus, String)> {
    let owned: Vec<CString> = args.iter().map(|a| CString::new(*a).unwrap()).collect();
    let ptrs: Vec<*const c_char> = owned.iter().map(|a| a.as_ptr()).collect();
    let mut out = ptr::null_mut();
    let cfg = cfg.map_or(ptr::null(), |c| c as *const _);
    match unsafe { skelc_program_run(p, cfg, ptrs.as_ptr(), ptrs.len(), &mut out) } {
        SkelcStatus::Ok => Ok(take(out)),
        s => {
            assert!(out.is_null());
            Err((s, last_error()))
        }
    }
}

#[test]
fn parse_errors_carry_a_message() {
    let src = CString::new("main x = ;;").unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { skelc_program_parse(src.as_ptr(), &mut p) }, SkelcStatus::Parse);
    assert!(p.is_null());
    assert!(last_error().contains("parse error"));
}

#[test]
fn null_arguments_are_rejected() {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { skelc_program_parse(ptr::null(), &mut p) }, SkelcStatus::NullArgument);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { skelc_program_to_string(ptr::null(), &mut s) }, SkelcStatus::NullArgument);
    unsafe {
        skelc_program_free(ptr::null_mut());
        skelc_string_free(ptr::null_mut());
    }
}

#[test]
fn encode_identify_and_run_in_parallel() {
    let p = parse(DOTP);
    let mut enc = ptr::null_mut();
    assert_eq!(unsafe { skelc_program_encode(p, &mut enc) }, SkelcStatus::Ok);
    let mut table = ptr::null_mut();
    assert_eq!(unsafe { skelc_program_identify(enc, &mut table) }, SkelcStatus::Ok);
    assert_eq!(take(table), "dotP'\tmapReduce1\n");

    let mut skel = ptr::null_mut();
    assert_eq!(unsafe { skelc_program_skeletonize(enc, &mut skel) }, SkelcStatus::Ok);
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { skelc_program_to_string(skel, &mut text) }, SkelcStatus::Ok);
    assert!(take(text).contains("mapReduce1"));

    let tree = "B 2 (B 3 E E) E";
    let expected = run(p, None, &[tree, tree]).unwrap();
    assert_eq!(expected, "13");
    let mut cfg = skelc_run_config_default();
    cfg.mode = SkelcMode::Parallel;
    cfg.workers = 2;
    for chunking in [SkelcChunking::RoundRobin, SkelcChunking::Block] {
        cfg.chunking = chunking;
        assert_eq!(run(skel, Some(&cfg), &[tree, tree]).unwrap(), expected);
    }
    unsafe {
        skelc_program_free(skel);
        skelc_program_free(enc);
        skelc_program_free(p);
    }
}

#[test]
fn runtime_failures_are_reported() {
    let p = parse("main :: Int -> Int;; main x = loop x;; loop x = loop (x + 1);;");
    let mut cfg = skelc_run_config_default();
    cfg.fuel = 1000;
    let (status, msg) = run(p, Some(&cfg), &["1"]).unwrap_err();
    assert_eq!(status, SkelcStatus::Runtime);
    assert!(msg.contains("fuel"), "{msg}");
    let (status, _) = run(p, None, &[]).unwrap_err();
    assert_eq!(status, SkelcStatus::InvalidProgram);
    unsafe { skelc_program_free(p) };
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(skelc_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

const C_SMOKE: &str = r#"
#include <stdio.h>
#include <string.h>
#include "skelc.h"

int main(void) {
    SkelcProgram *p = NULL;
    if (skelc_program_parse("main :: Int -> Int;; main x = x * x + 1;;", &p) != SKELC_STATUS_OK) return 1;
    SkelcRunConfig cfg = skelc_run_config_default();
    const char *args[] = { "6" };
    char *out = NULL;
    if (skelc_program_run(p, &cfg, args, 1, &out) != SKELC_STATUS_OK) return 2;
    int ok = strcmp(out, "37") == 0;
    skelc_string_free(out);
    if (skelc_program_parse("main = ", &p) != SKELC_STATUS_PARSE || skelc_last_error() == NULL) ok = 0;
    skelc_program_free(p);
    return ok ? 0 : 3;
}
"#;

/// Compiles a C program against the generated header and the static
/// library. Skipped when no C compiler is on the path or the library has
/// not been built.
#[test]
fn header_compiles_and_links_from_c() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libskelc_ffi.a");
    // `cargo test` only builds the rlib; the archive comes from `cargo build`.
    let fresh = |p: &PathBuf| -> Option<bool> {
        let built = std::fs::metadata(p).ok()?.modified().ok()?;
        let src = std::fs::metadata(crate_dir.join("src/lib.rs")).ok()?.modified().ok()?;
        Some(built >= src)
    };
    if fresh(&lib) != Some(true) {
        eprintln!("{} missing or stale, run `cargo build -p skelc-ffi`; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("smoke.c");
    let exe = dir.path().join("smoke");
    std::fs::write(&c, C_SMOKE).unwrap();
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&c)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let status = Command::new(&exe).status().unwrap();
    assert!(status.success(), "C program exited with {status}");
}
