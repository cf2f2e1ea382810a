//! C interface to skelc. Programs are opaque handles; every fallible call
//! returns a `SkelcStatus` and leaves a message for `skelc_last_error`.
//!
//! Strings returned through out-pointers are owned by the caller and must be
//! released with `skelc_string_free`. Handles are released with
//! `skelc_program_free`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::c_char;

use skelc::encode::encode_program;
use skelc::lang::{evaluate_expr, parse_expr_in, parse_program, program_to_string, Program, DEFAULT_FUEL};
use skelc::lts::{builtin_templates, identify, skeletonize};
use skelc::runtime::{logical_cores, run, Chunking, Direction, ExecConfig, Mode};
use skelc::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkelcStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidProgram = 4,
    NotEncodable = 5,
    Runtime = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkelcMode {
    Sequential = 0,
    Parallel = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkelcChunking {
    RoundRobin = 0,
    Block = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkelcDirection {
    Right = 0,
    Left = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct SkelcRunConfig {
    pub mode: SkelcMode,
    /// 0 means one worker per logical core.
    pub workers: u32,
    pub chunking: SkelcChunking,
    pub direction: SkelcDirection,
    /// 0 means the default budget.
    pub fuel: u64,
}

/// A parsed program.
pub struct SkelcProgram {
    program: Program,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> SkelcStatus {
    match e {
        Error::Parse { .. } => SkelcStatus::Parse,
        Error::NotEncodable { .. } => SkelcStatus::NotEncodable,
        Error::Runtime(_) | Error::FuelExhausted(_) | Error::Task { .. } => SkelcStatus::Runtime,
        _ => SkelcStatus::InvalidProgram,
    }
}

/// Runs `f`, turning errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), (SkelcStatus, String)>) -> SkelcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SkelcStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("internal error: {msg}"));
            SkelcStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (SkelcStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (SkelcStatus, String) {
    (SkelcStatus::NullArgument, format!("`{what}` is null"))
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (SkelcStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| (SkelcStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn program<'a>(p: *const SkelcProgram) -> Result<&'a Program, (SkelcStatus, String)> {
    p.as_ref().map(|h| &h.program).ok_or_else(|| null("program"))
}

fn give_string(out: *mut *mut c_char, s: String) -> Result<(), (SkelcStatus, String)> {
    let c = CString::new(s).map_err(|_| (SkelcStatus::Runtime, "output contains a NUL byte".to_string()))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

fn give_program(out: *mut *mut SkelcProgram, program: Program) {
    unsafe { *out = Box::into_raw(Box::new(SkelcProgram { program })) };
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next skelc call on the same thread.
#[no_mangle]
pub extern "C" fn skelc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn skelc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Defaults: sequential, one worker per core, round-robin, right fold.
#[no_mangle]
pub extern "C" fn skelc_run_config_default() -> SkelcRunConfig {
    SkelcRunConfig {
        mode: SkelcMode::Sequential,
        workers: 0,
        chunking: SkelcChunking::RoundRobin,
        direction: SkelcDirection::Right,
        fuel: 0,
    }
}

/// # Safety
/// `src` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn skelc_program_parse(src: *const c_char, out: *mut *mut SkelcProgram) -> SkelcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let src = read_str(src, "src")?;
        give_program(out, parse_program(src).map_err(lib_err)?);
        Ok(())
    })
}

/// # Safety
/// `p` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn skelc_program_free(p: *mut SkelcProgram) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn skelc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Pretty-prints a program.
///
/// # Safety
/// `p` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn skelc_program_to_string(p: *const SkelcProgram, out: *mut *mut c_char) -> SkelcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        give_string(out, program_to_string(program(p)?))
    })
}

/// Encodes the recursive functions of `p` into a new program.
///
/// # Safety
/// `p` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn skelc_program_encode(p: *const SkelcProgram, out: *mut *mut SkelcProgram) -> SkelcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let encoded = encode_program(program(p)?).map_err(lib_err)?;
        give_program(out, encoded.program);
        Ok(())
    })
}

/// Replaces functions that walk encoded lists with skeleton calls.
///
/// # Safety
/// `p` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn skelc_program_skeletonize(p: *const SkelcProgram, out: *mut *mut SkelcProgram) -> SkelcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let (skel, _) = skeletonize(program(p)?, builtin_templates()).map_err(lib_err)?;
        give_program(out, skel);
        Ok(())
    })
}

/// One line per function walking an encoded list: the name, a tab, and the
/// skeleton name or `-`.
///
/// # Safety
/// `p` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn skelc_program_identify(p: *const SkelcProgram, out: *mut *mut c_char) -> SkelcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let rows = identify(program(p)?, builtin_templates()).map_err(lib_err)?;
        let text: String =
            rows.iter().map(|r| format!("{}\t{}\n", r.function, r.skeleton.map_or("-", |s| s.name()))).collect();
        give_string(out, text)
    })
}

/// Evaluates `main` on `nargs` arguments, each an expression in the
/// program's syntax, and writes the printed result to `out`. `cfg` may be
/// NULL for the defaults.
///
/// # Safety
/// `p` must be a live handle, `args` must point to `nargs` NUL-terminated
/// strings (it may be NULL when `nargs` is 0), `cfg` must be NULL or valid
/// and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn skelc_program_run(
    p: *const SkelcProgram,
    cfg: *const SkelcRunConfig,
    args: *const *const c_char,
    nargs: usize,
    out: *mut *mut c_char,
) -> SkelcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let prog = program(p)?;
        let c = cfg.as_ref().copied().unwrap_or_else(|| skelc_run_config_default());
        let fuel = if c.fuel == 0 { DEFAULT_FUEL } else { c.fuel };
        let exec = ExecConfig {
            mode: match c.mode {
                SkelcMode::Sequential => Mode::Sequential,
                SkelcMode::Parallel => Mode::Parallel,
            },
            workers: if c.workers == 0 { logical_cores() } else { c.workers as usize },
            chunking: match c.chunking {
                SkelcChunking::RoundRobin => Chunking::RoundRobin,
                SkelcChunking::Block => Chunking::Block,
            },
            direction: match c.direction {
                SkelcDirection::Right => Direction::Right,
                SkelcDirection::Left => Direction::Left,
            },
            fuel,
        };
        if nargs > 0 && args.is_null() {
            return Err(null("args"));
        }
        let mut values = Vec::with_capacity(nargs);
        for i in 0..nargs {
            let src = read_str(*args.add(i), "args[i]")?;
            let e = parse_expr_in(prog, src).map_err(lib_err)?;
            values.push(evaluate_expr(prog, &e, fuel).map_err(lib_err)?);
        }
        let outcome = run(prog, &exec, &values).map_err(lib_err)?;
        give_string(out, outcome.value.to_string())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_statuses() {
        assert_eq!(status_of(&Error::FuelExhausted(3)), SkelcStatus::Runtime);
        assert_eq!(status_of(&Error::Parse { line: 1, col: 1, msg: String::new() }), SkelcStatus::Parse);
        assert_eq!(status_of(&Error::Unbound("x".into())), SkelcStatus::InvalidProgram);
    }

    #[test]
    fn panics_become_a_status() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, SkelcStatus::Panic);
        let msg = unsafe { CStr::from_ptr(skelc_last_error()) }.to_str().unwrap();
        assert!(msg.contains("boom"));
        assert_eq!(guard(|| Ok(())), SkelcStatus::Ok);
        assert!(skelc_last_error().is_null());
    }
}
