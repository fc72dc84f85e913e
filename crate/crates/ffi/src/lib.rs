//! C ABI over the dsqlt transpiler.
//!
//! Scripts are compiled into an opaque [`DsqltScript`] handle. Strings returned
//! through out-parameters are owned by the caller and released with
//! [`dsqlt_string_free`]. Every entry point returns a [`DsqltStatus`]; on a
//! non-zero status [`dsqlt_last_error`] describes the failure.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::{c_char, size_t};

use dsqlt::emitter::{render_batch, Dialect, Emitter};
use dsqlt::lexer::RawSource;
use dsqlt::runner::{run_script, ConnectionSpec, RunError};
use dsqlt::Compiled;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsqltStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// The script has ERROR diagnostics.
    ScriptError = 3,
    EmitFailed = 4,
    ConnectionFailed = 5,
    StatementFailed = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsqltDialect {
    Portable = 0,
    Oracle = 1,
}

impl From<DsqltDialect> for Dialect {
    fn from(d: DsqltDialect) -> Self {
        match d {
            DsqltDialect::Portable => Dialect::Portable,
            DsqltDialect::Oracle => Dialect::OracleStyle,
        }
    }
}

/// Compiled script plus its diagnostics.
pub struct DsqltScript {
    name: String,
    compiled: Compiled,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .map(CString::into_raw)
        .unwrap_or(ptr::null_mut())
}

fn guard(f: impl FnOnce() -> DsqltStatus) -> DsqltStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            DsqltStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, DsqltStatus> {
    if p.is_null() {
        set_error("null argument");
        return Err(DsqltStatus::NullArgument);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        DsqltStatus::InvalidUtf8
    })
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn dsqlt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dsqlt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Compiles `len` bytes of script text. `name` labels diagnostics.
///
/// A handle is stored in `*out` whenever the status is `Ok` or `ScriptError`,
/// so the diagnostics can be read either way.
///
/// # Safety
/// `name` must be a NUL-terminated string, `text` must point to `len`
/// readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dsqlt_compile(
    name: *const c_char,
    text: *const c_char,
    len: size_t,
    out: *mut *mut DsqltScript,
) -> DsqltStatus {
    guard(|| {
        if out.is_null() || (text.is_null() && len > 0) {
            set_error("null argument");
            return DsqltStatus::NullArgument;
        }
        *out = ptr::null_mut();
        let name = match read_str(name) {
            Ok(n) => n.to_string(),
            Err(s) => return s,
        };
        let bytes: &[u8] = if len == 0 {
            &[]
        } else {
            std::slice::from_raw_parts(text.cast::<u8>(), len)
        };
        let compiled = match RawSource::from_bytes(name.clone(), bytes) {
            Ok(src) => dsqlt::compile(&src),
            Err(e) => Compiled {
                script: None,
                diagnostics: vec![(&e).into()],
            },
        };
        let failed = compiled.has_errors();
        *out = Box::into_raw(Box::new(DsqltScript { name, compiled }));
        if failed {
            set_error("script has errors");
            DsqltStatus::ScriptError
        } else {
            DsqltStatus::Ok
        }
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `script` must come from [`dsqlt_compile`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dsqlt_script_free(script: *mut DsqltScript) {
    if !script.is_null() {
        drop(Box::from_raw(script));
    }
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dsqlt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Number of ERROR diagnostics.
///
/// # Safety
/// `script` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn dsqlt_script_error_count(script: *const DsqltScript) -> size_t {
    match script.as_ref() {
        Some(s) => s
            .compiled
            .diagnostics
            .iter()
            .filter(|d| d.is_error())
            .count(),
        None => 0,
    }
}

/// All diagnostics, one rendered line each.
///
/// # Safety
/// `script` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dsqlt_script_diagnostics(
    script: *const DsqltScript,
    out: *mut *mut c_char,
) -> DsqltStatus {
    guard(|| {
        let (Some(s), false) = (script.as_ref(), out.is_null()) else {
            set_error("null argument");
            return DsqltStatus::NullArgument;
        };
        let mut text = String::new();
        for d in &s.compiled.diagnostics {
            text.push_str(&d.render(&s.name));
            text.push('\n');
        }
        *out = to_c_string(text);
        DsqltStatus::Ok
    })
}

/// Generated SQL, one statement per line.
///
/// # Safety
/// `script` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dsqlt_emit(
    script: *const DsqltScript,
    dialect: DsqltDialect,
    terminator: bool,
    out: *mut *mut c_char,
) -> DsqltStatus {
    guard(|| {
        let (Some(s), false) = (script.as_ref(), out.is_null()) else {
            set_error("null argument");
            return DsqltStatus::NullArgument;
        };
        *out = ptr::null_mut();
        let Some(parsed) = &s.compiled.script else {
            set_error("script has errors");
            return DsqltStatus::ScriptError;
        };
        match Emitter::new(dialect.into()).emit_script(parsed) {
            Ok(stmts) => {
                *out = to_c_string(render_batch(&stmts, terminator, false));
                DsqltStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                DsqltStatus::EmitFailed
            }
        }
    })
}

/// Runs the script against `locator` (for example `sqlite::memory:`). The
/// per-statement report is stored in `*report` as JSON lines whenever the
/// session opened, even if a statement failed.
///
/// # Safety
/// `script` must be a live handle, `locator` NUL-terminated and `report`
/// writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn dsqlt_run(
    script: *const DsqltScript,
    locator: *const c_char,
    dialect: DsqltDialect,
    stop_on_error: bool,
    report: *mut *mut c_char,
) -> DsqltStatus {
    guard(|| {
        let Some(s) = script.as_ref() else {
            set_error("null argument");
            return DsqltStatus::NullArgument;
        };
        if !report.is_null() {
            *report = ptr::null_mut();
        }
        let locator = match read_str(locator) {
            Ok(l) => l,
            Err(st) => return st,
        };
        let Some(parsed) = &s.compiled.script else {
            set_error("script has errors");
            return DsqltStatus::ScriptError;
        };
        let spec = ConnectionSpec::new(locator, dialect.into())
            .with_option("stop_on_error", stop_on_error);
        let result = match run_script(parsed, &spec) {
            Ok(r) => r,
            Err(e) => {
                set_error(e.to_string());
                return match e {
                    RunError::ConnectionFailed { .. } => DsqltStatus::ConnectionFailed,
                    _ => DsqltStatus::EmitFailed,
                };
            }
        };
        if !report.is_null() {
            let mut buf = Vec::new();
            if result.write_jsonl(&mut buf).is_ok() {
                *report = to_c_string(String::from_utf8_lossy(&buf).into_owned());
            }
        }
        match result.first_failure() {
            Some(e) => {
                set_error(e.to_string());
                DsqltStatus::StatementFailed
            }
            None => DsqltStatus::Ok,
        }
    })
}
