//! C ABI for modgen.
//!
//! Programs, configurations and results are opaque heap handles owned by the
//! caller and released with the matching `_free` function. Every fallible
//! call returns a [`ModgenStatus`]; on failure [`modgen_last_error`] describes
//! the problem. Strings returned through out-parameters are owned by the
//! caller and must be released with [`modgen_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use modgen_core::lang::{compile, enumerate_branch_goals, CheckedProgram};
use modgen_core::search::{evolve, SearchConfig, SearchResult};
use modgen_core::testmodel::{resolve_target, ClusterMode};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModgenStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    UnknownTarget = 4,
    InvalidConfig = 5,
    OutOfRange = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModgenMode {
    Strict = 0,
    Emote = 1,
    Whole = 2,
}

impl From<ModgenMode> for ClusterMode {
    fn from(m: ModgenMode) -> Self {
        match m {
            ModgenMode::Strict => ClusterMode::Strict,
            ModgenMode::Emote => ClusterMode::Emote,
            ModgenMode::Whole => ClusterMode::Whole,
        }
    }
}

/// A type-checked MiniOO program.
pub struct ModgenProgram {
    program: CheckedProgram,
}

/// Search settings.
pub struct ModgenConfig {
    config: SearchConfig,
}

/// Outcome of one search.
pub struct ModgenResult {
    result: SearchResult,
    tests: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let message = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(message).unwrap()));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

type Fallible<T> = Result<T, ModgenStatus>;

fn fail<T>(status: ModgenStatus, message: impl Into<String>) -> Fallible<T> {
    set_error(message);
    Err(status)
}

/// Runs `f`, mapping panics to `Internal` and errors to their status.
fn guard(f: impl FnOnce() -> Fallible<()>) -> ModgenStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ModgenStatus::Ok,
        Ok(Err(status)) => status,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            ModgenStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Fallible<&'a str> {
    if p.is_null() {
        return fail(ModgenStatus::NullArgument, format!("{name} is null"));
    }
    match CStr::from_ptr(p).to_str() {
        Ok(s) => Ok(s),
        Err(_) => fail(ModgenStatus::InvalidUtf8, format!("{name} is not valid UTF-8")),
    }
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Fallible<&'a T> {
    match p.as_ref() {
        Some(r) => Ok(r),
        None => fail(ModgenStatus::NullArgument, format!("{name} is null")),
    }
}

unsafe fn out_arg<T>(p: *mut T, name: &str) -> Fallible<()> {
    if p.is_null() {
        fail(ModgenStatus::NullArgument, format!("{name} is null"))
    } else {
        Ok(())
    }
}

fn owned_string(s: &str) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap().into_raw()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn modgen_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn modgen_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn modgen_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and type-checks `source`.
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn modgen_program_parse(
    source: *const c_char,
    out: *mut *mut ModgenProgram,
) -> ModgenStatus {
    guard(|| {
        out_arg(out, "out")?;
        *out = ptr::null_mut();
        let source = str_arg(source, "source")?;
        match compile(source) {
            Ok(program) => {
                *out = Box::into_raw(Box::new(ModgenProgram { program }));
                Ok(())
            }
            Err(diags) => {
                let rendered: Vec<String> = diags.iter().map(|d| d.render("<source>")).collect();
                fail(ModgenStatus::ParseError, rendered.join("\n"))
            }
        }
    })
}

/// # Safety
/// `program` must be null or a handle from [`modgen_program_parse`].
#[no_mangle]
pub unsafe extern "C" fn modgen_program_free(program: *mut ModgenProgram) {
    if !program.is_null() {
        drop(Box::from_raw(program));
    }
}

/// Number of branch goals of `class.method`.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn modgen_program_branch_count(
    program: *const ModgenProgram,
    class: *const c_char,
    method: *const c_char,
    out: *mut usize,
) -> ModgenStatus {
    guard(|| {
        out_arg(out, "out")?;
        let p = &ref_arg(program, "program")?.program;
        let target = match resolve_target(p, str_arg(class, "class")?, str_arg(method, "method")?) {
            Ok(t) => t,
            Err(e) => return fail(ModgenStatus::UnknownTarget, e.to_string()),
        };
        *out = enumerate_branch_goals(p, target).len();
        Ok(())
    })
}

/// Default settings for `mode`: population 50, 10 s budget.
#[no_mangle]
pub extern "C" fn modgen_config_new(mode: ModgenMode, seed: u64) -> *mut ModgenConfig {
    Box::into_raw(Box::new(ModgenConfig {
        config: SearchConfig::new(mode.into(), seed),
    }))
}

/// # Safety
/// `config` must be null or a handle from [`modgen_config_new`].
#[no_mangle]
pub unsafe extern "C" fn modgen_config_free(config: *mut ModgenConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

unsafe fn with_config(config: *mut ModgenConfig, f: impl FnOnce(&mut SearchConfig)) -> ModgenStatus {
    guard(|| {
        let c = match config.as_mut() {
            Some(c) => c,
            None => return fail(ModgenStatus::NullArgument, "config is null"),
        };
        let mut updated = c.config.clone();
        f(&mut updated);
        if let Err(e) = updated.validate() {
            return fail(ModgenStatus::InvalidConfig, e);
        }
        c.config = updated;
        Ok(())
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn modgen_config_set_budget(config: *mut ModgenConfig, seconds: f64) -> ModgenStatus {
    with_config(config, |c| c.budget_seconds = seconds)
}

/// Caps the number of generations; 0 removes the cap.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn modgen_config_set_max_generations(
    config: *mut ModgenConfig,
    generations: u64,
) -> ModgenStatus {
    with_config(config, |c| c.max_generations = (generations > 0).then_some(generations))
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn modgen_config_set_population(config: *mut ModgenConfig, size: usize) -> ModgenStatus {
    with_config(config, |c| c.population_size = size)
}

/// Attributed fitness. Only honoured in WHOLE mode.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn modgen_config_set_attributed(config: *mut ModgenConfig, on: bool) -> ModgenStatus {
    with_config(config, |c| c.attributed_fitness = on)
}

/// Runs a search on `class.method`.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn modgen_evolve(
    program: *const ModgenProgram,
    class: *const c_char,
    method: *const c_char,
    config: *const ModgenConfig,
    out: *mut *mut ModgenResult,
) -> ModgenStatus {
    guard(|| {
        out_arg(out, "out")?;
        *out = ptr::null_mut();
        let p = &ref_arg(program, "program")?.program;
        let config = &ref_arg(config, "config")?.config;
        let target = match resolve_target(p, str_arg(class, "class")?, str_arg(method, "method")?) {
            Ok(t) => t,
            Err(e) => return fail(ModgenStatus::UnknownTarget, e.to_string()),
        };
        if let Err(e) = config.validate() {
            return fail(ModgenStatus::InvalidConfig, e);
        }
        let result = evolve(p, target, config);
        let mut tests = String::new();
        for (i, t) in result.suite().iter().enumerate() {
            tests.push_str(&format!("// test {i}\n{}\n", t.render(p)));
        }
        let tests = CString::new(tests.replace('\0', " ")).unwrap();
        *out = Box::into_raw(Box::new(ModgenResult { result, tests }));
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a handle from [`modgen_evolve`].
#[no_mangle]
pub unsafe extern "C" fn modgen_result_free(result: *mut ModgenResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Number of branch goals of the target; 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn modgen_result_goal_count(result: *const ModgenResult) -> usize {
    result.as_ref().map_or(0, |r| r.result.ledger.goals.len())
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn modgen_result_covered_count(result: *const ModgenResult) -> usize {
    result.as_ref().map_or(0, |r| r.result.ledger.covered_count())
}

/// Branch coverage in percent; 100 when the target has no branches.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn modgen_result_coverage_pct(result: *const ModgenResult) -> f64 {
    result.as_ref().map_or(0.0, |r| {
        modgen_core::search::coverage_pct(r.result.ledger.covered_count(), r.result.ledger.goals.len())
    })
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn modgen_result_evaluations(result: *const ModgenResult) -> u64 {
    result.as_ref().map_or(0, |r| r.result.evaluations)
}

/// Name of goal `index` (e.g. `Album.getPrice/1#0:TRUE`) and whether it was
/// covered. The name is owned by the caller.
///
/// # Safety
/// `result` must be a live handle; `name` and `covered` writable.
#[no_mangle]
pub unsafe extern "C" fn modgen_result_goal(
    result: *const ModgenResult,
    index: usize,
    name: *mut *mut c_char,
    covered: *mut bool,
) -> ModgenStatus {
    guard(|| {
        out_arg(name, "name")?;
        out_arg(covered, "covered")?;
        let ledger = &ref_arg(result, "result")?.result.ledger;
        if index >= ledger.goals.len() {
            return fail(
                ModgenStatus::OutOfRange,
                format!("goal index {index} out of range (0..{})", ledger.goals.len()),
            );
        }
        *name = owned_string(&ledger.goal_names[index]);
        *covered = ledger.covered_by[index].is_some();
        Ok(())
    })
}

/// The archived tests as pseudocode; borrowed, valid while `result` lives.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn modgen_result_tests(result: *const ModgenResult) -> *const c_char {
    result.as_ref().map_or(ptr::null(), |r| r.tests.as_ptr())
}

/// Diagnostic when the search could not start, or null.
/// The string is owned by the caller.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn modgen_result_diagnostic(result: *const ModgenResult) -> *mut c_char {
    match result.as_ref().and_then(|r| r.result.diagnostic.as_deref()) {
        Some(d) => owned_string(d),
        None => ptr::null_mut(),
    }
}
