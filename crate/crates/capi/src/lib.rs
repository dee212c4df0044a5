//! C ABI for the disperse simulator.
//!
//! Handles are opaque; every fallible call returns a [`DisperseStatus`] and
//! leaves a message retrievable with [`disperse_last_error_message`] on
//! failure. Pointers returned by accessors stay valid until the owning
//! handle is freed. All functions are thread-safe as long as a handle is not
//! used from two threads at once.
//!
//! The matching header `include/disperse.h` is generated by cbindgen at
//! build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use disperse::analysis::{classify_outcome, Outcome, OutcomeConfig};
use disperse::commands::verify_scenario;
use disperse::dynamics::{run, solve_single_steady, Species, State, TimeSeries};
use disperse::scenario::{resolve, ResolvedScenario, ScenarioDoc};
use disperse::spectra::{invasion_problem, principal_eigen};

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_last_error(msg: impl std::fmt::Display) {
    let text = CString::new(msg.to_string()).unwrap_or_else(|_| CString::new("error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = text);
}

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisperseStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    RunFailed = 4,
    BufferTooSmall = 5,
    IndexOutOfRange = 6,
}

/// Competition outcome of a finished run.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisperseOutcome {
    Undetermined = 0,
    Coexistence = 1,
    ExclusionUWins = 2,
    ExclusionVWins = 3,
    Extinction = 4,
}

/// Which linearized invasion problem to solve.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisperseLinearization {
    /// Growth of species u at the trivial state.
    ZeroU = 0,
    /// Growth of species v at the trivial state.
    ZeroV = 1,
    /// Species v invading the semi-trivial state (u*, 0).
    InvaderVAtUStar = 2,
    /// Species u invading the semi-trivial state (0, v*).
    InvaderUAtVStar = 3,
}

/// Time-series column selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisperseSeriesColumn {
    Time = 0,
    MassU = 1,
    MassV = 2,
    SupU = 3,
    SupV = 4,
    RateU = 5,
    RateV = 6,
}

/// Opaque scenario handle.
pub struct DisperseScenario {
    doc: ScenarioDoc,
    resolved: ResolvedScenario,
}

/// Opaque run-result handle.
pub struct DisperseRun {
    series: TimeSeries,
    state: State,
    steady: bool,
    outcome: Outcome,
}

/// Opaque verification-report handle.
pub struct DisperseVerify {
    names: Vec<CString>,
    rows: Vec<(f64, f64, f64, bool)>,
    passed: bool,
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn disperse_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message describing the most recent error on this thread.
#[no_mangle]
pub extern "C" fn disperse_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Result<&'a str, DisperseStatus> {
    if ptr.is_null() {
        set_last_error("null string argument");
        return Err(DisperseStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_last_error("string argument is not valid UTF-8");
        DisperseStatus::InvalidUtf8
    })
}

fn new_scenario(doc: ScenarioDoc, out: *mut *mut DisperseScenario) -> DisperseStatus {
    match resolve(&doc) {
        Ok(resolved) => {
            let handle = Box::new(DisperseScenario { doc, resolved });
            unsafe { *out = Box::into_raw(handle) };
            DisperseStatus::Ok
        }
        Err(e) => {
            set_last_error(e);
            DisperseStatus::ParseError
        }
    }
}

/// Parse a scenario from text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn disperse_scenario_from_string(
    text: *const c_char,
    out: *mut *mut DisperseScenario,
) -> DisperseStatus {
    if out.is_null() {
        set_last_error("null output pointer");
        return DisperseStatus::NullArgument;
    }
    let text = match cstr_arg(text) {
        Ok(t) => t,
        Err(s) => return s,
    };
    match ScenarioDoc::parse(text) {
        Ok(doc) => new_scenario(doc, out),
        Err(e) => {
            set_last_error(e);
            DisperseStatus::ParseError
        }
    }
}

/// Load and parse a scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn disperse_scenario_from_file(
    path: *const c_char,
    out: *mut *mut DisperseScenario,
) -> DisperseStatus {
    if out.is_null() {
        set_last_error("null output pointer");
        return DisperseStatus::NullArgument;
    }
    let path = match cstr_arg(path) {
        Ok(t) => t,
        Err(s) => return s,
    };
    let text = match std::fs::read_to_string(Path::new(path)) {
        Ok(t) => t,
        Err(e) => {
            set_last_error(e);
            return DisperseStatus::ParseError;
        }
    };
    match ScenarioDoc::parse(&text) {
        Ok(doc) => new_scenario(doc, out),
        Err(e) => {
            set_last_error(e);
            DisperseStatus::ParseError
        }
    }
}

/// Free a scenario handle (accepts NULL).
///
/// # Safety
/// `handle` must come from a `disperse_scenario_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn disperse_scenario_free(handle: *mut DisperseScenario) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

unsafe fn scenario_ref<'a>(
    handle: *const DisperseScenario,
) -> Result<&'a DisperseScenario, DisperseStatus> {
    if handle.is_null() {
        set_last_error("null scenario handle");
        return Err(DisperseStatus::NullArgument);
    }
    Ok(&*handle)
}

/// Number of grid cells of the resolved scenario.
///
/// # Safety
/// `handle` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn disperse_scenario_n_cells(handle: *const DisperseScenario) -> usize {
    match scenario_ref(handle) {
        Ok(h) => h.resolved.scenario.grid.n_cells(),
        Err(_) => 0,
    }
}

unsafe fn scenario_override(
    handle: *mut DisperseScenario,
    section: &str,
    key: &str,
    value: String,
) -> DisperseStatus {
    if handle.is_null() {
        set_last_error("null scenario handle");
        return DisperseStatus::NullArgument;
    }
    let h = &mut *handle;
    let mut doc = h.doc.clone();
    doc.set(section, key, value);
    match resolve(&doc) {
        Ok(resolved) => {
            h.doc = doc;
            h.resolved = resolved;
            DisperseStatus::Ok
        }
        Err(e) => {
            set_last_error(e);
            DisperseStatus::ParseError
        }
    }
}

/// Override the `[run] seed` key.
///
/// # Safety
/// `handle` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn disperse_scenario_set_seed(
    handle: *mut DisperseScenario,
    seed: u64,
) -> DisperseStatus {
    scenario_override(handle, "run", "seed", seed.to_string())
}

/// Override the `[grid] n_cells` key.
///
/// # Safety
/// `handle` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn disperse_scenario_set_n_cells(
    handle: *mut DisperseScenario,
    n_cells: usize,
) -> DisperseStatus {
    scenario_override(handle, "grid", "n_cells", n_cells.to_string())
}

/// Override the `[stepper] dt` key.
///
/// # Safety
/// `handle` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn disperse_scenario_set_dt(
    handle: *mut DisperseScenario,
    dt: f64,
) -> DisperseStatus {
    scenario_override(handle, "stepper", "dt", format!("{dt}"))
}

/// Integrate the scenario and classify the outcome.
///
/// # Safety
/// `handle` must be a live scenario handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn disperse_simulate(
    handle: *const DisperseScenario,
    out: *mut *mut DisperseRun,
) -> DisperseStatus {
    if out.is_null() {
        set_last_error("null output pointer");
        return DisperseStatus::NullArgument;
    }
    let h = match scenario_ref(handle) {
        Ok(h) => h,
        Err(s) => return s,
    };
    let scenario = &h.resolved.scenario;
    match run(scenario) {
        Ok((series, state, steady)) => {
            let outcome =
                classify_outcome(scenario, &state, &series, steady, &OutcomeConfig::default());
            let boxed = Box::new(DisperseRun {
                series,
                state,
                steady,
                outcome,
            });
            *out = Box::into_raw(boxed);
            DisperseStatus::Ok
        }
        Err(e) => {
            set_last_error(e);
            DisperseStatus::RunFailed
        }
    }
}

/// Free a run handle (accepts NULL).
///
/// # Safety
/// `handle` must come from `disperse_simulate`.
#[no_mangle]
pub unsafe extern "C" fn disperse_run_free(handle: *mut DisperseRun) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

unsafe fn run_ref<'a>(handle: *const DisperseRun) -> Result<&'a DisperseRun, DisperseStatus> {
    if handle.is_null() {
        set_last_error("null run handle");
        return Err(DisperseStatus::NullArgument);
    }
    Ok(&*handle)
}

/// Outcome of a finished run; coexistence coefficients are written to
/// `alpha`/`beta` when non-null.
///
/// # Safety
/// `handle` must be a live run handle; `outcome`, `alpha`, `beta` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn disperse_run_outcome(
    handle: *const DisperseRun,
    outcome: *mut DisperseOutcome,
    alpha: *mut f64,
    beta: *mut f64,
) -> DisperseStatus {
    let h = match run_ref(handle) {
        Ok(h) => h,
        Err(s) => return s,
    };
    let (code, a, b) = match h.outcome {
        Outcome::Undetermined => (DisperseOutcome::Undetermined, 0.0, 0.0),
        Outcome::Coexistence { alpha, beta } => (DisperseOutcome::Coexistence, alpha, beta),
        Outcome::ExclusionUWins => (DisperseOutcome::ExclusionUWins, 0.0, 0.0),
        Outcome::ExclusionVWins => (DisperseOutcome::ExclusionVWins, 0.0, 0.0),
        Outcome::Extinction => (DisperseOutcome::Extinction, 0.0, 0.0),
    };
    if !outcome.is_null() {
        *outcome = code;
    }
    if !alpha.is_null() {
        *alpha = a;
    }
    if !beta.is_null() {
        *beta = b;
    }
    DisperseStatus::Ok
}

/// 1 if the steady-state criterion stopped the run, else 0.
///
/// # Safety
/// `handle` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn disperse_run_steady(handle: *const DisperseRun) -> i32 {
    match run_ref(handle) {
        Ok(h) => h.steady as i32,
        Err(_) => 0,
    }
}

/// Final integration time.
///
/// # Safety
/// `handle` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn disperse_run_final_time(handle: *const DisperseRun) -> f64 {
    match run_ref(handle) {
        Ok(h) => h.state.t,
        Err(_) => f64::NAN,
    }
}

/// Number of grid cells in the final profiles.
///
/// # Safety
/// `handle` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn disperse_run_n_cells(handle: *const DisperseRun) -> usize {
    match run_ref(handle) {
        Ok(h) => h.state.u.len(),
        Err(_) => 0,
    }
}

/// Copy the final profiles into caller buffers of length `len` (== n_cells).
/// Any of `x`, `u`, `v` may be NULL to skip that column.
///
/// # Safety
/// Non-null buffers must hold at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn disperse_run_final_profiles(
    handle: *const DisperseRun,
    x: *mut f64,
    u: *mut f64,
    v: *mut f64,
    len: usize,
) -> DisperseStatus {
    let h = match run_ref(handle) {
        Ok(h) => h,
        Err(s) => return s,
    };
    let n = h.state.u.len();
    if len < n {
        set_last_error(format!("buffer of {len} doubles, need {n}"));
        return DisperseStatus::BufferTooSmall;
    }
    if !x.is_null() {
        for (i, xc) in h.state.u.grid().centers().enumerate() {
            *x.add(i) = xc;
        }
    }
    if !u.is_null() {
        ptr::copy_nonoverlapping(h.state.u.values().as_ptr(), u, n);
    }
    if !v.is_null() {
        ptr::copy_nonoverlapping(h.state.v.values().as_ptr(), v, n);
    }
    DisperseStatus::Ok
}

/// Number of recorded time-series samples.
///
/// # Safety
/// `handle` must be a live run handle.
#[no_mangle]
pub unsafe extern "C" fn disperse_run_sample_count(handle: *const DisperseRun) -> usize {
    match run_ref(handle) {
        Ok(h) => h.series.samples.len(),
        Err(_) => 0,
    }
}

/// Copy one time-series column into a caller buffer of length `len`.
///
/// # Safety
/// `out` must hold at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn disperse_run_series(
    handle: *const DisperseRun,
    column: DisperseSeriesColumn,
    out: *mut f64,
    len: usize,
) -> DisperseStatus {
    let h = match run_ref(handle) {
        Ok(h) => h,
        Err(s) => return s,
    };
    if out.is_null() {
        set_last_error("null output buffer");
        return DisperseStatus::NullArgument;
    }
    let n = h.series.samples.len();
    if len < n {
        set_last_error(format!("buffer of {len} doubles, need {n}"));
        return DisperseStatus::BufferTooSmall;
    }
    for (i, s) in h.series.samples.iter().enumerate() {
        let v = match column {
            DisperseSeriesColumn::Time => s.t,
            DisperseSeriesColumn::MassU => s.mass_u,
            DisperseSeriesColumn::MassV => s.mass_v,
            DisperseSeriesColumn::SupU => s.sup_u,
            DisperseSeriesColumn::SupV => s.sup_v,
            DisperseSeriesColumn::RateU => s.rate_u,
            DisperseSeriesColumn::RateV => s.rate_v,
        };
        *out.add(i) = v;
    }
    DisperseStatus::Ok
}

/// Principal eigenvalue of one invasion linearization. Solves the needed
/// single-species stationary problem first.
///
/// # Safety
/// `handle` must be a live scenario handle; `sigma1` must be valid.
#[no_mangle]
pub unsafe extern "C" fn disperse_principal_eigenvalue(
    handle: *const DisperseScenario,
    which: DisperseLinearization,
    sigma1: *mut f64,
) -> DisperseStatus {
    let h = match scenario_ref(handle) {
        Ok(h) => h,
        Err(s) => return s,
    };
    if sigma1.is_null() {
        set_last_error("null output pointer");
        return DisperseStatus::NullArgument;
    }
    let sc = &h.resolved.scenario;
    let result = (|| -> disperse::Result<f64> {
        let zero = disperse::domain::SpatialField::constant(sc.grid, 0.0);
        let problem = match which {
            DisperseLinearization::ZeroU => invasion_problem(sc, Species::U, &zero)?,
            DisperseLinearization::ZeroV => invasion_problem(sc, Species::V, &zero)?,
            DisperseLinearization::InvaderVAtUStar => {
                let u_star = solve_single_steady(sc, Species::U, None)?;
                invasion_problem(sc, Species::V, &u_star.field)?
            }
            DisperseLinearization::InvaderUAtVStar => {
                let v_star = solve_single_steady(sc, Species::V, None)?;
                invasion_problem(sc, Species::U, &v_star.field)?
            }
        };
        Ok(principal_eigen(&problem)?.sigma1)
    })();
    match result {
        Ok(s) => {
            *sigma1 = s;
            DisperseStatus::Ok
        }
        Err(e) => {
            set_last_error(e);
            DisperseStatus::RunFailed
        }
    }
}

/// Run the verification battery.
///
/// # Safety
/// `handle` must be a live scenario handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn disperse_verify(
    handle: *const DisperseScenario,
    out: *mut *mut DisperseVerify,
) -> DisperseStatus {
    if out.is_null() {
        set_last_error("null output pointer");
        return DisperseStatus::NullArgument;
    }
    let h = match scenario_ref(handle) {
        Ok(h) => h,
        Err(s) => return s,
    };
    match verify_scenario(&h.resolved) {
        Ok(report) => {
            let names = report
                .rows
                .iter()
                .map(|r| CString::new(r.name.clone()).unwrap_or_default())
                .collect();
            let rows = report
                .rows
                .iter()
                .map(|r| (r.lhs, r.rhs, r.rel_err, r.satisfied))
                .collect();
            let boxed = Box::new(DisperseVerify {
                names,
                rows,
                passed: report.passed,
            });
            *out = Box::into_raw(boxed);
            DisperseStatus::Ok
        }
        Err(e) => {
            set_last_error(e);
            DisperseStatus::RunFailed
        }
    }
}

/// Free a verification handle (accepts NULL).
///
/// # Safety
/// `handle` must come from `disperse_verify`.
#[no_mangle]
pub unsafe extern "C" fn disperse_verify_free(handle: *mut DisperseVerify) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// 1 if every check passed.
///
/// # Safety
/// `handle` must be a live verify handle.
#[no_mangle]
pub unsafe extern "C" fn disperse_verify_passed(handle: *const DisperseVerify) -> i32 {
    if handle.is_null() {
        set_last_error("null verify handle");
        return 0;
    }
    (&*handle).passed as i32
}

/// Number of machine-readable check rows.
///
/// # Safety
/// `handle` must be a live verify handle.
#[no_mangle]
pub unsafe extern "C" fn disperse_verify_check_count(handle: *const DisperseVerify) -> usize {
    if handle.is_null() {
        set_last_error("null verify handle");
        return 0;
    }
    (&*handle).rows.len()
}

/// Name of check `index`; valid until the handle is freed.
///
/// # Safety
/// `handle` must be a live verify handle.
#[no_mangle]
pub unsafe extern "C" fn disperse_verify_check_name(
    handle: *const DisperseVerify,
    index: usize,
) -> *const c_char {
    if handle.is_null() {
        set_last_error("null verify handle");
        return ptr::null();
    }
    let handle = &*handle;
    match handle.names.get(index) {
        Some(name) => name.as_ptr(),
        None => {
            set_last_error(format!("check index {index} out of range"));
            ptr::null()
        }
    }
}

/// Numbers of check `index`: lhs, rhs, relative error, satisfied flag.
/// Output pointers may be NULL to skip fields.
///
/// # Safety
/// `handle` must be a live verify handle.
#[no_mangle]
pub unsafe extern "C" fn disperse_verify_check_values(
    handle: *const DisperseVerify,
    index: usize,
    lhs: *mut f64,
    rhs: *mut f64,
    rel_err: *mut f64,
    satisfied: *mut i32,
) -> DisperseStatus {
    if handle.is_null() {
        set_last_error("null verify handle");
        return DisperseStatus::NullArgument;
    }
    let handle = &*handle;
    let Some(&(l, r, e, s)) = handle.rows.get(index) else {
        set_last_error(format!("check index {index} out of range"));
        return DisperseStatus::IndexOutOfRange;
    };
    if !lhs.is_null() {
        *lhs = l;
    }
    if !rhs.is_null() {
        *rhs = r;
    }
    if !rel_err.is_null() {
        *rel_err = e;
    }
    if !satisfied.is_null() {
        *satisfied = s as i32;
    }
    DisperseStatus::Ok
}
