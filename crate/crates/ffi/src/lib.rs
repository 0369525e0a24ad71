//! C ABI for the `ratstokes` solver.
//!
//! Solutions are opaque [`RsSolution`] handles created by `rs_solve_*` and
//! released with [`rs_solution_free`]. Every function returns an
//! [`RsStatus`]; on failure [`rs_last_error_message`] describes the error for
//! the calling thread. Panics are caught at the boundary and reported as
//! [`RsStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ratstokes::config::RunConfig;
use ratstokes::solver::{PoleSource, SolveOutcome};
use ratstokes::{cases, solve_problem, C64};

/// Result code of every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    Solver = 3,
    Evaluation = 4,
    Panic = 5,
}

/// Solved flow; only ever handled through pointers.
pub struct RsSolution {
    outcome: SolveOutcome,
}

/// Flow quantities at one point.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RsFields {
    pub psi: f64,
    pub u: f64,
    pub v: f64,
    pub p: f64,
    pub omega: f64,
}

/// Complex number as a real/imaginary pair.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RsComplex {
    pub re: f64,
    pub im: f64,
}

/// Goursat functions `f`, `g` and their derivatives at one point.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RsGoursat {
    pub f: RsComplex,
    pub fp: RsComplex,
    pub g: RsComplex,
    pub gp: RsComplex,
}

/// Origin of a pole in the rational basis.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsPoleSource {
    Lightning = 0,
    Aaa = 1,
}

/// One pole location.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsPole {
    pub x: f64,
    pub y: f64,
    pub source: RsPoleSource,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    let text = CString::new(text).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

struct Failure(RsStatus, String);

impl From<ratstokes::Error> for Failure {
    fn from(e: ratstokes::Error) -> Self {
        let status = match e {
            ratstokes::Error::Config(_) | ratstokes::Error::Case(_) => RsStatus::InvalidConfig,
            ratstokes::Error::Eval(_) => RsStatus::Evaluation,
            _ => RsStatus::Solver,
        };
        Failure(status, e.to_string())
    }
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> RsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            RsStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {message}"));
            RsStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(RsStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `ptr` must be null or point to a NUL-terminated string.
unsafe fn read_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    // SAFETY: non-null and NUL-terminated by the caller's contract.
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|_| Failure(RsStatus::InvalidConfig, format!("{what} is not valid UTF-8")))
}

/// # Safety
/// `ptr` must be null or a handle returned by `rs_solve_*` and not yet freed.
unsafe fn solution<'a>(ptr: *const RsSolution) -> Result<&'a RsSolution, Failure> {
    // SAFETY: valid or null by the caller's contract.
    unsafe { ptr.as_ref() }.ok_or_else(|| null("solution"))
}

/// # Safety
/// `ptr` must be null or valid for writing one `T`.
unsafe fn write_out<T>(ptr: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    // SAFETY: non-null and writable by the caller's contract.
    unsafe { ptr.write(value) };
    Ok(())
}

fn solve_into(out: *mut *mut RsSolution, build: impl FnOnce() -> Result<ratstokes::Problem, Failure>) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    let outcome = solve_problem(&build()?)?;
    let handle = Box::into_raw(Box::new(RsSolution { outcome }));
    // SAFETY: checked non-null above; writable by the caller's contract.
    unsafe { out.write(handle) };
    Ok(())
}

/// Solves the flow described by a JSON configuration document.
///
/// On success `*out` receives a handle to release with [`rs_solution_free`].
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn rs_solve_config_json(config_json: *const c_char, out: *mut *mut RsSolution) -> RsStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let text = unsafe { read_str(config_json, "config_json") }?;
        solve_into(out, || {
            let cfg = RunConfig::from_json(text).map_err(|e| Failure(RsStatus::InvalidConfig, e.to_string()))?;
            cfg.validate().map_err(|e| Failure(RsStatus::InvalidConfig, e.to_string()))?;
            cfg.problem().map_err(|e| Failure(RsStatus::InvalidConfig, e.to_string()))
        })
    })
}

/// Solves a named benchmark case with default parameters, e.g.
/// `"two-cylinder-d"`, `"constricted-channel"` or `"bifurcation-ellipse"`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn rs_solve_case(name: *const c_char, out: *mut *mut RsSolution) -> RsStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let name = unsafe { read_str(name, "name") }?;
        solve_into(out, || cases::named_case(name).map_err(|e| Failure(RsStatus::InvalidConfig, e.to_string())))
    })
}

/// Evaluates `ψ, u, v, p, ω` at `(x, y)`.
///
/// # Safety
/// `solution` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn rs_eval_fields(solution: *const RsSolution, x: f64, y: f64, out: *mut RsFields) -> RsStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let sol = unsafe { self::solution(solution) }?;
        let s = sol.outcome.solution.eval_fields(C64::new(x, y)).map_err(ratstokes::Error::from)?;
        // SAFETY: forwarded caller contract.
        unsafe { write_out(out, RsFields { psi: s.psi, u: s.u, v: s.v, p: s.p, omega: s.omega }, "out") }
    })
}

/// Evaluates the Goursat functions and their derivatives at `(x, y)`.
///
/// # Safety
/// `solution` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn rs_eval_goursat(solution: *const RsSolution, x: f64, y: f64, out: *mut RsGoursat) -> RsStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let sol = unsafe { self::solution(solution) }?;
        let t = sol.outcome.solution.eval_goursat(C64::new(x, y)).map_err(ratstokes::Error::from)?;
        let c = |z: C64| RsComplex { re: z.re, im: z.im };
        // SAFETY: forwarded caller contract.
        unsafe { write_out(out, RsGoursat { f: c(t.f), fp: c(t.fp), g: c(t.g), gp: c(t.gp) }, "out") }
    })
}

/// Accuracy in digits, `−log10` of the maximum boundary error.
///
/// # Safety
/// `solution` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn rs_boundary_accuracy_digits(solution: *const RsSolution, out: *mut f64) -> RsStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let sol = unsafe { self::solution(solution) }?;
        // SAFETY: forwarded caller contract.
        unsafe { write_out(out, sol.outcome.report.accuracy_digits, "out") }
    })
}

/// Inlet-to-outlet pressure drop; [`RsStatus::Evaluation`] for cases
/// without one.
///
/// # Safety
/// `solution` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn rs_pressure_drop(solution: *const RsSolution, out: *mut f64) -> RsStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let sol = unsafe { self::solution(solution) }?;
        let dp = sol
            .outcome
            .report
            .pressure_drop
            .ok_or_else(|| Failure(RsStatus::Evaluation, "this case defines no pressure drop".into()))?;
        // SAFETY: forwarded caller contract.
        unsafe { write_out(out, dp, "out") }
    })
}

/// Number of poles (lightning and AAA) in the basis.
///
/// # Safety
/// `solution` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn rs_pole_count(solution: *const RsSolution, out: *mut usize) -> RsStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let sol = unsafe { self::solution(solution) }?;
        // SAFETY: forwarded caller contract.
        unsafe { write_out(out, sol.outcome.poles.len(), "out") }
    })
}

/// Copies up to `capacity` poles into `out` and stores the number copied in
/// `written`. `out` may be null when `capacity` is zero.
///
/// # Safety
/// `solution` must be a live handle, `out` valid for `capacity` writes and
/// `written` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn rs_poles(
    solution: *const RsSolution,
    out: *mut RsPole,
    capacity: usize,
    written: *mut usize,
) -> RsStatus {
    guard(|| {
        // SAFETY: forwarded caller contract.
        let sol = unsafe { self::solution(solution) }?;
        if written.is_null() {
            return Err(null("written"));
        }
        if out.is_null() && capacity > 0 {
            return Err(null("out"));
        }
        let count = capacity.min(sol.outcome.poles.len());
        for (k, pole) in sol.outcome.poles.iter().take(count).enumerate() {
            let source = match pole.source {
                PoleSource::Lightning => RsPoleSource::Lightning,
                PoleSource::Aaa => RsPoleSource::Aaa,
            };
            // SAFETY: k < capacity and `out` holds `capacity` slots.
            unsafe { out.add(k).write(RsPole { x: pole.z.x, y: pole.z.y, source }) };
        }
        // SAFETY: checked non-null above.
        unsafe { written.write(count) };
        Ok(())
    })
}

/// Lubrication-theory pressure drop of the constricted channel truncated
/// after the `δ^order` term (`order` ∈ {0, 2, 4}).
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn rs_elt_pressure_drop(lambda: f64, delta: f64, order: u32, out: *mut f64) -> RsStatus {
    guard(|| {
        let dp = cases::elt_pressure_drop(lambda, delta, order).map_err(|e| Failure(RsStatus::InvalidConfig, e.to_string()))?;
        // SAFETY: forwarded caller contract.
        unsafe { write_out(out, dp, "out") }
    })
}

/// Releases a solution handle. Null is ignored.
///
/// # Safety
/// `solution` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rs_solution_free(solution: *mut RsSolution) {
    if !solution.is_null() {
        // SAFETY: created by Box::into_raw in `solve_into` and not yet freed.
        drop(unsafe { Box::from_raw(solution) });
    }
}

/// Message of the last failed call on this thread, or an empty string.
///
/// The pointer stays valid until the next `rs_*` call on the same thread.
#[no_mangle]
pub extern "C" fn rs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
