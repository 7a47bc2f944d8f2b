//! C interface to the isat library.
//!
//! Formulas and solver results are opaque heap objects owned by the caller
//! and released with their `_free` functions. Every fallible function
//! returns an [`IsatStatus`]; on failure [`isat_last_error`] describes the
//! problem until the next call on the same thread. Output pointers are only
//! written on success.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use isat::format::{formula_to_string, parse_formula, read_formula_file};
use isat::solver::{solve, Outcome, RunStats, SolverConfig};
use isat::two_isat::{self, Decision};
use isat::{generate_formula, ode, verify, Assignment, Error, Formula};

/// Result codes. `ISAT_STATUS_OK` is zero; everything else is a failure.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsatStatus {
    Ok = 0,
    InvalidParameter = 1,
    Parse = 2,
    IncompleteAssignment = 3,
    Io = 4,
    Domain = 5,
    TooLarge = 6,
    Bracket = 7,
    NullPointer = 8,
    InvalidUtf8 = 9,
    /// The library panicked; this indicates a bug.
    Internal = 10,
}

/// A formula of interval-signed clauses.
pub struct IsatFormula(Formula);

/// The outcome of a solver or decider run.
pub struct IsatResult {
    sat: bool,
    cause: Option<String>,
    assignment: Option<Assignment>,
    stats: Option<RunStats>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(err: &Error) -> IsatStatus {
    match err {
        Error::InvalidParameter(_) => IsatStatus::InvalidParameter,
        Error::Parse { .. } => IsatStatus::Parse,
        Error::IncompleteAssignment(_) => IsatStatus::IncompleteAssignment,
        Error::Io { .. } => IsatStatus::Io,
        Error::Domain(_) => IsatStatus::Domain,
        Error::TooLarge(_) => IsatStatus::TooLarge,
        Error::Bracket(_) => IsatStatus::Bracket,
    }
}

struct Failure(IsatStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(IsatStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> IsatStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IsatStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal error");
            IsatStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(IsatStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Boxes `value` only once `out` is known to be writable.
unsafe fn put_box<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).expect("no interior NUL").into_raw()
}

/// Message of the last failure on this thread. Owned by the library.
#[no_mangle]
pub extern "C" fn isat_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn isat_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Random formula with `m` clauses of `k` distinct variables over `n`.
#[no_mangle]
pub unsafe extern "C" fn isat_formula_generate(
    n: usize,
    m: usize,
    k: usize,
    seed: u64,
    out: *mut *mut IsatFormula,
) -> IsatStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let f = generate_formula(n, m, k, seed)?;
        put_box(out, IsatFormula(f))
    })
}

/// Parses the text format (`p isat n m` header, one clause per line).
#[no_mangle]
pub unsafe extern "C" fn isat_formula_parse(text: *const c_char, out: *mut *mut IsatFormula) -> IsatStatus {
    guard(|| {
        let f = parse_formula(str_arg(text, "text")?)?;
        put_box(out, IsatFormula(f))
    })
}

#[no_mangle]
pub unsafe extern "C" fn isat_formula_read_file(path: *const c_char, out: *mut *mut IsatFormula) -> IsatStatus {
    guard(|| {
        let f = read_formula_file(str_arg(path, "path")?)?;
        put_box(out, IsatFormula(f))
    })
}

/// Text form of the formula; release with [`isat_string_free`].
#[no_mangle]
pub unsafe extern "C" fn isat_formula_to_string(f: *const IsatFormula, out: *mut *mut c_char) -> IsatStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("formula"))?;
        put(out, owned_string(formula_to_string(&f.0)), "out")
    })
}

/// Number of variables, 0 for a null formula.
#[no_mangle]
pub unsafe extern "C" fn isat_formula_num_vars(f: *const IsatFormula) -> usize {
    f.as_ref().map_or(0, |f| f.0.num_vars)
}

/// Number of clauses, 0 for a null formula.
#[no_mangle]
pub unsafe extern "C" fn isat_formula_num_clauses(f: *const IsatFormula) -> usize {
    f.as_ref().map_or(0, |f| f.0.clauses.len())
}

#[no_mangle]
pub unsafe extern "C" fn isat_formula_free(f: *mut IsatFormula) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Checks `len == num_vars` values against every clause.
#[no_mangle]
pub unsafe extern "C" fn isat_verify(
    f: *const IsatFormula,
    values: *const f64,
    len: usize,
    out_satisfied: *mut bool,
) -> IsatStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("formula"))?;
        if values.is_null() && len > 0 {
            return Err(null("values"));
        }
        if len != f.0.num_vars {
            return Err(Failure(
                IsatStatus::InvalidParameter,
                format!("{len} values for {} variables", f.0.num_vars),
            ));
        }
        let slice = if len == 0 { &[][..] } else { std::slice::from_raw_parts(values, len) };
        let ok = verify(&f.0, &Assignment::from_values(slice))?;
        put(out_satisfied, ok, "out_satisfied")
    })
}

/// Runs the solver with outer-loop constant `c_prime`.
#[no_mangle]
pub unsafe extern "C" fn isat_solve(
    f: *const IsatFormula,
    c_prime: f64,
    seed: u64,
    out: *mut *mut IsatResult,
) -> IsatStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("formula"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let config = SolverConfig { c_prime, ..SolverConfig::default() };
        let report = solve(&f.0, &config, seed)?;
        let (sat, cause, assignment) = match report.outcome {
            Outcome::Sat(a) => (true, None, Some(a)),
            Outcome::GaveUp(c) => (false, Some(format!("{c:?}")), None),
        };
        let result = IsatResult { sat, cause, assignment, stats: Some(report.stats) };
        put_box(out, result)
    })
}

/// Decides a formula whose clauses all have two literals.
#[no_mangle]
pub unsafe extern "C" fn isat_decide2(f: *const IsatFormula, out: *mut *mut IsatResult) -> IsatStatus {
    guard(|| {
        let f = f.as_ref().ok_or_else(|| null("formula"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let result = match two_isat::decide(&f.0)? {
            Decision::Sat(a) => IsatResult { sat: true, cause: None, assignment: Some(a), stats: None },
            Decision::Unsat(_) => IsatResult { sat: false, cause: Some("Unsat".into()), assignment: None, stats: None },
        };
        put_box(out, result)
    })
}

/// Whether the run found a satisfying assignment; false for null.
#[no_mangle]
pub unsafe extern "C" fn isat_result_is_sat(r: *const IsatResult) -> bool {
    r.as_ref().is_some_and(|r| r.sat)
}

/// Value of variable `var` (0-based) in a satisfying result.
#[no_mangle]
pub unsafe extern "C" fn isat_result_value(r: *const IsatResult, var: usize, out: *mut f64) -> IsatStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(|| null("result"))?;
        let a = r
            .assignment
            .as_ref()
            .ok_or_else(|| Failure(IsatStatus::Domain, "result has no assignment".into()))?;
        let v = a.get(var).ok_or(Error::IncompleteAssignment(var))?;
        put(out, v, "out")
    })
}

/// Why the run gave up (`EmptyClause`, `FinalUnsat`, ...) or `Sat`.
/// Release with [`isat_string_free`].
#[no_mangle]
pub unsafe extern "C" fn isat_result_outcome(r: *const IsatResult, out: *mut *mut c_char) -> IsatStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(|| null("result"))?;
        let text = r.cause.clone().unwrap_or_else(|| "Sat".into());
        put(out, owned_string(text), "out")
    })
}

/// Solver statistics as JSON; `{}` for decider results.
/// Release with [`isat_string_free`].
#[no_mangle]
pub unsafe extern "C" fn isat_result_stats_json(r: *const IsatResult, out: *mut *mut c_char) -> IsatStatus {
    guard(|| {
        let r = r.as_ref().ok_or_else(|| null("result"))?;
        let json = match &r.stats {
            Some(s) => serde_json::to_string(s).expect("stats serialize"),
            None => "{}".into(),
        };
        put(out, owned_string(json), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn isat_result_free(r: *mut IsatResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Largest density in `[lo, hi]` whose trajectory stays in the good region,
/// to within `tol`.
#[no_mangle]
pub unsafe extern "C" fn isat_find_threshold(eps: f64, lo: f64, hi: f64, tol: f64, out: *mut f64) -> IsatStatus {
    guard(|| {
        let c = ode::find_threshold(eps, lo, hi, tol)?;
        put(out, c, "out")
    })
}
