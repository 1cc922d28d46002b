//! C interface to the rattleback library.
//!
//! Objects are opaque handles created by `rb_*_new`/`rb_certify` and released
//! with the matching `rb_*_free`. Every fallible call returns an `RbStatus`;
//! the message of the last failure on the calling thread is available from
//! `rb_last_error_message`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use rattleback::error::Error;
use rattleback::model::{Params, State};
use rattleback::monodromy::{self, IntegrabilityReport, Numerics, Verdict};
use rattleback::simulate::{self, IntegratorConfig};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RbStatus {
    Ok = 0,
    NullPointer = 1,
    /// Parameters or configuration rejected.
    InvalidInput = 2,
    /// Integration or continuation failed its accuracy checks.
    Numerical = 3,
    Utf8 = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RbVerdict {
    AnalyticNonintegrable = 0,
    MeromorphicNonintegrable = 1,
    Inconclusive = 2,
}

/// Body parameters.
pub struct RbParams(Params);

/// Certification result.
pub struct RbReport(IntegrabilityReport);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> RbStatus {
    set_error(&e.to_string());
    if e.is_config_error() {
        RbStatus::InvalidInput
    } else {
        RbStatus::Numerical
    }
}

fn guard(f: impl FnOnce() -> RbStatus) -> RbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            RbStatus::Panic
        }
    }
}

fn null(what: &str) -> RbStatus {
    set_error(&format!("null pointer: {what}"));
    RbStatus::NullPointer
}

/// Message for the last failure on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Body from principal moments, tilt `delta`, semi-axes and `m`, `g`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn rb_params_new(
    i1: f64,
    i2: f64,
    i3: f64,
    delta: f64,
    b: *const f64,
    m: f64,
    g: f64,
    out: *mut *mut RbParams,
) -> RbStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        if b.is_null() {
            return null("b");
        }
        let b = [*b, *b.add(1), *b.add(2)];
        match Params::from_principal(i1, i2, i3, delta, b, m, g) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(RbParams(p)));
                RbStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Body from the JSON parameter object accepted by the command-line tool.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rb_params_from_json(json: *const c_char, out: *mut *mut RbParams) -> RbStatus {
    guard(|| {
        if json.is_null() {
            return null("json");
        }
        if out.is_null() {
            return null("out");
        }
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            set_error("parameter JSON is not valid UTF-8");
            return RbStatus::Utf8;
        };
        match serde_json::from_str::<Params>(text) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(RbParams(p)));
                RbStatus::Ok
            }
            Err(e) => {
                set_error(&format!("line {}, column {}: {e}", e.line(), e.column()));
                RbStatus::InvalidInput
            }
        }
    })
}

/// # Safety
/// `p` must come from `rb_params_new`/`rb_params_from_json` or be null.
#[no_mangle]
pub unsafe extern "C" fn rb_params_free(p: *mut RbParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Integrates from `omega0`, `gamma0` (three entries each) up to `t_end`
/// with default tolerances. Writes the final `(ω, γ)` to `state_out` (six
/// entries) and the relative energy drift to `h_drift` if non-null.
///
/// # Safety
/// All non-null pointers must reference arrays of the stated length.
#[no_mangle]
pub unsafe extern "C" fn rb_simulate(
    params: *const RbParams,
    omega0: *const f64,
    gamma0: *const f64,
    t_end: f64,
    state_out: *mut f64,
    h_drift: *mut f64,
) -> RbStatus {
    guard(|| {
        if params.is_null() || omega0.is_null() || gamma0.is_null() || state_out.is_null() {
            return null("params, omega0, gamma0 or state_out");
        }
        let w = [*omega0, *omega0.add(1), *omega0.add(2)];
        let g = [*gamma0, *gamma0.add(1), *gamma0.add(2)];
        let res =
            State::new(w, g).and_then(|x| simulate::integrate(&x, &(*params).0, t_end, &IntegratorConfig::default()));
        match res {
            Ok(tr) => {
                let y = tr.last().to_array();
                ptr::copy_nonoverlapping(y.as_ptr(), state_out, 6);
                if !h_drift.is_null() {
                    *h_drift = tr.h_drift;
                }
                RbStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Runs the certification pipeline at energy `h = h_re + i h_im` with
/// default numerics.
///
/// # Safety
/// `params` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rb_certify(
    params: *const RbParams,
    h_re: f64,
    h_im: f64,
    out: *mut *mut RbReport,
) -> RbStatus {
    guard(|| {
        if params.is_null() || out.is_null() {
            return null("params or out");
        }
        match monodromy::integrability_report(&(*params).0, Complex64::new(h_re, h_im), &Numerics::default()) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(RbReport(r)));
                RbStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rb_report_verdict(report: *const RbReport, out: *mut RbVerdict) -> RbStatus {
    if report.is_null() || out.is_null() {
        return null("report or out");
    }
    *out = match (*report).0.verdict {
        Verdict::AnalyticNonintegrable => RbVerdict::AnalyticNonintegrable,
        Verdict::MeromorphicNonintegrable => RbVerdict::MeromorphicNonintegrable,
        Verdict::Inconclusive => RbVerdict::Inconclusive,
    };
    RbStatus::Ok
}

/// Copies the three exponents into `re` and `im` (three entries each).
///
/// # Safety
/// `report` must be a live handle; `re`, `im` must hold three doubles.
#[no_mangle]
pub unsafe extern "C" fn rb_report_lambda(report: *const RbReport, re: *mut f64, im: *mut f64) -> RbStatus {
    if report.is_null() || re.is_null() || im.is_null() {
        return null("report, re or im");
    }
    for (k, l) in (*report).0.lambda.iter().enumerate() {
        *re.add(k) = l.re;
        *im.add(k) = l.im;
    }
    RbStatus::Ok
}

/// Full report as a JSON string, released with `rb_string_free`. Returns
/// null on failure.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn rb_report_json(report: *const RbReport) -> *mut c_char {
    if report.is_null() {
        null("report");
        return ptr::null_mut();
    }
    match serde_json::to_string(&(*report).0) {
        Ok(s) => CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut()),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `report` must come from `rb_certify` or be null.
#[no_mangle]
pub unsafe extern "C" fn rb_report_free(report: *mut RbReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn rb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
