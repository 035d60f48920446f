//! C interface.
//!
//! Objects cross the boundary as opaque handles, released with the matching
//! `*_free` function. Every fallible call
//! returns an [`LwError`] code and writes its result through an out pointer;
//! on failure a message is available from [`lw_last_error_message`] on the
//! same thread. Panics never unwind into C: they are reported as
//! [`LwError::Internal`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lossy_witness::critical::{find_critical_eta_in, Scenario};
use lossy_witness::linalg::PauliCoeffs;
use lossy_witness::model::{build_program, Strategy};
use lossy_witness::oracle::{assignment_bell_min_zero, discard_bell_min};
use lossy_witness::solver::{self, SolveReport, SolveStatus};
use lossy_witness::witness::{build_theta_witness, AssignmentVector, Witness};
use lossy_witness::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LwError {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    SolveFailed = 3,
    NoSignChange = 4,
    NonMonotone = 5,
    Internal = 6,
}

/// Post-processing applied to no-click events.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LwStrategy {
    Discard = 0,
    Assignment = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LwSolveStatus {
    Optimal = 0,
    Infeasible = 1,
    NumericalFailure = 2,
}

/// Opaque witness operator.
pub struct LwWitness {
    inner: Witness,
    /// Set when built from an angle, so that the target state is known.
    theta: Option<f64>,
}

/// Opaque solver report.
pub struct LwReport(SolveReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn code_for(e: &Error) -> LwError {
    match e {
        Error::SolveFailed { .. } => LwError::SolveFailed,
        Error::NoSignChange { .. } => LwError::NoSignChange,
        Error::NonMonotone { .. } => LwError::NonMonotone,
        _ => LwError::InvalidInput,
    }
}

/// Runs `f`, converting errors and panics into codes.
fn guard(f: impl FnOnce() -> Result<(), LwError>) -> LwError {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LwError::Ok,
        Ok(Err(code)) => code,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal error: {msg}"));
            LwError::Internal
        }
    }
}

fn fail(e: Error) -> LwError {
    set_error(&e.to_string());
    code_for(&e)
}

fn null(what: &str) -> LwError {
    set_error(&format!("{what} is null"));
    LwError::NullPointer
}

unsafe fn read_vector(p: *const f64) -> AssignmentVector {
    if p.is_null() {
        AssignmentVector::ZERO
    } else {
        AssignmentVector([*p, *p.add(1), *p.add(2)])
    }
}

unsafe fn strategy(kind: LwStrategy, a: *const f64, b: *const f64) -> Strategy {
    match kind {
        LwStrategy::Discard => Strategy::Discard,
        LwStrategy::Assignment => Strategy::Assignment { a: read_vector(a), b: read_vector(b) },
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len` bytes) and returns the full message length, or 0 when
/// the last call succeeded.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn lw_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// `W_θ = cos²θ·1 − |Ψ_θ⟩⟨Ψ_θ|` for `θ ∈ (0, π/4]`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lw_witness_theta(theta: f64, out: *mut *mut LwWitness) -> LwError {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let w = build_theta_witness(theta).map_err(fail)?;
        *out = Box::into_raw(Box::new(LwWitness { inner: w, theta: Some(theta) }));
        Ok(())
    })
}

/// Witness from its 16 Pauli coefficients `w[4i + j]` of `σ_i ⊗ σ_j`.
///
/// # Safety
/// `coeffs` must point to 16 doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn lw_witness_from_coeffs(coeffs: *const f64, out: *mut *mut LwWitness) -> LwError {
    guard(|| {
        if coeffs.is_null() {
            return Err(null("coeffs"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let c = std::slice::from_raw_parts(coeffs, 16);
        if c.iter().any(|v| !v.is_finite()) {
            return Err(fail(Error::InvalidInput("coefficients must be finite".into())));
        }
        let pc = PauliCoeffs(std::array::from_fn(|i| std::array::from_fn(|j| c[4 * i + j])));
        *out = Box::into_raw(Box::new(LwWitness { inner: Witness::from_coeffs(pc), theta: None }));
        Ok(())
    })
}

/// # Safety
/// `w` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lw_witness_free(w: *mut LwWitness) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Solves the worst-case program. `a`, `b` point to three doubles each and
/// are read only for [`LwStrategy::Assignment`]; null means `(0, 0, 0)`.
/// A report is produced for every status; check [`lw_report_status`].
///
/// # Safety
/// `w` must be a live handle, `a`/`b` null or valid for 3 reads, `out` valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn lw_solve(
    w: *const LwWitness,
    kind: LwStrategy,
    a: *const f64,
    b: *const f64,
    eta: f64,
    out: *mut *mut LwReport,
) -> LwError {
    guard(|| {
        let w = w.as_ref().ok_or_else(|| null("witness"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let program = build_program(&w.inner, &strategy(kind, a, b), eta).map_err(fail)?;
        *out = Box::into_raw(Box::new(LwReport(solver::solve(&program))));
        Ok(())
    })
}

/// # Safety
/// `r` must be a live report handle.
#[no_mangle]
pub unsafe extern "C" fn lw_report_status(r: *const LwReport) -> LwSolveStatus {
    match r.as_ref().map(|r| r.0.status) {
        Some(SolveStatus::Optimal) => LwSolveStatus::Optimal,
        Some(SolveStatus::Infeasible) => LwSolveStatus::Infeasible,
        _ => LwSolveStatus::NumericalFailure,
    }
}

/// Objective value of the returned ensemble (meaningful when optimal).
///
/// # Safety
/// `r` must be a live report handle.
#[no_mangle]
pub unsafe extern "C" fn lw_report_optimum(r: *const LwReport) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.0.optimum)
}

/// Largest equality violation and smallest block eigenvalue.
///
/// # Safety
/// `r` must be a live report handle; the out pointers null or writable.
#[no_mangle]
pub unsafe extern "C" fn lw_report_residuals(
    r: *const LwReport,
    max_equality_violation: *mut f64,
    min_block_eigenvalue: *mut f64,
) -> LwError {
    guard(|| {
        let r = r.as_ref().ok_or_else(|| null("report"))?;
        if !max_equality_violation.is_null() {
            *max_equality_violation = r.0.residuals.max_equality_violation;
        }
        if !min_block_eigenvalue.is_null() {
            *min_block_eigenvalue = r.0.residuals.min_block_eigenvalue;
        }
        Ok(())
    })
}

/// # Safety
/// `r` must be a live report handle.
#[no_mangle]
pub unsafe extern "C" fn lw_report_iterations(r: *const LwReport) -> usize {
    r.as_ref().map_or(0, |r| r.0.iterations)
}

/// # Safety
/// `r` must be null or a report handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lw_report_free(r: *mut LwReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Bisection for the critical efficiency of an angle witness over
/// `[lo, hi]`. Writes the estimate and the final bracket.
///
/// # Safety
/// `w` must be a live handle built with [`lw_witness_theta`]; `a`/`b` null or
/// valid for 3 reads; out pointers writable (bracket pointers may be null).
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn lw_critical_eta(
    w: *const LwWitness,
    kind: LwStrategy,
    a: *const f64,
    b: *const f64,
    tol: f64,
    lo: f64,
    hi: f64,
    eta_crit: *mut f64,
    bracket_lo: *mut f64,
    bracket_hi: *mut f64,
) -> LwError {
    guard(|| {
        let w = w.as_ref().ok_or_else(|| null("witness"))?;
        if eta_crit.is_null() {
            return Err(null("eta_crit"));
        }
        let theta =
            w.theta.ok_or_else(|| fail(Error::InvalidInput("critical efficiency needs an angle witness".into())))?;
        let s = Scenario::theta(theta, strategy(kind, a, b)).map_err(fail)?;
        let r = find_critical_eta_in(&s, tol, (lo, hi)).map_err(fail)?;
        *eta_crit = r.eta_crit;
        if !bracket_lo.is_null() {
            *bracket_lo = r.bracket.0;
        }
        if !bracket_hi.is_null() {
            *bracket_hi = r.bracket.1;
        }
        Ok(())
    })
}

/// Closed-form Bell-witness minimum under the discard strategy.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lw_discard_bell_min(eta: f64, out: *mut f64) -> LwError {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = discard_bell_min(eta).map_err(fail)?;
        Ok(())
    })
}

/// Closed-form Bell-witness minimum under the assignment strategy with
/// zero assignment vectors.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lw_assignment_bell_min_zero(eta: f64, out: *mut f64) -> LwError {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = assignment_bell_min_zero(eta).map_err(fail)?;
        Ok(())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
