//! C ABI over `gevmdpd`.
//!
//! Every function returns a [`GevmdpdStatus`] and writes results through out
//! pointers. On failure a message is kept per thread and can be read with
//! [`gevmdpd_last_error`]. Fits are returned as opaque handles that must be
//! released with [`gevmdpd_fit_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gevmdpd::asymptotics::{attach_standard_errors, compute_ujk, influence};
use gevmdpd::gev::{self, GevParams};
use gevmdpd::mdpd::{fit_mdpd, FitResult, MdpdConfig};
use gevmdpd::metrics::w1;
use gevmdpd::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GevmdpdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    OutOfSupport = 3,
    Infeasible = 4,
    DataError = 5,
    NonConvergence = 6,
    IntegrabilityViolation = 7,
    SingularMatrix = 8,
    InfiniteMoment = 9,
    NumericalError = 10,
    Panic = 11,
}

/// A fitted model. Opaque to C.
pub struct GevmdpdFit {
    result: FitResult,
    n: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> GevmdpdStatus {
    match e {
        Error::InvalidParameter(_) | Error::InvalidProbability(_) => GevmdpdStatus::InvalidParameter,
        Error::OutOfSupport { .. } => GevmdpdStatus::OutOfSupport,
        Error::Infeasible(_) => GevmdpdStatus::Infeasible,
        Error::NonConvergence(_) => GevmdpdStatus::NonConvergence,
        Error::IntegrabilityViolation { .. } => GevmdpdStatus::IntegrabilityViolation,
        Error::SingularJ { .. } => GevmdpdStatus::SingularMatrix,
        Error::InfiniteMoment { .. } => GevmdpdStatus::InfiniteMoment,
        Error::Quadrature(_) => GevmdpdStatus::NumericalError,
        _ => GevmdpdStatus::DataError,
    }
}

fn guard<F: FnOnce() -> Result<(), GevmdpdStatus>>(f: F) -> GevmdpdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GevmdpdStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            GevmdpdStatus::Panic
        }
    }
}

fn check<T>(r: gevmdpd::Result<T>) -> Result<T, GevmdpdStatus> {
    r.map_err(|e| {
        set_error(&e.to_string());
        status_of(&e)
    })
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), GevmdpdStatus> {
    if p.is_null() {
        set_error(&format!("{name} is null"));
        Err(GevmdpdStatus::NullPointer)
    } else {
        Ok(())
    }
}

fn params(mu: f64, sigma: f64, xi: f64) -> Result<GevParams, GevmdpdStatus> {
    check(GevParams::new(mu, sigma, xi))
}

/// Message for the last failure on this thread. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn gevmdpd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gevmdpd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn gevmdpd_pdf(mu: f64, sigma: f64, xi: f64, x: f64, out: *mut f64) -> GevmdpdStatus {
    guard(|| {
        non_null(out, "out")?;
        let p = params(mu, sigma, xi)?;
        unsafe { *out = gev::pdf(x, &p) };
        Ok(())
    })
}

/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn gevmdpd_cdf(mu: f64, sigma: f64, xi: f64, x: f64, out: *mut f64) -> GevmdpdStatus {
    guard(|| {
        non_null(out, "out")?;
        let p = params(mu, sigma, xi)?;
        unsafe { *out = gev::cdf(x, &p) };
        Ok(())
    })
}

/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn gevmdpd_quantile(mu: f64, sigma: f64, xi: f64, p: f64, out: *mut f64) -> GevmdpdStatus {
    guard(|| {
        non_null(out, "out")?;
        let q = check(gev::quantile(p, &params(mu, sigma, xi)?))?;
        unsafe { *out = q };
        Ok(())
    })
}

/// Fill `out[0..n]` with a sample that depends only on the parameters and `seed`.
///
/// # Safety
/// `out` must be valid for `n` writes.
#[no_mangle]
pub unsafe extern "C" fn gevmdpd_sample(
    mu: f64,
    sigma: f64,
    xi: f64,
    n: usize,
    seed: u64,
    out: *mut f64,
) -> GevmdpdStatus {
    guard(|| {
        let p = params(mu, sigma, xi)?;
        if n == 0 {
            return Ok(());
        }
        non_null(out, "out")?;
        let xs = gev::sample(n, &p, seed);
        unsafe { ptr::copy_nonoverlapping(xs.as_ptr(), out, n) };
        Ok(())
    })
}

/// Fit by minimum density power divergence; `alpha = 0` gives maximum likelihood.
///
/// A handle is returned even when the optimizer did not converge; check
/// [`gevmdpd_fit_converged`].
///
/// # Safety
/// `data` must be valid for `n` reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn gevmdpd_fit(
    data: *const f64,
    n: usize,
    alpha: f64,
    out: *mut *mut GevmdpdFit,
) -> GevmdpdStatus {
    guard(|| {
        non_null(out, "out")?;
        unsafe { *out = ptr::null_mut() };
        non_null(data, "data")?;
        let xs = unsafe { std::slice::from_raw_parts(data, n) };
        let result = check(fit_mdpd(xs, &MdpdConfig::with_alpha(alpha)))?;
        let handle = Box::new(GevmdpdFit { result, n });
        unsafe { *out = Box::into_raw(handle) };
        Ok(())
    })
}

/// # Safety
/// `fit` must come from [`gevmdpd_fit`]; `out` must be valid for three writes.
#[no_mangle]
pub unsafe extern "C" fn gevmdpd_fit_params(fit: *const GevmdpdFit, out: *mut f64) -> GevmdpdStatus {
    guard(|| {
        non_null(fit, "fit")?;
        non_null(out, "out")?;
        let p = unsafe { &*fit }.result.params.as_array();
        unsafe { ptr::copy_nonoverlapping(p.as_ptr(), out, 3) };
        Ok(())
    })
}

/// Writes 1 if the fit converged, else 0.
///
/// # Safety
/// `fit` must come from [`gevmdpd_fit`]; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn gevmdpd_fit_converged(fit: *const GevmdpdFit, out: *mut i32) -> GevmdpdStatus {
    guard(|| {
        non_null(fit, "fit")?;
        non_null(out, "out")?;
        let converged = unsafe { &*fit }.result.converged;
        unsafe { *out = i32::from(converged) };
        Ok(())
    })
}

/// Sandwich standard errors of (mu, sigma, xi) for the fitted sample size.
///
/// # Safety
/// `fit` must come from [`gevmdpd_fit`]; `out` must be valid for three writes.
#[no_mangle]
pub unsafe extern "C" fn gevmdpd_fit_std_errors(fit: *const GevmdpdFit, out: *mut f64) -> GevmdpdStatus {
    guard(|| {
        non_null(fit, "fit")?;
        non_null(out, "out")?;
        let h = unsafe { &*fit };
        let mut r = h.result.clone();
        check(attach_standard_errors(&mut r, h.n))?;
        let se = r.std_errors.expect("set on success");
        unsafe { ptr::copy_nonoverlapping(se.as_ptr(), out, 3) };
        Ok(())
    })
}

/// Release a fit. Null is ignored.
///
/// # Safety
/// `fit` must come from [`gevmdpd_fit`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gevmdpd_fit_free(fit: *mut GevmdpdFit) {
    if !fit.is_null() {
        drop(unsafe { Box::from_raw(fit) });
    }
}

/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn gevmdpd_wasserstein1(
    mu1: f64,
    sigma1: f64,
    xi1: f64,
    mu2: f64,
    sigma2: f64,
    xi2: f64,
    out: *mut f64,
) -> GevmdpdStatus {
    guard(|| {
        non_null(out, "out")?;
        let d = check(w1(&params(mu1, sigma1, xi1)?, &params(mu2, sigma2, xi2)?))?;
        unsafe { *out = d };
        Ok(())
    })
}

/// Influence function of the estimator at `x`.
///
/// # Safety
/// `out` must be valid for three writes.
#[no_mangle]
pub unsafe extern "C" fn gevmdpd_influence(
    mu: f64,
    sigma: f64,
    xi: f64,
    alpha: f64,
    x: f64,
    out: *mut f64,
) -> GevmdpdStatus {
    guard(|| {
        non_null(out, "out")?;
        let v = check(influence(x, &params(mu, sigma, xi)?, alpha))?;
        unsafe { ptr::copy_nonoverlapping(v.as_ptr(), out, 3) };
        Ok(())
    })
}

/// Asymptotic covariance of `sqrt(n)` times the estimator, row-major 3x3.
///
/// # Safety
/// `out` must be valid for nine writes.
#[no_mangle]
pub unsafe extern "C" fn gevmdpd_asymptotic_covariance(
    mu: f64,
    sigma: f64,
    xi: f64,
    alpha: f64,
    out: *mut f64,
) -> GevmdpdStatus {
    guard(|| {
        non_null(out, "out")?;
        let sc = check(compute_ujk(&params(mu, sigma, xi)?, alpha))?;
        for i in 0..3 {
            for j in 0..3 {
                unsafe { *out.add(3 * i + j) = sc.cov[(i, j)] };
            }
        }
        Ok(())
    })
}
