//! C ABI over `hardy-core`.
//!
//! Every fallible call returns a [`HardyStatus`]; on failure the message is
//! kept per thread and can be copied out with [`hardy_last_error_message`].
//! Trial functions are opaque handles owned by the caller and released with
//! [`hardy_trial_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hardy_core::constants::{FunctionClass, Params};
use hardy_core::minimax::{numeric_minimax, CertificateProblem, SearchConfig};
use hardy_core::polynomials::{vandermonde_gradient, vandermonde_value, AngularFactor};
use hardy_core::quadrature::{rayleigh_quotient, Functional, Method, QuadratureConfig, Verdict};
use hardy_core::trials::{gaussian_trial, sharpness_family, TrialFunction};
use hardy_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HardyStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidDimension = 3,
    OutOfRange = 4,
    Domain = 5,
    SymmetryViolation = 6,
    Degenerate = 7,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HardyClass {
    General = 0,
    Antisymmetric = 1,
    Odd = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HardyFunctional {
    Hardy = 0,
    Rellich = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HardyMethod {
    MonteCarlo = 0,
    Product = 1,
    Factorized = 2,
}

/// Closed-form constant with its admissibility condition.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HardyConstant {
    pub value: f64,
    pub condition_residual: f64,
    pub admissible: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HardyMinimax {
    pub alpha_star: f64,
    pub beta_star: f64,
    pub t_star: f64,
    pub value_numeric: f64,
    pub value_closed_form: f64,
    pub gap: f64,
    pub converged: bool,
}

/// `verdict`: 0 holds, 1 inconclusive, 2 violated.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HardyQuotient {
    pub numerator: f64,
    pub numerator_error: f64,
    pub denominator: f64,
    pub denominator_error: f64,
    pub quotient: f64,
    pub quotient_error: f64,
    pub constant: f64,
    pub margin: f64,
    pub verdict: i32,
}

/// Opaque trial function `F(x) ψ(|x|)`.
pub struct HardyTrial {
    inner: TrialFunction,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> HardyStatus {
    match e {
        Error::InvalidDimension { .. } | Error::UnsupportedDimension { .. } | Error::Budget { .. } => {
            HardyStatus::InvalidDimension
        }
        Error::OutOfRange(_) | Error::NonSmooth => HardyStatus::OutOfRange,
        Error::Domain(_) | Error::OnBoundary | Error::SingularPoint(_) => HardyStatus::Domain,
        Error::SymmetryViolation { .. } | Error::FactorCheck(_) => HardyStatus::SymmetryViolation,
        Error::DegenerateSamples { .. } => HardyStatus::Degenerate,
        Error::Usage(_) => HardyStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), HardyStatus>) -> HardyStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HardyStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            HardyStatus::Panic
        }
    }
}

fn lift<T>(r: hardy_core::Result<T>) -> Result<T, HardyStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn null(what: &str) -> HardyStatus {
    set_error(format!("null pointer: {what}"));
    HardyStatus::NullPointer
}

fn class_of(c: HardyClass) -> FunctionClass {
    match c {
        HardyClass::General => FunctionClass::General,
        HardyClass::Antisymmetric => FunctionClass::Antisymmetric,
        HardyClass::Odd => FunctionClass::Odd,
    }
}

fn factor_for(class: HardyClass, d: usize) -> hardy_core::Result<AngularFactor> {
    match class {
        HardyClass::General => AngularFactor::unit(d),
        HardyClass::Antisymmetric => AngularFactor::vandermonde(d),
        HardyClass::Odd => AngularFactor::odd_linear(d),
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length, 0 if none.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn hardy_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            // SAFETY: caller guarantees `len` writable bytes at `buf`.
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hardy_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Best constant for `functional` on `class` in dimension `d`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hardy_constant(
    d: usize,
    p: f64,
    gamma: f64,
    class: HardyClass,
    functional: HardyFunctional,
    out: *mut HardyConstant,
) -> HardyStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = lift(Params::new(d, p, gamma, class_of(class)))?;
        let c = lift(match functional {
            HardyFunctional::Hardy => params.hardy_constant(),
            HardyFunctional::Rellich => params.rellich_constant(),
        })?;
        // SAFETY: checked non-null; caller guarantees validity.
        unsafe {
            *out = HardyConstant {
                value: c.value,
                condition_residual: c.condition_residual,
                admissible: c.admissible,
            }
        };
        Ok(())
    })
}

/// `∏_{i<j}(x_j − x_i)` for `x` of length `d ≥ 2`.
///
/// # Safety
/// `x` must point to `d` readable doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hardy_vandermonde_value(x: *const f64, d: usize, out: *mut f64) -> HardyStatus {
    guard(|| {
        if x.is_null() {
            return Err(null("x"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: caller guarantees `d` readable doubles.
        let xs = unsafe { std::slice::from_raw_parts(x, d) };
        let v = lift(vandermonde_value(xs))?;
        // SAFETY: checked non-null.
        unsafe { *out = v };
        Ok(())
    })
}

/// Gradient of the Vandermonde product, written to `grad[0..d]`.
///
/// # Safety
/// `x` must point to `d` readable doubles and `grad` to `d` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hardy_vandermonde_gradient(x: *const f64, d: usize, grad: *mut f64) -> HardyStatus {
    guard(|| {
        if x.is_null() {
            return Err(null("x"));
        }
        if grad.is_null() {
            return Err(null("grad"));
        }
        // SAFETY: caller guarantees `d` readable doubles.
        let xs = unsafe { std::slice::from_raw_parts(x, d) };
        let g = lift(vandermonde_gradient(xs))?;
        // SAFETY: caller guarantees `d` writable doubles.
        unsafe { ptr::copy_nonoverlapping(g.as_ptr(), grad, d) };
        Ok(())
    })
}

/// Numeric max–min of the certificate with the default search settings.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hardy_minimax(
    d: usize,
    p: f64,
    gamma: f64,
    class: HardyClass,
    out: *mut HardyMinimax,
) -> HardyStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = lift(Params::new(d, p, gamma, class_of(class)))?;
        let prob = lift(CertificateProblem::from_params(&params))?;
        let r = lift(numeric_minimax(&prob, &SearchConfig::default()))?;
        // SAFETY: checked non-null.
        unsafe {
            *out = HardyMinimax {
                alpha_star: r.alpha_star,
                beta_star: r.beta_star,
                t_star: r.t_star,
                value_numeric: r.value_numeric,
                value_closed_form: r.value_closed_form,
                gap: r.gap,
                converged: r.converged,
            }
        };
        Ok(())
    })
}

unsafe fn emit_trial(t: TrialFunction, out: *mut *mut HardyTrial) {
    // SAFETY: caller checked `out` non-null.
    unsafe { *out = Box::into_raw(Box::new(HardyTrial { inner: t })) };
}

/// Gaussian trial `F(x) exp(−|x|²/(2σ²))` with `F` chosen by `class`.
///
/// # Safety
/// `out` must be valid for writes; on success it receives a handle to be
/// released with [`hardy_trial_free`].
#[no_mangle]
pub unsafe extern "C" fn hardy_trial_gaussian(
    class: HardyClass,
    d: usize,
    sigma: f64,
    out: *mut *mut HardyTrial,
) -> HardyStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let f = lift(factor_for(class, d))?;
        let t = lift(gaussian_trial(&f, sigma))?;
        // SAFETY: checked non-null.
        unsafe { emit_trial(t, out) };
        Ok(())
    })
}

/// Smoothed near-extremal Rellich family with exponent gap `epsilon` and
/// collar half-width `delta`.
///
/// # Safety
/// As for [`hardy_trial_gaussian`].
#[no_mangle]
pub unsafe extern "C" fn hardy_trial_sharpness(
    class: HardyClass,
    d: usize,
    epsilon: f64,
    delta: f64,
    out: *mut *mut HardyTrial,
) -> HardyStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let f = lift(factor_for(class, d))?;
        let t = lift(sharpness_family(&f, epsilon, delta))?;
        // SAFETY: checked non-null.
        unsafe { emit_trial(t, out) };
        Ok(())
    })
}

/// Releases a trial handle. Null is ignored.
///
/// # Safety
/// `trial` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hardy_trial_free(trial: *mut HardyTrial) {
    if !trial.is_null() {
        // SAFETY: handle came from Box::into_raw.
        drop(unsafe { Box::from_raw(trial) });
    }
}

/// Evaluates the trial at `x[0..d]`; `d` must equal the trial dimension.
///
/// # Safety
/// `trial` must be a live handle, `x` must point to `d` readable doubles and
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hardy_trial_value(
    trial: *const HardyTrial,
    x: *const f64,
    d: usize,
    out: *mut f64,
) -> HardyStatus {
    guard(|| {
        if trial.is_null() {
            return Err(null("trial"));
        }
        if x.is_null() {
            return Err(null("x"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: caller guarantees a live handle.
        let t = unsafe { &(*trial).inner };
        if d != t.dim() {
            set_error(format!(
                "point has {d} coordinates, trial lives in dimension {}",
                t.dim()
            ));
            return Err(HardyStatus::InvalidDimension);
        }
        // SAFETY: caller guarantees `d` readable doubles.
        let xs = unsafe { std::slice::from_raw_parts(x, d) };
        // SAFETY: checked non-null.
        unsafe { *out = t.value(xs) };
        Ok(())
    })
}

/// Rayleigh quotient of `trial` for `functional` at exponent `p` and weight
/// `gamma`. `samples` and `seed` are used by the Monte Carlo method only.
///
/// # Safety
/// `trial` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hardy_trial_quotient(
    trial: *const HardyTrial,
    functional: HardyFunctional,
    p: f64,
    gamma: f64,
    method: HardyMethod,
    samples: u64,
    seed: u64,
    out: *mut HardyQuotient,
) -> HardyStatus {
    guard(|| {
        if trial.is_null() {
            return Err(null("trial"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: caller guarantees a live handle.
        let t = unsafe { &(*trial).inner };
        let params = lift(Params::new(t.dim(), p, gamma, t.class_tag))?;
        let cfg = match method {
            HardyMethod::MonteCarlo => QuadratureConfig::monte_carlo(samples, seed),
            HardyMethod::Product => QuadratureConfig {
                method: Method::RadialAngularProduct,
                ..QuadratureConfig::default()
            },
            HardyMethod::Factorized => QuadratureConfig::factorized(),
        };
        let functional = match functional {
            HardyFunctional::Hardy => Functional::Hardy,
            HardyFunctional::Rellich => Functional::Rellich,
        };
        let r = lift(rayleigh_quotient(t, functional, &params, &cfg))?;
        // SAFETY: checked non-null.
        unsafe {
            *out = HardyQuotient {
                numerator: r.numerator.value,
                numerator_error: r.numerator.error,
                denominator: r.denominator.value,
                denominator_error: r.denominator.error,
                quotient: r.quotient,
                quotient_error: r.quotient_error,
                constant: r.reference_constant,
                margin: r.margin,
                verdict: match r.verdict {
                    Verdict::Holds => 0,
                    Verdict::Inconclusive => 1,
                    Verdict::Violated => 2,
                },
            }
        };
        Ok(())
    })
}
