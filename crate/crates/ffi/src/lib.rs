//! C interface to `fermion-distill`.
//!
//! Covariance matrices live behind opaque `FdCovariance` handles created by
//! the `fd_covariance_*` constructors and released with
//! [`fd_covariance_free`]. Every fallible call returns an [`FdStatus`]; on
//! failure [`fd_last_error`] gives a message for the calling thread.
//! Matrices cross the boundary as row-major `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fermion_distill::linalg::{pfaffian, SkewMatrix};
use fermion_distill::quasifree::{equal_parity_probability, fidelity, BasisProjection};
use fermion_distill::{chain_covariance, run_protocol, ChainSpec, CovarianceMatrix, Error};
use nalgebra::DMatrix;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidCovariance = 3,
    Unsupported = 4,
    Numerical = 5,
    Io = 6,
    Panic = 7,
}

/// Opaque covariance matrix handle.
pub struct FdCovariance(CovarianceMatrix);

/// Result of [`fd_run_protocol`]. `rate` and `rate_per_site` are NaN when
/// not available.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FdReport {
    pub d: usize,
    pub n_keep: usize,
    pub f_plus: f64,
    pub f_minus: f64,
    pub p: f64,
    pub f: f64,
    pub distillable: bool,
    pub rate: f64,
    pub rate_per_site: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> FdStatus {
    match err {
        Error::InvalidCovariance(_) | Error::NotAntisymmetric { .. } | Error::Parse { .. } => FdStatus::InvalidCovariance,
        Error::Unsupported(_) | Error::TooLarge { .. } => FdStatus::Unsupported,
        Error::Numerical(_) => FdStatus::Numerical,
        Error::Io(_) => FdStatus::Io,
        _ => FdStatus::InvalidArgument,
    }
}

/// Runs `f`, recording errors and turning panics into [`FdStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), (FdStatus, String)>) -> FdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FdStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            FdStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (FdStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (FdStatus, String) {
    (FdStatus::NullPointer, format!("{what} is null"))
}

unsafe fn handle<'a>(h: *const FdCovariance) -> Result<&'a CovarianceMatrix, (FdStatus, String)> {
    h.as_ref().map(|c| &c.0).ok_or_else(|| null("handle"))
}

unsafe fn store(out: *mut *mut FdCovariance, s: CovarianceMatrix) {
    *out = Box::into_raw(Box::new(FdCovariance(s)));
}

unsafe fn read_matrix(data: *const f64, n: usize) -> Result<DMatrix<f64>, (FdStatus, String)> {
    if data.is_null() {
        return Err(null("matrix data"));
    }
    let slice = std::slice::from_raw_parts(data, n * n);
    Ok(DMatrix::from_row_slice(n, n, slice))
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a covariance matrix for `d_a + d_b` modes from the row-major
/// `2(d_a+d_b)` square array `m`. The matrix is validated.
///
/// # Safety
/// `m` must point to `(2(d_a+d_b))²` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fd_covariance_new(d_a: usize, d_b: usize, m: *const f64, out: *mut *mut FdCovariance) -> FdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let n = 2 * (d_a + d_b);
        let s = CovarianceMatrix::new(d_a, d_b, read_matrix(m, n)?).map_err(lib_err)?;
        store(out, s);
        Ok(())
    })
}

/// Reads a covariance file in the plain-text format.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fd_covariance_read_file(path: *const c_char, out: *mut *mut FdCovariance) -> FdStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (FdStatus::InvalidArgument, "path is not UTF-8".to_string()))?;
        store(out, CovarianceMatrix::read_file(path).map_err(lib_err)?);
        Ok(())
    })
}

/// Two adjacent `d`-site blocks of the half-filled hopping chain.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fd_covariance_chain(d: usize, out: *mut *mut FdCovariance) -> FdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if d == 0 {
            return Err((FdStatus::InvalidArgument, "d must be positive".into()));
        }
        store(out, chain_covariance(&ChainSpec::new(d)).map_err(lib_err)?);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `h` must come from an `fd_covariance_*` constructor and not be used again.
#[no_mangle]
pub unsafe extern "C" fn fd_covariance_free(h: *mut FdCovariance) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Mode counts of Alice and Bob.
///
/// # Safety
/// `h` must be a live handle; `d_a`, `d_b` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fd_covariance_modes(h: *const FdCovariance, d_a: *mut usize, d_b: *mut usize) -> FdStatus {
    guard(|| {
        let s = handle(h)?;
        if d_a.is_null() || d_b.is_null() {
            return Err(null("output"));
        }
        *d_a = s.d_a();
        *d_b = s.d_b();
        Ok(())
    })
}

/// Copies the matrix into `buf` (row-major). `len` is the capacity in doubles
/// and must be at least `(2(d_a+d_b))²`.
///
/// # Safety
/// `h` must be a live handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fd_covariance_matrix(h: *const FdCovariance, buf: *mut f64, len: usize) -> FdStatus {
    guard(|| {
        let s = handle(h)?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let n = s.dim();
        if len < n * n {
            return Err((FdStatus::InvalidArgument, format!("buffer holds {len} values, need {}", n * n)));
        }
        let out = std::slice::from_raw_parts_mut(buf, n * n);
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = s.m()[(i, j)];
            }
        }
        Ok(())
    })
}

/// Probability that Alice's and Bob's local parities agree.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fd_equal_parity_probability(h: *const FdCovariance, out: *mut f64) -> FdStatus {
    guard(|| {
        let s = handle(h)?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = equal_parity_probability(s).map_err(lib_err)?;
        Ok(())
    })
}

/// Fidelity with the standard maximally entangled pure state. Needs
/// `d_a == d_b`.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fd_standard_fidelity(h: *const FdCovariance, out: *mut f64) -> FdStatus {
    guard(|| {
        let s = handle(h)?;
        if out.is_null() {
            return Err(null("out"));
        }
        if s.d_a() != s.d_b() {
            return Err((FdStatus::InvalidArgument, "fidelity needs d_a == d_b".into()));
        }
        *out = fidelity(s, &BasisProjection::standard(s.d_a())).map_err(lib_err)?;
        Ok(())
    })
}

/// Runs the distillation protocol keeping `n_keep` modes per side.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fd_run_protocol(
    h: *const FdCovariance,
    n_keep: usize,
    conservative_p: bool,
    out: *mut FdReport,
) -> FdStatus {
    guard(|| {
        let s = handle(h)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let r = run_protocol(s, n_keep, conservative_p).map_err(lib_err)?;
        *out = FdReport {
            d: r.d,
            n_keep: r.n_keep,
            f_plus: r.f_plus,
            f_minus: r.f_minus,
            p: r.p,
            f: r.f,
            distillable: r.distillable,
            rate: r.rate.unwrap_or(f64::NAN),
            rate_per_site: r.rate.map_or(f64::NAN, |x| x / r.d as f64),
        };
        Ok(())
    })
}

/// Pfaffian of the real antisymmetric `n × n` row-major matrix `a`.
///
/// # Safety
/// `a` must point to `n²` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fd_pfaffian(n: usize, a: *const f64, out: *mut f64) -> FdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let skew = SkewMatrix::new(read_matrix(a, n)?).map_err(lib_err)?;
        *out = pfaffian(&skew);
        Ok(())
    })
}
