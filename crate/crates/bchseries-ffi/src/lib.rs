//! C ABI for the truncation engine.
//!
//! The engine lives behind an opaque handle; every function returns a status
//! code and writes results through caller-provided buffers. Matrices are
//! dense row-major `dim * dim` arrays split into real and imaginary parts;
//! imaginary input pointers may be null for real matrices. A thread-local
//! message describing the most recent failure is available through
//! [`bch_last_error_message`].
//!
//! The header `include/bchseries.h` is regenerated at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bchseries::coeffs::CoeffTable;
use bchseries::matops::BchEngine;
use bchseries::oracle::direct_z;
use bchseries::{CMatrix, Error, C64};

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BchStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Sizes, orders, or values outside the documented domain.
    InvalidInput = 2,
    /// A sinh factor sat on a singularity that no fallback could remove.
    SingularInput = 3,
    /// Defective matrix, branch cut, or other numerical failure.
    NumericalFailure = 4,
    /// The call panicked; state is unchanged.
    Panic = 5,
}

/// Opaque truncation engine.
pub struct BchEngineHandle {
    inner: BchEngine,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> BchStatus {
    set_error(&err.to_string());
    match err {
        Error::Singular { .. } | Error::Degenerate { .. } => BchStatus::SingularInput,
        e if e.is_input_error() => BchStatus::InvalidInput,
        _ => BchStatus::NumericalFailure,
    }
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bch_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn bch_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Create an engine with explicit thresholds: `delta` guards sinh factors
/// against (removable) singularities, `epsilon` scales the perturbation of
/// the degeneracy fallback. Returns null on invalid parameters.
#[no_mangle]
pub extern "C" fn bch_engine_new(delta: f64, epsilon: f64) -> *mut BchEngineHandle {
    match BchEngine::new(delta, epsilon) {
        Ok(inner) => Box::into_raw(Box::new(BchEngineHandle { inner })),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Create an engine with the default thresholds.
#[no_mangle]
pub extern "C" fn bch_engine_new_default() -> *mut BchEngineHandle {
    Box::into_raw(Box::new(BchEngineHandle {
        inner: BchEngine::default(),
    }))
}

/// Destroy an engine created by [`bch_engine_new`]. Null is ignored.
///
/// # Safety
/// `engine` must be a pointer previously returned by an engine constructor
/// and not freed since.
#[no_mangle]
pub unsafe extern "C" fn bch_engine_free(engine: *mut BchEngineHandle) {
    if !engine.is_null() {
        drop(unsafe { Box::from_raw(engine) });
    }
}

/// Caller-supplied dimensions above this are rejected before any buffer is
/// touched.
pub const BCH_MAX_DIM: usize = 256;

unsafe fn read_matrix(dim: usize, re: *const f64, im: *const f64) -> Option<CMatrix> {
    if re.is_null() {
        return None;
    }
    let n = dim * dim;
    let re_slice = unsafe { std::slice::from_raw_parts(re, n) };
    let im_slice = if im.is_null() {
        None
    } else {
        Some(unsafe { std::slice::from_raw_parts(im, n) })
    };
    Some(CMatrix::from_fn(dim, dim, |i, j| {
        let k = i * dim + j;
        C64::new(re_slice[k], im_slice.map_or(0.0, |s| s[k]))
    }))
}

unsafe fn write_matrix(m: &CMatrix, re: *mut f64, im: *mut f64) {
    let d = m.nrows();
    for i in 0..d {
        for j in 0..d {
            let k = i * d + j;
            unsafe {
                *re.add(k) = m[(i, j)].re;
                if !im.is_null() {
                    *im.add(k) = m[(i, j)].im;
                }
            }
        }
    }
}

fn guarded(f: impl FnOnce() -> BchStatus) -> BchStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            BchStatus::Panic
        }
    }
}

/// Truncated series `Z_N` of `log(e^A e^{2B} e^A)`.
///
/// Inputs: row-major `dim * dim` matrices (`a_im`/`b_im` may be null).
/// Outputs: `z_re`/`z_im` (`dim * dim`, `z_im` may be null to drop the
/// imaginary part), optional `term_norms` (length `order`) and an optional
/// fallback-evaluation counter.
///
/// # Safety
/// All non-null pointers must reference buffers of the documented lengths.
#[no_mangle]
pub unsafe extern "C" fn bch_truncated(
    engine: *const BchEngineHandle,
    dim: usize,
    a_re: *const f64,
    a_im: *const f64,
    b_re: *const f64,
    b_im: *const f64,
    order: usize,
    z_re: *mut f64,
    z_im: *mut f64,
    term_norms: *mut f64,
    fallback_count: *mut usize,
) -> BchStatus {
    guarded(|| {
        if engine.is_null() || z_re.is_null() {
            set_error("null engine or output buffer");
            return BchStatus::NullArgument;
        }
        if dim == 0 || dim > BCH_MAX_DIM {
            set_error("dimension out of range");
            return BchStatus::InvalidInput;
        }
        let engine = unsafe { &*engine };
        let (Some(a), Some(b)) = (unsafe { read_matrix(dim, a_re, a_im) }, unsafe {
            read_matrix(dim, b_re, b_im)
        }) else {
            set_error("null matrix input");
            return BchStatus::NullArgument;
        };
        match engine.inner.bch_truncated(&a, &b, order) {
            Ok(report) => {
                unsafe { write_matrix(&report.z, z_re, z_im) };
                if !term_norms.is_null() {
                    for (k, &n) in report.term_norms.iter().enumerate() {
                        unsafe { *term_norms.add(k) = n };
                    }
                }
                if !fallback_count.is_null() {
                    unsafe { *fallback_count = report.fallback_count };
                }
                BchStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Direct evaluation of `log(e^A e^{2B} e^A)` through the matrix exponential
/// and principal logarithm; the slow reference for [`bch_truncated`].
///
/// # Safety
/// All non-null pointers must reference buffers of the documented lengths.
#[no_mangle]
pub unsafe extern "C" fn bch_direct_log(
    dim: usize,
    a_re: *const f64,
    a_im: *const f64,
    b_re: *const f64,
    b_im: *const f64,
    z_re: *mut f64,
    z_im: *mut f64,
) -> BchStatus {
    guarded(|| {
        if z_re.is_null() {
            set_error("null output buffer");
            return BchStatus::NullArgument;
        }
        if dim == 0 || dim > BCH_MAX_DIM {
            set_error("dimension out of range");
            return BchStatus::InvalidInput;
        }
        let (Some(a), Some(b)) = (unsafe { read_matrix(dim, a_re, a_im) }, unsafe {
            read_matrix(dim, b_re, b_im)
        }) else {
            set_error("null matrix input");
            return BchStatus::NullArgument;
        };
        match direct_z(&a, &b) {
            Ok(z) => {
                unsafe { write_matrix(&z, z_re, z_im) };
                BchStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Order-`order` scalar series coefficient on one eigenvalue tuple
/// (`order + 1` values). Degenerate tuples are an error here; the matrix
/// engine, not the caller, owns the fallback policy.
///
/// # Safety
/// `eigs_re` (and `eigs_im` when non-null) must hold `order + 1` values.
#[no_mangle]
pub unsafe extern "C" fn bch_g_coefficient(
    engine: *const BchEngineHandle,
    order: usize,
    eigs_re: *const f64,
    eigs_im: *const f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> BchStatus {
    guarded(|| {
        if engine.is_null() || eigs_re.is_null() || out_re.is_null() || out_im.is_null() {
            set_error("null argument");
            return BchStatus::NullArgument;
        }
        let engine = unsafe { &*engine };
        let n = order + 1;
        let re = unsafe { std::slice::from_raw_parts(eigs_re, n) };
        let eigs: Vec<C64> = (0..n)
            .map(|k| {
                let im = if eigs_im.is_null() {
                    0.0
                } else {
                    unsafe { *eigs_im.add(k) }
                };
                C64::new(re[k], im)
            })
            .collect();
        match engine.inner.coeffs().g_coefficient(order, &eigs) {
            Ok(v) => {
                unsafe {
                    *out_re = v.re;
                    *out_im = v.im;
                }
                BchStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Taylor coefficients of tanh at 0, `t_0..t_{k_max}`, as doubles.
///
/// # Safety
/// `out` must hold `k_max + 1` doubles.
#[no_mangle]
pub unsafe extern "C" fn bch_tanh_coefficients(k_max: usize, out: *mut f64) -> BchStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output buffer");
            return BchStatus::NullArgument;
        }
        match CoeffTable::new(k_max) {
            Ok(table) => {
                for k in 0..=k_max {
                    unsafe { *out.add(k) = table.t_f64(k) };
                }
                BchStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    #[test]
    fn engine_lifecycle_and_truncation() {
        let engine = bch_engine_new_default();
        assert!(!engine.is_null());

        let dim = 2usize;
        let a = [0.3, 0.0, 0.0, -0.4];
        let b = [0.0, 0.1, 0.2, 0.0];
        let mut z_re = [0.0f64; 4];
        let mut z_im = [0.0f64; 4];
        let mut norms = [0.0f64; 3];
        let mut fallbacks = 0usize;
        let status = unsafe {
            bch_truncated(
                engine,
                dim,
                a.as_ptr(),
                ptr::null(),
                b.as_ptr(),
                ptr::null(),
                3,
                z_re.as_mut_ptr(),
                z_im.as_mut_ptr(),
                norms.as_mut_ptr(),
                &mut fallbacks,
            )
        };
        assert_eq!(status, BchStatus::Ok);

        // cross-check against the direct route
        let mut d_re = [0.0f64; 4];
        let mut d_im = [0.0f64; 4];
        let status = unsafe {
            bch_direct_log(
                dim,
                a.as_ptr(),
                ptr::null(),
                b.as_ptr(),
                ptr::null(),
                d_re.as_mut_ptr(),
                d_im.as_mut_ptr(),
            )
        };
        assert_eq!(status, BchStatus::Ok);
        for k in 0..4 {
            assert!((z_re[k] - d_re[k]).abs() < 2e-4, "entry {k}");
        }
        assert!(norms[0] > 0.0);

        unsafe { bch_engine_free(engine) };
    }

    #[test]
    fn null_arguments_are_rejected() {
        let status = unsafe {
            bch_truncated(
                ptr::null(),
                2,
                ptr::null(),
                ptr::null(),
                ptr::null(),
                ptr::null(),
                1,
                ptr::null_mut(),
                ptr::null_mut(),
                ptr::null_mut(),
                ptr::null_mut(),
            )
        };
        assert_eq!(status, BchStatus::NullArgument);
    }

    #[test]
    fn invalid_order_reports_input_error() {
        let engine = bch_engine_new_default();
        let a = [0.0f64; 4];
        let mut z = [0.0f64; 4];
        let status = unsafe {
            bch_truncated(
                engine,
                2,
                a.as_ptr(),
                ptr::null(),
                a.as_ptr(),
                ptr::null(),
                9,
                z.as_mut_ptr(),
                ptr::null_mut(),
                ptr::null_mut(),
                ptr::null_mut(),
            )
        };
        assert_eq!(status, BchStatus::InvalidInput);
        let msg = unsafe { CStr::from_ptr(bch_last_error_message()) };
        assert!(msg.to_string_lossy().contains("order"));
        unsafe { bch_engine_free(engine) };
    }

    #[test]
    fn defective_matrix_reports_numerical_failure() {
        let engine = bch_engine_new_default();
        let a = [0.0, 1.0, 0.0, 0.0];
        let b = [0.1, 0.0, 0.0, 0.2];
        let mut z = [0.0f64; 4];
        let status = unsafe {
            bch_truncated(
                engine,
                2,
                a.as_ptr(),
                ptr::null(),
                b.as_ptr(),
                ptr::null(),
                2,
                z.as_mut_ptr(),
                ptr::null_mut(),
                ptr::null_mut(),
                ptr::null_mut(),
            )
        };
        assert_eq!(status, BchStatus::NumericalFailure);
        unsafe { bch_engine_free(engine) };
    }

    #[test]
    fn g_coefficient_order_one() {
        let engine = bch_engine_new_default();
        let eigs_re = [0.6, -0.2];
        let mut out_re = 0.0;
        let mut out_im = 0.0;
        let status = unsafe {
            bch_g_coefficient(
                engine,
                1,
                eigs_re.as_ptr(),
                ptr::null(),
                &mut out_re,
                &mut out_im,
            )
        };
        assert_eq!(status, BchStatus::Ok);
        let x = 0.8f64;
        assert!((out_re - 2.0 * x / x.sinh()).abs() < 1e-12);
        assert_eq!(out_im, 0.0);

        // coincident tuple: degenerate at this level
        let eigs_re = [0.5, 0.5];
        let status = unsafe {
            bch_g_coefficient(
                engine,
                1,
                eigs_re.as_ptr(),
                ptr::null(),
                &mut out_re,
                &mut out_im,
            )
        };
        assert_eq!(status, BchStatus::SingularInput);
        unsafe { bch_engine_free(engine) };
    }

    #[test]
    fn tanh_coefficients_match_table() {
        let mut out = [0.0f64; 8];
        let status = unsafe { bch_tanh_coefficients(7, out.as_mut_ptr()) };
        assert_eq!(status, BchStatus::Ok);
        assert_eq!(out[0], 0.0);
        assert_eq!(out[1], 1.0);
        assert!((out[3] + 1.0 / 3.0).abs() < 1e-16);
        assert!((out[7] + 17.0 / 315.0).abs() < 1e-16);
    }

    #[test]
    fn version_is_a_c_string() {
        let v = unsafe { CStr::from_ptr(bch_version()) };
        assert!(!v.to_string_lossy().is_empty());
    }
}
