//! C ABI over the `reskit` solvers.
//!
//! Objects cross the boundary as opaque handles that the caller releases
//! with the matching `*_free` function. Every fallible function returns a
//! [`ReskitStatus`]; on failure a message is available from
//! [`reskit_last_error`] on the same thread. Strings returned through
//! `char **` out-parameters are owned by the caller and released with
//! [`reskit_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use reskit::cli::{exit_code, solve_config, EXIT_CONFIG, EXIT_IO, EXIT_SOLVER};
use reskit::config::RunConfig;
use reskit::methods::{BoundKind, Certificate};
use reskit::stability::{lab_csv, lebesgue_constant, stability_lab, LabFamily, Oversampling};

/// Result codes. The non-zero codes 2 to 4 match the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReskitStatus {
    Ok = 0,
    InvalidArgument = 1,
    ConfigInvalid = 2,
    SolverFailure = 3,
    Io = 4,
    Panic = 5,
    NullPointer = 6,
}

/// Node family selectors for [`reskit_stability_lab_csv`].
pub const RESKIT_FAMILY_EQUIDISTANT: u32 = 0;
pub const RESKIT_FAMILY_CHEBYSHEV: u32 = 1;

/// Oversampling selectors for [`reskit_stability_lab_csv`].
pub const RESKIT_OVERSAMPLING_NONE: u32 = 0;
pub const RESKIT_OVERSAMPLING_PI: u32 = 1;
pub const RESKIT_OVERSAMPLING_MSQUARED: u32 = 2;

/// Parsed run configuration.
pub struct ReskitConfig {
    inner: RunConfig,
}

/// Certificate produced by [`reskit_solve`].
pub struct ReskitCertificate {
    inner: Certificate,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    let c = CString::new(text).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn fail(status: ReskitStatus, msg: impl Into<String>) -> ReskitStatus {
    set_error(msg);
    status
}

fn from_error(err: &reskit::Error) -> ReskitStatus {
    let status = match exit_code(err) {
        EXIT_CONFIG => ReskitStatus::ConfigInvalid,
        EXIT_IO => ReskitStatus::Io,
        EXIT_SOLVER => ReskitStatus::SolverFailure,
        _ => ReskitStatus::InvalidArgument,
    };
    fail(status, err.to_string())
}

/// Runs `f`, turning panics into [`ReskitStatus::Panic`].
fn guard(f: impl FnOnce() -> ReskitStatus) -> ReskitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            fail(ReskitStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

fn into_c_string(text: String, out: *mut *mut c_char) -> ReskitStatus {
    match CString::new(text) {
        Ok(c) => {
            // SAFETY: the caller checked `out` for null.
            unsafe { *out = c.into_raw() };
            ReskitStatus::Ok
        }
        Err(_) => fail(ReskitStatus::InvalidArgument, "string contains an interior NUL"),
    }
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn reskit_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |c| c.as_ptr())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn reskit_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a JSON run configuration. On success `*out` receives a handle
/// to release with [`reskit_config_free`].
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn reskit_config_from_json(
    json: *const c_char,
    out: *mut *mut ReskitConfig,
) -> ReskitStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return fail(ReskitStatus::NullPointer, "null argument");
        }
        let text = match unsafe { CStr::from_ptr(json) }.to_str() {
            Ok(t) => t,
            Err(_) => return fail(ReskitStatus::InvalidArgument, "config is not UTF-8"),
        };
        match RunConfig::from_json(text) {
            Ok(inner) => {
                unsafe { *out = Box::into_raw(Box::new(ReskitConfig { inner })) };
                ReskitStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Releases a configuration. Null is ignored.
///
/// # Safety
/// `cfg` must come from [`reskit_config_from_json`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn reskit_config_free(cfg: *mut ReskitConfig) {
    if !cfg.is_null() {
        drop(unsafe { Box::from_raw(cfg) });
    }
}

/// Runs the configured method. Nothing is written to disk; the output
/// block of the configuration is ignored.
///
/// # Safety
/// `cfg` must be a live configuration handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn reskit_solve(
    cfg: *const ReskitConfig,
    out: *mut *mut ReskitCertificate,
) -> ReskitStatus {
    guard(|| {
        if cfg.is_null() || out.is_null() {
            return fail(ReskitStatus::NullPointer, "null argument");
        }
        let cfg = unsafe { &*cfg };
        match solve_config(&cfg.inner) {
            Ok(o) => {
                let cert = ReskitCertificate {
                    inner: o.certificate,
                };
                unsafe { *out = Box::into_raw(Box::new(cert)) };
                ReskitStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Releases a certificate. Null is ignored.
///
/// # Safety
/// `cert` must come from [`reskit_solve`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn reskit_certificate_free(cert: *mut ReskitCertificate) {
    if !cert.is_null() {
        drop(unsafe { Box::from_raw(cert) });
    }
}

unsafe fn with_cert<T>(
    cert: *const ReskitCertificate,
    out: *mut T,
    f: impl FnOnce(&Certificate) -> Option<T>,
) -> ReskitStatus {
    guard(|| {
        if cert.is_null() || out.is_null() {
            return fail(ReskitStatus::NullPointer, "null argument");
        }
        match f(unsafe { &(*cert).inner }) {
            Some(v) => {
                unsafe { out.write(v) };
                ReskitStatus::Ok
            }
            None => fail(ReskitStatus::InvalidArgument, "field not present in certificate"),
        }
    })
}

/// A-posteriori bound. `*max_principle` is 1 when the value bounds the
/// sup-norm error, 0 when it is a residual only.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn reskit_certificate_bound(
    cert: *const ReskitCertificate,
    value: *mut f64,
    max_principle: *mut i32,
) -> ReskitStatus {
    if max_principle.is_null() {
        return fail(ReskitStatus::NullPointer, "null argument");
    }
    unsafe {
        with_cert(cert, value, |c| {
            *max_principle = i32::from(c.bound.kind == BoundKind::MaxPrinciple);
            Some(c.bound.value)
        })
    }
}

/// Combined fine-grid residual.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn reskit_certificate_combined_residual(
    cert: *const ReskitCertificate,
    out: *mut f64,
) -> ReskitStatus {
    unsafe { with_cert(cert, out, |c| Some(c.residual.combined)) }
}

/// Trial space dimension.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn reskit_certificate_dimension(
    cert: *const ReskitCertificate,
    out: *mut usize,
) -> ReskitStatus {
    unsafe { with_cert(cert, out, |c| Some(c.m)) }
}

/// Fine-grid sup error against the manufactured solution.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn reskit_certificate_true_error(
    cert: *const ReskitCertificate,
    out: *mut f64,
) -> ReskitStatus {
    unsafe { with_cert(cert, out, |c| c.truth.as_ref().map(|t| t.sup_error)) }
}

/// Certificate as pretty-printed JSON.
///
/// # Safety
/// All pointers must be valid; release `*out` with [`reskit_string_free`].
#[no_mangle]
pub unsafe extern "C" fn reskit_certificate_to_json(
    cert: *const ReskitCertificate,
    out: *mut *mut c_char,
) -> ReskitStatus {
    guard(|| {
        if cert.is_null() || out.is_null() {
            return fail(ReskitStatus::NullPointer, "null argument");
        }
        match unsafe { &(*cert).inner }.to_json() {
            Ok(s) => into_c_string(s, out),
            Err(e) => fail(ReskitStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used again.
#[no_mangle]
pub unsafe extern "C" fn reskit_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Lebesgue constant of `n` distinct nodes in `[-1, 1]`, maximised over
/// `fine_points` equidistant points.
///
/// # Safety
/// `nodes` must point to `n` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn reskit_lebesgue_constant(
    nodes: *const f64,
    n: usize,
    fine_points: usize,
    out: *mut f64,
) -> ReskitStatus {
    guard(|| {
        if nodes.is_null() || out.is_null() {
            return fail(ReskitStatus::NullPointer, "null argument");
        }
        if n == 0 || fine_points < 2 {
            return fail(
                ReskitStatus::InvalidArgument,
                "need at least one node and two fine points",
            );
        }
        let nodes = unsafe { std::slice::from_raw_parts(nodes, n) };
        let fine = match reskit::geometry::equidistant_nodes(fine_points) {
            Ok(f) => f,
            Err(e) => return from_error(&e),
        };
        match lebesgue_constant(nodes, &fine) {
            Ok(v) => {
                unsafe { *out = v };
                ReskitStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Stability-lab table as CSV text.
///
/// # Safety
/// `orders` must point to `n_orders` values and `out` must be valid;
/// release `*out` with [`reskit_string_free`].
#[no_mangle]
pub unsafe extern "C" fn reskit_stability_lab_csv(
    family: u32,
    oversampling: u32,
    orders: *const usize,
    n_orders: usize,
    out: *mut *mut c_char,
) -> ReskitStatus {
    guard(|| {
        if orders.is_null() || out.is_null() {
            return fail(ReskitStatus::NullPointer, "null argument");
        }
        let family = match family {
            RESKIT_FAMILY_EQUIDISTANT => LabFamily::Equidistant,
            RESKIT_FAMILY_CHEBYSHEV => LabFamily::Chebyshev,
            other => return fail(ReskitStatus::InvalidArgument, format!("unknown family {other}")),
        };
        let oversampling = match oversampling {
            RESKIT_OVERSAMPLING_NONE => Oversampling::None,
            RESKIT_OVERSAMPLING_PI => Oversampling::PiM,
            RESKIT_OVERSAMPLING_MSQUARED => Oversampling::MSquared,
            other => {
                return fail(
                    ReskitStatus::InvalidArgument,
                    format!("unknown oversampling rule {other}"),
                )
            }
        };
        let orders = unsafe { std::slice::from_raw_parts(orders, n_orders) };
        match stability_lab(family, orders, oversampling) {
            Ok(reports) => into_c_string(lab_csv(&reports), out),
            Err(e) => from_error(&e),
        }
    })
}
