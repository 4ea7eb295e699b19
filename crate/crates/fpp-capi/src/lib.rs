//! C ABI over the fpp library: opaque handles, plain-struct results, and
//! integer status codes. Every entry point catches panics and never unwinds
//! across the FFI boundary.
//!
//! The generated header lives at `include/fpp.h` and is regenerated on every
//! build by `build.rs`.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use fpp::enumerate::{self, EventSpec, DEFAULT_ENUMERATION_CAP};
use fpp::estimate;
use fpp::lattice::{BoxGeometry, Configuration, RandomPlan};
use fpp::passage;

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FppStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    CapExceeded = 3,
    Unreachable = 4,
    /// A mathematical verification failed; indicates a library bug.
    VerificationFailed = 5,
    InternalError = 6,
}

/// Opaque box geometry handle.
pub struct FppGeometry {
    inner: Arc<BoxGeometry>,
}

/// Opaque configuration handle.
pub struct FppConfiguration {
    inner: Configuration,
}

/// One Monte Carlo estimate of the time constant.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FppEstimate {
    pub p: f64,
    pub n: usize,
    pub replicates: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub standard_error: f64,
    pub ci_half_width: f64,
    pub seed: u64,
}

static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!("fpp ", env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
    Ok(s) => s,
    Err(_) => panic!("version string contains a NUL"),
};

/// Artifact name and version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fpp_version() -> *const c_char {
    VERSION.as_ptr()
}

/// Static human-readable description of a status code.
#[no_mangle]
pub extern "C" fn fpp_status_message(status: FppStatus) -> *const c_char {
    let msg: &CStr = match status {
        FppStatus::Ok => c"ok",
        FppStatus::NullPointer => c"null pointer argument",
        FppStatus::InvalidArgument => c"invalid argument",
        FppStatus::CapExceeded => c"geometry exceeds the enumeration cap",
        FppStatus::Unreachable => c"targets unreachable within the domain",
        FppStatus::VerificationFailed => c"mathematical verification failed",
        FppStatus::InternalError => c"internal error",
    };
    msg.as_ptr()
}

fn guarded(f: impl FnOnce() -> FppStatus) -> FppStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(FppStatus::InternalError)
}

/// Build the standard box `[0, n]^d`. On success stores a new handle in
/// `out`; release it with `fpp_geometry_free`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fpp_geometry_new(
    d: usize,
    n: usize,
    out: *mut *mut FppGeometry,
) -> FppStatus {
    if out.is_null() {
        return FppStatus::NullPointer;
    }
    guarded(|| match BoxGeometry::standard(d, n) {
        Ok(geo) => {
            let handle = Box::new(FppGeometry {
                inner: Arc::new(geo),
            });
            unsafe { *out = Box::into_raw(handle) };
            FppStatus::Ok
        }
        Err(_) => FppStatus::InvalidArgument,
    })
}

/// Release a geometry handle. Null is a no-op.
///
/// # Safety
/// `geometry` must have come from `fpp_geometry_new` and not been freed.
#[no_mangle]
pub unsafe extern "C" fn fpp_geometry_free(geometry: *mut FppGeometry) {
    if !geometry.is_null() {
        drop(unsafe { Box::from_raw(geometry) });
    }
}

/// Vertex and edge counts of a geometry. Either out pointer may be null.
///
/// # Safety
/// `geometry` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fpp_geometry_counts(
    geometry: *const FppGeometry,
    vertices: *mut usize,
    edges: *mut usize,
) -> FppStatus {
    let Some(geometry) = (unsafe { geometry.as_ref() }) else {
        return FppStatus::NullPointer;
    };
    if let Some(v) = unsafe { vertices.as_mut() } {
        *v = geometry.inner.vertex_count();
    }
    if let Some(e) = unsafe { edges.as_mut() } {
        *e = geometry.inner.edge_count();
    }
    FppStatus::Ok
}

/// Sample a configuration: each edge gets time 0 with probability `p`,
/// deterministically in `(seed, replicate)`.
///
/// # Safety
/// `geometry` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fpp_configuration_sample(
    geometry: *const FppGeometry,
    p: f64,
    seed: u64,
    replicate: u64,
    out: *mut *mut FppConfiguration,
) -> FppStatus {
    let Some(geometry) = (unsafe { geometry.as_ref() }) else {
        return FppStatus::NullPointer;
    };
    if out.is_null() {
        return FppStatus::NullPointer;
    }
    guarded(|| {
        match Configuration::sample(
            Arc::clone(&geometry.inner),
            p,
            RandomPlan::new(seed, replicate),
        ) {
            Ok(cfg) => {
                let handle = Box::new(FppConfiguration { inner: cfg });
                unsafe { *out = Box::into_raw(handle) };
                FppStatus::Ok
            }
            Err(_) => FppStatus::InvalidArgument,
        }
    })
}

/// Release a configuration handle. Null is a no-op.
///
/// # Safety
/// `configuration` must have come from this library and not been freed.
#[no_mangle]
pub unsafe extern "C" fn fpp_configuration_free(configuration: *mut FppConfiguration) {
    if !configuration.is_null() {
        drop(unsafe { Box::from_raw(configuration) });
    }
}

/// Passage time (0 or 1) of one edge.
///
/// # Safety
/// `configuration` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fpp_configuration_time(
    configuration: *const FppConfiguration,
    edge: usize,
    out: *mut u8,
) -> FppStatus {
    let Some(configuration) = (unsafe { configuration.as_ref() }) else {
        return FppStatus::NullPointer;
    };
    if out.is_null() {
        return FppStatus::NullPointer;
    }
    if edge >= configuration.inner.times().len() {
        return FppStatus::InvalidArgument;
    }
    unsafe { *out = configuration.inner.time(edge) };
    FppStatus::Ok
}

/// Flip the passage time of one edge in place.
///
/// # Safety
/// `configuration` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fpp_configuration_flip(
    configuration: *mut FppConfiguration,
    edge: usize,
) -> FppStatus {
    let Some(configuration) = (unsafe { configuration.as_mut() }) else {
        return FppStatus::NullPointer;
    };
    guarded(|| match configuration.inner.flip(edge) {
        Ok(flipped) => {
            configuration.inner = flipped;
            FppStatus::Ok
        }
        Err(_) => FppStatus::InvalidArgument,
    })
}

/// Box-crossing time of a configuration.
///
/// # Safety
/// `configuration` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fpp_phi(
    configuration: *const FppConfiguration,
    out: *mut u32,
) -> FppStatus {
    let Some(configuration) = (unsafe { configuration.as_ref() }) else {
        return FppStatus::NullPointer;
    };
    if out.is_null() {
        return FppStatus::NullPointer;
    }
    guarded(|| {
        unsafe { *out = passage::phi(&configuration.inner) };
        FppStatus::Ok
    })
}

/// Number of pivotal edges of the event `{phi >= k}` at a configuration.
///
/// # Safety
/// `configuration` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fpp_pivotal_count(
    configuration: *const FppConfiguration,
    k: u32,
    out: *mut usize,
) -> FppStatus {
    let Some(configuration) = (unsafe { configuration.as_ref() }) else {
        return FppStatus::NullPointer;
    };
    if out.is_null() {
        return FppStatus::NullPointer;
    }
    guarded(|| {
        let pivotal = enumerate::pivotal_edges(&EventSpec::phi_at_least(k), &configuration.inner);
        unsafe { *out = pivotal.len() };
        FppStatus::Ok
    })
}

/// Monte Carlo estimate of the time constant; fills `out`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fpp_estimate_mu(
    d: usize,
    n: usize,
    p: f64,
    replicates: usize,
    seed: u64,
    out: *mut FppEstimate,
) -> FppStatus {
    if out.is_null() {
        return FppStatus::NullPointer;
    }
    guarded(|| match estimate::estimate_mu(d, n, p, replicates, seed) {
        Ok(rec) => {
            unsafe {
                *out = FppEstimate {
                    p: rec.p,
                    n: rec.n,
                    replicates: rec.replicates,
                    mean: rec.mean,
                    std_dev: rec.std_dev,
                    standard_error: rec.std_err,
                    ci_half_width: rec.ci_half_width,
                    seed: rec.seed,
                };
            }
            FppStatus::Ok
        }
        Err(_) => FppStatus::InvalidArgument,
    })
}

fn enumerate_status(err: &enumerate::EnumerateError) -> FppStatus {
    match err {
        enumerate::EnumerateError::CapExceeded { .. } => FppStatus::CapExceeded,
        enumerate::EnumerateError::NotIncreasing { .. } => FppStatus::VerificationFailed,
        _ => FppStatus::InvalidArgument,
    }
}

/// Exactly verify the derivative identity for `{phi >= k}` on `[0, n]^d`.
/// Returns `Ok` when the identity holds coefficient by coefficient.
#[no_mangle]
pub extern "C" fn fpp_verify_russo(d: usize, n: usize, k: u32, cap: usize) -> FppStatus {
    let cap = if cap == 0 { DEFAULT_ENUMERATION_CAP } else { cap };
    guarded(|| {
        let geo = match BoxGeometry::standard(d, n) {
            Ok(geo) => geo,
            Err(_) => return FppStatus::InvalidArgument,
        };
        match enumerate::verify_russo(&geo, &EventSpec::phi_at_least(k), cap) {
            Ok(report) if report.holds() => FppStatus::Ok,
            Ok(_) => FppStatus::VerificationFailed,
            Err(err) => enumerate_status(&err),
        }
    })
}

/// Exactly verify the pointwise pivotal bounds for `{phi >= k}`.
#[no_mangle]
pub extern "C" fn fpp_verify_pivotal_bounds(d: usize, n: usize, k: u32, cap: usize) -> FppStatus {
    let cap = if cap == 0 { DEFAULT_ENUMERATION_CAP } else { cap };
    guarded(|| {
        let geo = match BoxGeometry::standard(d, n) {
            Ok(geo) => geo,
            Err(_) => return FppStatus::InvalidArgument,
        };
        match enumerate::verify_pivotal_bounds(&geo, k, cap) {
            Ok(report) if report.holds() => FppStatus::Ok,
            Ok(_) => FppStatus::VerificationFailed,
            Err(err) => enumerate_status(&err),
        }
    })
}

/// Exactly verify that `E[phi] / (1 - p)` is non-increasing on a grid of
/// `grid_points` rationals in `[0, 999/1000]`.
#[no_mangle]
pub extern "C" fn fpp_verify_monotonicity(
    d: usize,
    n: usize,
    grid_points: usize,
    cap: usize,
) -> FppStatus {
    let cap = if cap == 0 { DEFAULT_ENUMERATION_CAP } else { cap };
    if grid_points == 0 {
        return FppStatus::InvalidArgument;
    }
    guarded(|| {
        let geo = match BoxGeometry::standard(d, n) {
            Ok(geo) => geo,
            Err(_) => return FppStatus::InvalidArgument,
        };
        let grid = enumerate::default_grid(grid_points);
        match enumerate::verify_finite_n_monotonicity(&geo, &grid, cap) {
            Ok(report) if report.holds() => FppStatus::Ok,
            Ok(_) => FppStatus::VerificationFailed,
            Err(err) => enumerate_status(&err),
        }
    })
}
