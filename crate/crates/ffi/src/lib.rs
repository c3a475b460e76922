//! C ABI for `beztopo`.
//!
//! Objects are opaque handles created by `bzt_*_new`/`bzt_*_load` and
//! released with the matching `bzt_*_free`. Every fallible call returns a
//! [`BztStatus`]; on failure `bzt_last_error_message` describes the error
//! until the next call on the same thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use beztopo::curve::{subdivide_capped, DEFAULT_ITERATION_CAP};
use beztopo::io::load_curve;
use beztopo::verify::{certify, CertifyOptions, Level};
use beztopo::{CompositeBezier, Error, GeometricConstants, IterationBounds, Point3, SubdivisionResult};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BztStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Domain = 3,
    Parse = 4,
    Validation = 5,
    RegularityUnverified = 6,
    NotSimple = 7,
    Resource = 8,
    Io = 9,
    /// The buffer passed in was too small; the required size was written.
    BufferTooSmall = 10,
    Internal = 11,
}

/// Certification levels, weakest first.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BztLevel {
    SimplePieces = 0,
    Homeomorphic = 1,
    Isotopic = 2,
}

/// A composite Bézier curve.
pub struct BztCurve {
    inner: CompositeBezier,
}

/// The pieces of a subdivided curve.
pub struct BztSubdivision {
    inner: SubdivisionResult,
}

/// Constants and iteration counts for one curve and pipe radius.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BztBounds {
    pub degree: u32,
    pub m: f64,
    pub sigma: f64,
    pub delta2_p: f64,
    pub delta2_pprime: f64,
    pub pipe_radius: f64,
    pub n1: f64,
    pub n_prime_r: f64,
    pub n_prime_half_r: f64,
    pub n2: f64,
    pub n_hat: f64,
    pub n_star: f64,
    pub simplicity: u32,
    pub homeomorphism: u32,
    pub isotopy: u32,
}

/// Summary of a certificate.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BztCertificate {
    pub verified: bool,
    /// Iterations the theorem asks for; -1 if certification stopped earlier.
    pub required_iterations: i32,
    /// Iterations performed; -1 if none.
    pub iterations: i32,
    /// Radius used; 0 if none could be determined.
    pub pipe_radius: f64,
    /// Number of checks run and how many failed.
    pub checks: u32,
    pub failed_checks: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> BztStatus {
    match err {
        Error::Domain(_) => BztStatus::Domain,
        Error::InvalidInput(_) | Error::DegenerateEdge { .. } | Error::ZeroDiscreteDerivative { .. } => {
            BztStatus::InvalidInput
        }
        Error::Resource { .. } => BztStatus::Resource,
        Error::RegularityUnverified(_) => BztStatus::RegularityUnverified,
        Error::NotSimple(_) => BztStatus::NotSimple,
        Error::InconsistentConstants(_) => BztStatus::Domain,
        Error::Parse { .. } => BztStatus::Parse,
        Error::Validation { .. } => BztStatus::Validation,
        Error::Io(_) => BztStatus::Io,
    }
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (BztStatus, String)>) -> BztStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BztStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            BztStatus::Internal
        }
    }
}

fn lib<T>(r: beztopo::Result<T>) -> Result<T, (BztStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (BztStatus, String) {
    (BztStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (BztStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next `bzt_*` call on the same thread.
#[no_mangle]
pub extern "C" fn bzt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a curve from `segment_count · (degree + 1)` points stored as
/// consecutive `x, y, z` triples.
///
/// # Safety
/// `xyz` must point to `len` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bzt_curve_new(
    degree: u32,
    segment_count: u32,
    xyz: *const f64,
    len: usize,
    out: *mut *mut BztCurve,
) -> BztStatus {
    guard(|| {
        if xyz.is_null() {
            return Err(null("xyz"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let per = degree as usize + 1;
        let expected = segment_count as usize * per * 3;
        if len != expected {
            return Err((
                BztStatus::InvalidInput,
                format!("expected {expected} coordinates for {segment_count} segments of degree {degree}, got {len}"),
            ));
        }
        let data = std::slice::from_raw_parts(xyz, len);
        let segments = data
            .chunks_exact(per * 3)
            .map(|seg| seg.chunks_exact(3).map(|c| Point3::new(c[0], c[1], c[2])).collect())
            .collect();
        let curve = lib(CompositeBezier::new(degree as usize, segments))?;
        *out = Box::into_raw(Box::new(BztCurve { inner: curve }));
        Ok(())
    })
}

/// Reads and validates a curve file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bzt_curve_load(path: *const c_char, out: *mut *mut BztCurve) -> BztStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (BztStatus::InvalidInput, "path is not UTF-8".to_string()))?;
        let loaded = lib(load_curve(Path::new(path)))?;
        *out = Box::into_raw(Box::new(BztCurve { inner: loaded.curve }));
        Ok(())
    })
}

/// Releases a curve. NULL is ignored.
///
/// # Safety
/// `curve` must come from `bzt_curve_new`/`bzt_curve_load` and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn bzt_curve_free(curve: *mut BztCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Degree of the curve, or 0 for NULL.
///
/// # Safety
/// `curve` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bzt_curve_degree(curve: *const BztCurve) -> u32 {
    curve.as_ref().map_or(0, |c| c.inner.degree() as u32)
}

/// Number of segments, or 0 for NULL.
///
/// # Safety
/// `curve` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bzt_curve_segment_count(curve: *const BztCurve) -> u32 {
    curve.as_ref().map_or(0, |c| c.inner.segment_count() as u32)
}

/// Writes the point at global parameter `t ∈ [0, 1]` to `out[0..3]`.
///
/// # Safety
/// `curve` must be a live handle and `out` must hold three doubles.
#[no_mangle]
pub unsafe extern "C" fn bzt_curve_evaluate(curve: *const BztCurve, t: f64, out: *mut f64) -> BztStatus {
    guard(|| {
        let c = deref(curve, "curve")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let p = lib(c.inner.evaluate(t))?;
        std::slice::from_raw_parts_mut(out, 3).copy_from_slice(&p.to_array());
        Ok(())
    })
}

/// Computes constants and iteration bounds. A non-positive `pipe_radius`
/// selects the built-in estimate.
///
/// # Safety
/// `curve` must be a live handle and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bzt_curve_bounds(curve: *const BztCurve, pipe_radius: f64, out: *mut BztBounds) -> BztStatus {
    guard(|| {
        let c = deref(curve, "curve")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let r = if pipe_radius > 0.0 {
            pipe_radius
        } else {
            lib(beztopo::estimate_pipe_radius(&c.inner, Default::default()))?.radius
        };
        let gc = lib(GeometricConstants::from_curve(&c.inner, r))?;
        let b = lib(IterationBounds::compute(&gc, &[]))?;
        *out = BztBounds {
            degree: gc.degree as u32,
            m: gc.m,
            sigma: gc.sigma,
            delta2_p: gc.delta2_p.norm,
            delta2_pprime: gc.delta2_pprime.norm,
            pipe_radius: r,
            n1: b.n1,
            n_prime_r: b.n_prime_r,
            n_prime_half_r: b.n_prime_half_r,
            n2: b.n2,
            n_hat: b.n_hat,
            n_star: b.n_star,
            simplicity: b.simplicity,
            homeomorphism: b.homeomorphism,
            isotopy: b.isotopy,
        };
        Ok(())
    })
}

fn run_certify(
    c: &BztCurve,
    level: u32,
    pipe_radius: f64,
    samples: usize,
) -> Result<beztopo::TopologyCertificate, (BztStatus, String)> {
    let level = match level {
        l if l == BztLevel::SimplePieces as u32 => Level::SimplePieces,
        l if l == BztLevel::Homeomorphic as u32 => Level::Homeomorphic,
        l if l == BztLevel::Isotopic as u32 => Level::Isotopic,
        l => return Err((BztStatus::InvalidInput, format!("unknown level {l}"))),
    };
    let opts = CertifyOptions {
        pipe_radius: (pipe_radius > 0.0).then_some(pipe_radius),
        samples: if samples == 0 { CertifyOptions::default().samples } else { samples },
        ..CertifyOptions::default()
    };
    lib(certify(&c.inner, level, &opts))
}

/// Certifies `level`, a `BztLevel` value. A failed check is not an error: the call returns
/// `BZT_STATUS_OK` with `verified = false`. `pipe_radius <= 0` estimates the
/// radius and `samples == 0` uses the default sample count.
///
/// # Safety
/// `curve` must be a live handle and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bzt_certify(
    curve: *const BztCurve,
    level: u32,
    pipe_radius: f64,
    samples: usize,
    out: *mut BztCertificate,
) -> BztStatus {
    guard(|| {
        let c = deref(curve, "curve")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cert = run_certify(c, level, pipe_radius, samples)?;
        *out = BztCertificate {
            verified: cert.verified,
            required_iterations: cert.required_iterations.map_or(-1, |v| v as i32),
            iterations: cert.iterations.map_or(-1, |v| v as i32),
            pipe_radius: cert.pipe_radius.unwrap_or(0.0),
            checks: cert.checks.len() as u32,
            failed_checks: cert.checks.iter().filter(|c| !c.passed).count() as u32,
        };
        Ok(())
    })
}

/// Like `bzt_certify` but returns the full certificate as a JSON string to
/// be released with `bzt_string_free`.
///
/// # Safety
/// `curve` must be a live handle and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bzt_certify_json(
    curve: *const BztCurve,
    level: u32,
    pipe_radius: f64,
    samples: usize,
    out: *mut *mut c_char,
) -> BztStatus {
    guard(|| {
        let c = deref(curve, "curve")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cert = run_certify(c, level, pipe_radius, samples)?;
        let json = serde_json::to_string(&cert).map_err(|e| (BztStatus::Internal, e.to_string()))?;
        *out = CString::new(json).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bzt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Applies `iterations` rounds of midpoint subdivision.
///
/// # Safety
/// `curve` must be a live handle and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bzt_subdivide(
    curve: *const BztCurve,
    iterations: u32,
    out: *mut *mut BztSubdivision,
) -> BztStatus {
    guard(|| {
        let c = deref(curve, "curve")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let result = lib(subdivide_capped(&c.inner, iterations, DEFAULT_ITERATION_CAP))?;
        *out = Box::into_raw(Box::new(BztSubdivision { inner: result }));
        Ok(())
    })
}

/// Releases a subdivision. NULL is ignored.
///
/// # Safety
/// `sub` must come from `bzt_subdivide` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bzt_subdivision_free(sub: *mut BztSubdivision) {
    if !sub.is_null() {
        drop(Box::from_raw(sub));
    }
}

/// Number of pieces, or 0 for NULL.
///
/// # Safety
/// `sub` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bzt_subdivision_piece_count(sub: *const BztSubdivision) -> usize {
    sub.as_ref().map_or(0, |s| s.inner.pieces().len())
}

/// Copies the union control polygon into `xyz` as `x, y, z` triples.
/// `needed` receives the number of doubles required; if `capacity` is
/// smaller, nothing is copied and `BZT_STATUS_BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// `sub` must be a live handle, `needed` writable, and `xyz` must hold
/// `capacity` doubles (it may be NULL when `capacity` is 0).
#[no_mangle]
pub unsafe extern "C" fn bzt_subdivision_union_polygon(
    sub: *const BztSubdivision,
    xyz: *mut f64,
    capacity: usize,
    needed: *mut usize,
) -> BztStatus {
    guard(|| {
        let s = deref(sub, "subdivision")?;
        if needed.is_null() {
            return Err(null("needed"));
        }
        let union = s.inner.union_polygon();
        *needed = union.len() * 3;
        if capacity < union.len() * 3 {
            return Err((BztStatus::BufferTooSmall, format!("need {} doubles", union.len() * 3)));
        }
        if xyz.is_null() {
            return Err(null("xyz"));
        }
        let dst = std::slice::from_raw_parts_mut(xyz, union.len() * 3);
        for (chunk, p) in dst.chunks_exact_mut(3).zip(&union) {
            chunk.copy_from_slice(&p.to_array());
        }
        Ok(())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bzt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
