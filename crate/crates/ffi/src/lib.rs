//! C ABI for `reeb-eh`.
//!
//! Polytopes live behind an opaque handle. Structured data crosses the
//! boundary as UTF-8 JSON in the same schemas the CLI uses; strings returned
//! by the library must be released with [`reeb_eh_string_free`]. Every call
//! returns a [`ReebEhStatus`]; on failure [`reeb_eh_last_error`] holds a
//! message for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use reeb_eh::json;
use reeb_eh::optimizer::{self, SearchOptions};
use reeb_eh::scalar::parse_rational;
use reeb_eh::testconfig::{build_total, CalibrationStatus, FsDictionary};
use reeb_eh::{Error, ReebCalculus, ReebVector};
use serde_json::json;

/// Status codes. Values are stable.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReebEhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InfeasiblePolytope = 4,
    NotInCone = 5,
    NoConvergence = 6,
    SegmentExitsCone = 7,
    NonpositiveHeight = 8,
    ReebDegeneratesOnTotal = 9,
    RangeViolation = 10,
    Uncalibrated = 11,
    SchemaMismatch = 12,
    InvalidInput = 13,
    Io = 14,
    Panic = 15,
}

impl From<&Error> for ReebEhStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InfeasiblePolytope(_) => ReebEhStatus::InfeasiblePolytope,
            Error::NotInCone(_) => ReebEhStatus::NotInCone,
            Error::NoConvergence { .. } => ReebEhStatus::NoConvergence,
            Error::SegmentExitsCone(_) => ReebEhStatus::SegmentExitsCone,
            Error::NonpositiveHeight(_) => ReebEhStatus::NonpositiveHeight,
            Error::ReebDegeneratesOnTotal(_) => ReebEhStatus::ReebDegeneratesOnTotal,
            Error::RangeViolation(_) => ReebEhStatus::RangeViolation,
            Error::Uncalibrated => ReebEhStatus::Uncalibrated,
            Error::Parse { .. } => ReebEhStatus::ParseError,
            Error::SchemaMismatch(_) => ReebEhStatus::SchemaMismatch,
            Error::InvalidInput(_) => ReebEhStatus::InvalidInput,
            Error::Io(_) => ReebEhStatus::Io,
        }
    }
}

/// Opaque polytope handle with its cached triangulation and facet chart.
pub struct ReebEhPolytope {
    calc: ReebCalculus,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Status(ReebEhStatus, String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// Runs `f`, converting errors and panics into a status plus last-error text.
fn guard<F>(f: F) -> ReebEhStatus
where
    F: FnOnce() -> Outcome<()>,
{
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ReebEhStatus::Ok,
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Failure::Lib(e))) => {
            let s = ReebEhStatus::from(&e);
            set_error(format!("{}: {e}", e.code()));
            s
        }
        Err(_) => {
            set_error("panic inside reeb-eh".into());
            ReebEhStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Outcome<&'a str> {
    if p.is_null() {
        return Err(Failure::Status(ReebEhStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(ReebEhStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, name: &str) -> Outcome<Option<&'a str>> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, name).map(Some)
    }
}

unsafe fn handle<'a>(p: *const ReebEhPolytope) -> Outcome<&'a ReebCalculus> {
    p.as_ref()
        .map(|h| &h.calc)
        .ok_or_else(|| Failure::Status(ReebEhStatus::NullPointer, "polytope handle is null".into()))
}

unsafe fn out_ptr<'a, T>(p: *mut T, name: &str) -> Outcome<&'a mut T> {
    p.as_mut()
        .ok_or_else(|| Failure::Status(ReebEhStatus::NullPointer, format!("{name} is null")))
}

fn reeb_vector(calc: &ReebCalculus, text: Option<&str>) -> Outcome<ReebVector> {
    let chi = match text {
        Some(t) => json::parse_reeb(t)?.build(),
        None => ReebVector::constant(calc.dim()),
    };
    if chi.dim() != calc.dim() {
        return Err(Error::InvalidInput(format!("Reeb vector has {} slopes, polytope dimension is {}", chi.dim(), calc.dim())).into());
    }
    Ok(chi)
}

fn emit(out: &mut *mut c_char, value: serde_json::Value) -> Outcome<()> {
    let text = serde_json::to_string(&value).expect("serializable");
    *out = CString::new(text).expect("JSON has no nul").into_raw();
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn reeb_eh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next library call on the same thread.
#[no_mangle]
pub extern "C" fn reeb_eh_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn reeb_eh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a polytope `{"dim": n, "facets": [...]}` into a new handle.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn reeb_eh_polytope_from_json(json: *const c_char, out: *mut *mut ReebEhPolytope) -> ReebEhStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let dto = json::parse_polytope(str_arg(json, "json")?)?;
        let calc = ReebCalculus::new(dto.build()?);
        *out = Box::into_raw(Box::new(ReebEhPolytope { calc }));
        Ok(())
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `p` must come from [`reeb_eh_polytope_from_json`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn reeb_eh_polytope_free(p: *mut ReebEhPolytope) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Dimension of the polytope.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn reeb_eh_polytope_dim(p: *const ReebEhPolytope, out: *mut usize) -> ReebEhStatus {
    guard(|| {
        *out_ptr(out, "out")? = handle(p)?.dim();
        Ok(())
    })
}

/// Vertices, volume, barycenter and flags as JSON.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn reeb_eh_polytope_summary(p: *const ReebEhPolytope, out: *mut *mut c_char) -> ReebEhStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        emit(out, json::polytope_summary(handle(p)?.polytope()))
    })
}

/// Exact `V`, `S`, `S^{n+1}/V^n` and float EH at a Reeb vector given as
/// `{"a0": .., "a": [..]}` (NULL means the constant function 1).
///
/// # Safety
/// `p` must be a live handle, `reeb` NULL or a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn reeb_eh_eval(p: *const ReebEhPolytope, reeb: *const c_char, out: *mut *mut c_char) -> ReebEhStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let calc = handle(p)?;
        let chi = reeb_vector(calc, opt_str_arg(reeb, "reeb")?)?;
        emit(out, json::eh_report(&calc.eh(&chi)?))
    })
}

/// Float EH at homogeneous coordinates `(a0, a1, .., an)`.
///
/// # Safety
/// `p` must be a live handle, `coords` must point to `len` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn reeb_eh_eval_f64(p: *const ReebEhPolytope, coords: *const f64, len: usize, out: *mut f64) -> ReebEhStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let calc = handle(p)?;
        if coords.is_null() {
            return Err(Failure::Status(ReebEhStatus::NullPointer, "coords is null".into()));
        }
        if len != calc.dim() + 1 {
            return Err(Error::InvalidInput(format!("expected {} coordinates, got {len}", calc.dim() + 1)).into());
        }
        let c = std::slice::from_raw_parts(coords, len);
        let values = calc.float_geometry().vertex_values(c);
        if values.iter().any(|&v| v.is_nan() || v <= 0.0) {
            return Err(Error::NotInCone(format!("{c:?}")).into());
        }
        let jet = calc.float_jet(c, 0);
        let n = calc.dim() as f64;
        *out = jet.s * jet.v.powf(-n / (n + 1.0));
        Ok(())
    })
}

/// Exact scaled gradient and Hessian plus their float EH counterparts.
///
/// # Safety
/// As for [`reeb_eh_eval`].
#[no_mangle]
pub unsafe extern "C" fn reeb_eh_derivatives(p: *const ReebEhPolytope, reeb: *const c_char, out: *mut *mut c_char) -> ReebEhStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let calc = handle(p)?;
        let chi = reeb_vector(calc, opt_str_arg(reeb, "reeb")?)?;
        emit(out, json::derivative_report(&calc.derivatives(&chi)?))
    })
}

fn options(text: Option<&str>) -> Outcome<SearchOptions> {
    Ok(match text {
        Some(t) => json::parse_options(t)?,
        None => SearchOptions::default(),
    })
}

/// Global minimum of EH on the slice. `options` is SearchOptions JSON or NULL.
///
/// # Safety
/// `p` must be a live handle, `options` NULL or NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn reeb_eh_minimize(p: *const ReebEhPolytope, options_json: *const c_char, out: *mut *mut c_char) -> ReebEhStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let calc = handle(p)?;
        let opts = options(opt_str_arg(options_json, "options")?)?;
        let best = optimizer::find_minimum(calc, &opts)?;
        emit(out, json::critical_point(&best))
    })
}

/// All critical points found by multi-start.
///
/// # Safety
/// As for [`reeb_eh_minimize`].
#[no_mangle]
pub unsafe extern "C" fn reeb_eh_critical_points(p: *const ReebEhPolytope, options_json: *const c_char, out: *mut *mut c_char) -> ReebEhStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let calc = handle(p)?;
        let opts = options(opt_str_arg(options_json, "options")?)?;
        emit(out, json::critical_set(&optimizer::find_critical_points(calc, &opts, &[])?))
    })
}

/// EH of the toric test configuration with height `{"pieces": [..]}` at
/// parameter `s` (a rational string). `dictionary` may be NULL for the
/// default. The result is always marked uncalibrated.
///
/// # Safety
/// `p` must be a live handle, string arguments NULL (where allowed) or
/// NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn reeb_eh_testconfig_eh(
    p: *const ReebEhPolytope,
    reeb: *const c_char,
    height: *const c_char,
    s: *const c_char,
    dictionary: *const c_char,
    out: *mut *mut c_char,
) -> ReebEhStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let calc = handle(p)?;
        let chi = reeb_vector(calc, opt_str_arg(reeb, "reeb")?)?;
        let h = json::parse_height(str_arg(height, "height")?)?.build()?;
        let s = parse_rational(str_arg(s, "s")?)?;
        let dict = match opt_str_arg(dictionary, "dictionary")? {
            Some(name) => FsDictionary::parse(name)?,
            None => FsDictionary::default(),
        };
        let total = build_total(calc.polytope(), &h)?;
        let report = total.eh_s(&chi, &s, dict, CalibrationStatus::Uncalibrated)?;
        let mut v = json::testconfig_report(&report);
        v["warnings"] = json!(total.warnings());
        emit(out, v)
    })
}
