use std::ffi::{CStr, CString};
use std::ptr;

use reeb_eh_ffi::*;

const RECT_1_6: &str = r#"{"dim": 2, "facets": [
    {"normal": [1, 0], "offset": "1"}, {"normal": [-1, 0], "offset": "1"},
    {"normal": [0, 1], "offset": "6"}, {"normal": [0, -1], "offset": "6"}]}"#;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn polytope(text: &str) -> *mut ReebEhPolytope {
    let mut p = ptr::null_mut();
    let json = c(text);
    assert_eq!(unsafe { reeb_eh_polytope_from_json(json.as_ptr(), &mut p) }, ReebEhStatus::Ok);
    assert!(!p.is_null());
    p
}

fn take(s: *mut std::ffi::c_char) -> serde_json::Value {
    assert!(!s.is_null());
    let v = serde_json::from_str(unsafe { CStr::from_ptr(s) }.to_str().unwrap()).unwrap();
    unsafe { reeb_eh_string_free(s) };
    v
}

fn last_error() -> String {
    let e = reeb_eh_last_error();
    assert!(!e.is_null());
    unsafe { CStr::from_ptr(e) }.to_string_lossy().into_owned()
}

#[test]
fn eval_at_xi0_and_shifted() {
    let p = polytope(RECT_1_6);
    let mut dim = 0usize;
    assert_eq!(unsafe { reeb_eh_polytope_dim(p, &mut dim) }, ReebEhStatus::Ok);
    assert_eq!(dim, 2);

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { reeb_eh_eval(p, ptr::null(), &mut out) }, ReebEhStatus::Ok);
    let v = take(out);
    assert_eq!(v["V"], "24");
    assert_eq!(v["S"], "28");
    assert_eq!(v["eh_power"], "343/9");

    let chi = c(r#"{"a0": "1", "a": ["1/5", "0"]}"#);
    assert_eq!(unsafe { reeb_eh_eval(p, chi.as_ptr(), &mut out) }, ReebEhStatus::Ok);
    let v = take(out);
    assert_eq!(v["V"], "625/24");
    assert_eq!(v["S"], "125/4");
    assert_eq!(v["eh_power"], "45");

    let mut eh = 0.0;
    let coords = [1.0, 0.2, 0.0];
    assert_eq!(unsafe { reeb_eh_eval_f64(p, coords.as_ptr(), 3, &mut eh) }, ReebEhStatus::Ok);
    assert!((eh - 45f64.cbrt()).abs() < 1e-12);
    unsafe { reeb_eh_polytope_free(p) };
}

#[test]
fn errors_map_to_status_codes() {
    let mut p = ptr::null_mut();
    let bad = c("{\"dim\": 2,\n \"facets\": [}");
    assert_eq!(unsafe { reeb_eh_polytope_from_json(bad.as_ptr(), &mut p) }, ReebEhStatus::ParseError);
    assert!(p.is_null());
    assert!(last_error().contains("line 2"));

    let empty = c(r#"{"dim": 1, "facets": [{"normal": [1], "offset": "-1"}, {"normal": [-1], "offset": "0"}]}"#);
    assert_eq!(unsafe { reeb_eh_polytope_from_json(empty.as_ptr(), &mut p) }, ReebEhStatus::InfeasiblePolytope);

    let p = polytope(RECT_1_6);
    let outside = c(r#"{"a0": "1", "a": ["1", "0"]}"#);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { reeb_eh_eval(p, outside.as_ptr(), &mut out) }, ReebEhStatus::NotInCone);
    assert!(last_error().starts_with("not-in-cone"));
    let wrong_dim = c(r#"{"a0": "1", "a": ["0"]}"#);
    assert_eq!(unsafe { reeb_eh_eval(p, wrong_dim.as_ptr(), &mut out) }, ReebEhStatus::InvalidInput);
    assert_eq!(unsafe { reeb_eh_eval(ptr::null(), ptr::null(), &mut out) }, ReebEhStatus::NullPointer);
    assert_eq!(unsafe { reeb_eh_eval(p, ptr::null(), ptr::null_mut()) }, ReebEhStatus::NullPointer);

    // a successful call clears the previous error
    assert_eq!(unsafe { reeb_eh_eval(p, ptr::null(), &mut out) }, ReebEhStatus::Ok);
    take(out);
    assert!(reeb_eh_last_error().is_null());
    unsafe { reeb_eh_polytope_free(p) };
    unsafe { reeb_eh_polytope_free(ptr::null_mut()) };
    unsafe { reeb_eh_string_free(ptr::null_mut()) };
}

#[test]
fn critical_points_and_minimum() {
    let p = polytope(RECT_1_6);
    let opts = c(r#"{"seed": 7, "starts": 16}"#);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { reeb_eh_critical_points(p, opts.as_ptr(), &mut out) }, ReebEhStatus::Ok);
    let v = take(out);
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.len(), 3);
    let kinds: Vec<_> = points.iter().map(|x| x["classification"].as_str().unwrap()).collect();
    assert_eq!(kinds.iter().filter(|k| **k == "minimum").count(), 2);
    assert_eq!(kinds.iter().filter(|k| **k == "saddle").count(), 1);

    assert_eq!(unsafe { reeb_eh_minimize(p, opts.as_ptr(), &mut out) }, ReebEhStatus::Ok);
    let m = take(out);
    assert!((m["eh_value"].as_f64().unwrap() - 37.5f64.cbrt()).abs() < 1e-9);

    let bad = c(r#"{"seeds": 1}"#);
    assert_eq!(unsafe { reeb_eh_minimize(p, bad.as_ptr(), &mut out) }, ReebEhStatus::ParseError);
    unsafe { reeb_eh_polytope_free(p) };
}

#[test]
fn derivatives_and_summary() {
    let p = polytope(RECT_1_6);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { reeb_eh_derivatives(p, ptr::null(), &mut out) }, ReebEhStatus::Ok);
    let d = take(out);
    // ξ₀ is critical: the scaled gradient vanishes
    for g in d["scaled_gradient"].as_array().unwrap() {
        assert_eq!(g, "0");
    }
    assert_eq!(unsafe { reeb_eh_polytope_summary(p, &mut out) }, ReebEhStatus::Ok);
    let s = take(out);
    assert_eq!(s["vertices"].as_array().unwrap().len(), 4);
    assert_eq!(s["volume"], "24");
    unsafe { reeb_eh_polytope_free(p) };
}

#[test]
fn testconfig_through_c_abi() {
    let seg = polytope(r#"{"dim": 1, "facets": [{"normal": [1], "offset": "1"}, {"normal": [-1], "offset": "1"}]}"#);
    let h = c(r#"{"pieces": [{"a0": "1", "a": ["0"]}]}"#);
    let s0 = c("0");
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { reeb_eh_testconfig_eh(seg, ptr::null(), h.as_ptr(), s0.as_ptr(), ptr::null(), &mut out) },
        ReebEhStatus::Ok
    );
    let v = take(out);
    assert_eq!(v["V_s"], "2");
    assert_eq!(v["calibration_status"], "not-applicable");

    let big = c("2");
    assert_eq!(
        unsafe { reeb_eh_testconfig_eh(seg, ptr::null(), h.as_ptr(), big.as_ptr(), ptr::null(), &mut out) },
        ReebEhStatus::RangeViolation
    );
    let neg = c(r#"{"pieces": [{"a0": "-1", "a": ["0"]}]}"#);
    assert_eq!(
        unsafe { reeb_eh_testconfig_eh(seg, ptr::null(), neg.as_ptr(), s0.as_ptr(), ptr::null(), &mut out) },
        ReebEhStatus::NonpositiveHeight
    );
    unsafe { reeb_eh_polytope_free(seg) };
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(reeb_eh_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "reeb_eh.h"

int main(void) {
    const char *rect = "{\"dim\": 2, \"facets\": [{\"normal\": [1, 0], \"offset\": \"1\"},"
                       " {\"normal\": [-1, 0], \"offset\": \"1\"}, {\"normal\": [0, 1], \"offset\": \"6\"},"
                       " {\"normal\": [0, -1], \"offset\": \"6\"}]}";
    ReebEhPolytope *p = NULL;
    if (reeb_eh_polytope_from_json(rect, &p) != REEB_EH_STATUS_OK) return 1;
    char *out = NULL;
    if (reeb_eh_eval(p, NULL, &out) != REEB_EH_STATUS_OK) return 2;
    int ok = strstr(out, "\"eh_power\":\"343/9\"") != NULL;
    reeb_eh_string_free(out);
    if (reeb_eh_eval(p, "{\"a0\": \"1\", \"a\": [\"2\", \"0\"]}", &out) != REEB_EH_STATUS_NOT_IN_CONE) return 3;
    if (reeb_eh_last_error() == NULL) return 4;
    reeb_eh_polytope_free(p);
    return ok ? 0 : 5;
}
"#;

/// Compiles a C client against the generated header and the static library.
#[test]
fn c_client_links_and_runs() {
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let staticlib = lib_dir.join("libreeb_eh_ffi.a");
    if !staticlib.exists() {
        eprintln!("{} missing; C client check skipped", staticlib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("client.c");
    let bin = dir.path().join("client");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let compiled = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I", include])
        .arg(&src)
        .arg(&staticlib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status();
    match compiled {
        Ok(status) => assert!(status.success(), "C client failed to build"),
        Err(_) => {
            eprintln!("no C compiler; C client check skipped");
            return;
        }
    }
    let run = std::process::Command::new(&bin).status().unwrap();
    assert!(run.success(), "C client exited with {run:?}");
}
