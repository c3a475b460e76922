use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use beztopo_ffi::*;

const CUBIC: [f64; 12] = [0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 2.0, -1.0, 0.5, 3.0, 0.0, 0.0];

fn cubic() -> *mut BztCurve {
    let mut c = ptr::null_mut();
    let s = unsafe { bzt_curve_new(3, 1, CUBIC.as_ptr(), CUBIC.len(), &mut c) };
    assert_eq!(s, BztStatus::Ok);
    c
}

fn last_error() -> String {
    let p = bzt_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn create_evaluate_free() {
    let c = cubic();
    unsafe {
        assert_eq!(bzt_curve_degree(c), 3);
        assert_eq!(bzt_curve_segment_count(c), 1);
        let mut p = [0.0; 3];
        assert_eq!(bzt_curve_evaluate(c, 1.0, p.as_mut_ptr()), BztStatus::Ok);
        assert_eq!(p, [3.0, 0.0, 0.0]);
        assert_eq!(bzt_curve_evaluate(c, 1.5, p.as_mut_ptr()), BztStatus::Domain);
        assert!(last_error().contains("outside"));
        bzt_curve_free(c);
        bzt_curve_free(ptr::null_mut());
    }
}

#[test]
fn errors_are_reported_not_panicked() {
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(bzt_curve_new(3, 1, CUBIC.as_ptr(), 11, &mut c), BztStatus::InvalidInput);
        assert!(c.is_null());
        assert_eq!(bzt_curve_new(3, 1, ptr::null(), 12, &mut c), BztStatus::NullPointer);
        let split = [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0];
        assert_eq!(bzt_curve_new(1, 2, split.as_ptr(), 12, &mut c), BztStatus::Validation);
        assert!(last_error().contains("junction 1"));
        assert_eq!(bzt_curve_degree(ptr::null()), 0);
        let path = CString::new("/nonexistent/curve.bez").unwrap();
        assert_eq!(bzt_curve_load(path.as_ptr(), &mut c), BztStatus::Io);
    }
    // success clears the message
    let c = cubic();
    assert!(bzt_last_error_message().is_null());
    unsafe { bzt_curve_free(c) };
}

#[test]
fn bounds_and_certificate() {
    let c = cubic();
    unsafe {
        let mut b = BztBounds::default();
        assert_eq!(bzt_curve_bounds(c, 0.5, &mut b), BztStatus::Ok);
        assert_eq!(b.degree, 3);
        assert_eq!(b.pipe_radius, 0.5);
        assert!(b.sigma > 0.0 && b.isotopy >= b.homeomorphism);

        let mut cert = BztCertificate::default();
        assert_eq!(bzt_certify(c, BztLevel::Isotopic as u32, 0.0, 500, &mut cert), BztStatus::Ok);
        assert!(cert.verified);
        assert_eq!(cert.iterations, cert.required_iterations + 1);
        assert_eq!(cert.checks, 7);
        assert_eq!(cert.failed_checks, 0);
        assert_eq!(bzt_certify(c, 9, 0.0, 500, &mut cert), BztStatus::InvalidInput);

        let mut json = ptr::null_mut();
        assert_eq!(bzt_certify_json(c, BztLevel::SimplePieces as u32, 0.0, 0, &mut json), BztStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        bzt_string_free(json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["level"], "simple_pieces");
        assert_eq!(v["verified"], true);
        bzt_curve_free(c);
    }
}

#[test]
fn subdivision_union_polygon() {
    let c = cubic();
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(bzt_subdivide(c, 2, &mut s), BztStatus::Ok);
        assert_eq!(bzt_subdivision_piece_count(s), 4);
        let mut needed = 0;
        assert_eq!(bzt_subdivision_union_polygon(s, ptr::null_mut(), 0, &mut needed), BztStatus::BufferTooSmall);
        assert_eq!(needed, 13 * 3);
        let mut buf = vec![0.0; needed];
        assert_eq!(bzt_subdivision_union_polygon(s, buf.as_mut_ptr(), buf.len(), &mut needed), BztStatus::Ok);
        assert_eq!(&buf[..3], &CUBIC[..3]);
        assert_eq!(&buf[36..], &CUBIC[9..]);
        bzt_subdivision_free(s);
        bzt_curve_free(c);
    }
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(bzt_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c99() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/beztopo.h");
    let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-std=c99", "-x", "c", header]).output()
    else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(header).unwrap();
    for name in ["bzt_curve_new", "bzt_certify", "bzt_last_error_message", "BZT_STATUS_OK", "BZT_LEVEL_ISOTOPIC"] {
        assert!(text.contains(name), "{name} missing from header");
    }
}

/// Links a C program against the shared library when cargo has built it.
#[test]
fn c_program_links_and_runs() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap();
    let lib = profile_dir.join(if cfg!(target_os = "macos") { "libbeztopo_ffi.dylib" } else { "libbeztopo_ffi.so" });
    if !lib.exists() || !cfg!(unix) {
        eprintln!("shared library not built; skipping");
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let bin = tmp.path().join("smoke");
    let Ok(cc) = Command::new("cc")
        .arg(format!("{dir}/tests/c/smoke.c"))
        .arg(format!("-I{dir}/include"))
        .arg(format!("-L{}", profile_dir.display()))
        .args(["-lbeztopo_ffi", "-o"])
        .arg(&bin)
        .output()
    else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(cc.status.success(), "{}", String::from_utf8_lossy(&cc.stderr));
    let run = Command::new(&bin).env("LD_LIBRARY_PATH", profile_dir).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "{stdout}{}", String::from_utf8_lossy(&run.stderr));
    assert!(stdout.starts_with("verified=1"), "{stdout}");
}
