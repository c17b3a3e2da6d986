use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use locclab_ffi::*;

fn last_error() -> String {
    let p = locclab_last_error_message();
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { locclab_string_free(p) };
    s
}

#[test]
fn pair_lifecycle_and_values() {
    let mut pair = ptr::null_mut();
    unsafe {
        assert_eq!(locclab_werner_pair(2, &mut pair), LocclabStatus::Ok);
        let mut dim = 0usize;
        assert_eq!(locclab_pair_dim(pair, &mut dim), LocclabStatus::Ok);
        assert_eq!(dim, 4);
        let mut v = 0.0;
        assert_eq!(locclab_helstrom(pair, &mut v), LocclabStatus::Ok);
        assert!((v - 1.0).abs() < 1e-10);
        assert_eq!(locclab_locc_lower(pair, &mut v), LocclabStatus::Ok);
        assert!((v - 5.0 / 6.0).abs() < 1e-9);
        assert_eq!(locclab_ppt_upper(pair, &mut v), LocclabStatus::Ok);
        assert!((v - 5.0 / 6.0).abs() < 1e-5);
        locclab_pair_free(pair);
        locclab_pair_free(ptr::null_mut());
    }
}

#[test]
fn errors_map_to_codes() {
    let mut pair = ptr::null_mut();
    unsafe {
        assert_eq!(locclab_rho_pair(2, 1.5, 2, &mut pair), LocclabStatus::Spec);
        assert!(last_error().contains("lambda"));
        assert!(pair.is_null());
        let bad = CString::new("{\"layout\": [").unwrap();
        assert_eq!(locclab_pair_from_json(bad.as_ptr(), bad.as_ptr(), &mut pair), LocclabStatus::Parse);
        assert_eq!(locclab_pair_from_json(ptr::null(), bad.as_ptr(), &mut pair), LocclabStatus::NullPointer);
        let mut n = 0u64;
        assert_eq!(locclab_min_rounds(0.1, 1.0, &mut n), LocclabStatus::Ok);
        assert_eq!(n, 278);
        assert_eq!(locclab_min_rounds(0.1, 2.5, &mut n), LocclabStatus::Domain);
        let mut v = 0.0;
        assert_eq!(locclab_thm2_bound(-1.0, 0.0, &mut v), LocclabStatus::Spec);
        assert_eq!(locclab_thm2_bound(0.1, 0.2, &mut v), LocclabStatus::Ok);
        assert!((v - 0.7).abs() < 1e-15);
        assert_eq!(locclab_helstrom(ptr::null(), &mut v), LocclabStatus::NullPointer);
    }
}

#[test]
fn concentration_and_config_runs() {
    let mut p = 0.0;
    unsafe {
        assert_eq!(locclab_concentration_success(0.5, 2, 2, 1.0, 0, 0, &mut p), LocclabStatus::Ok);
    }
    assert_eq!(p, 0.5);
    let cfg = CString::new(
        r#"{"seed": 3, "params": {"command": "detect", "p_tau": 0.9, "p_locc": 0.75, "delta": 0.05, "n": 500, "trials": 50}}"#,
    )
    .unwrap();
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(locclab_run_config(cfg.as_ptr(), 2, &mut out), LocclabStatus::Ok);
        let s = CStr::from_ptr(out).to_str().unwrap().to_owned();
        locclab_string_free(out);
        assert!(s.contains("p_corr_tau"));
    }
    let bad = CString::new(r#"{"seed": 3, "bogus": 1}"#).unwrap();
    unsafe {
        assert_eq!(locclab_run_config(bad.as_ptr(), 1, &mut out), LocclabStatus::Parse);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/locclab.h")).unwrap();
    for name in [
        "locclab_version",
        "locclab_last_error_message",
        "locclab_string_free",
        "locclab_werner_pair",
        "locclab_rho_pair",
        "locclab_pair_from_json",
        "locclab_pair_dim",
        "locclab_pair_free",
        "locclab_helstrom",
        "locclab_ppt_upper",
        "locclab_locc_lower",
        "locclab_thm2_bound",
        "locclab_min_rounds",
        "locclab_concentration_success",
        "locclab_run_config",
        "typedef struct LocclabStatePair LocclabStatePair",
        "LOCCLAB_STATUS_CATALYST_VIOLATION = 11",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

/// Compiles tests/c/smoke.c against the header and the static library.
#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|p| p.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("liblocclab_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let tmp = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let bin = tmp.join("locclab_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("a C compiler named cc");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
