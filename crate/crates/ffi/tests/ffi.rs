use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use lacunary_ffi::*;

fn take(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { lacunary_string_free(s) };
    out
}

fn last_error() -> String {
    let p = lacunary_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn geometric(q: u64) -> *mut LacunarySequence {
    let mut seq = ptr::null_mut();
    assert_eq!(unsafe { lacunary_sequence_geometric(q, &mut seq) }, LacunaryStatus::Ok);
    seq
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(lacunary_version()) };
    assert_eq!(v.to_str().unwrap(), lacunary::stats::VERSION);
}

#[test]
fn geometric_terms_and_sigma() {
    let seq = geometric(2);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { lacunary_sequence_term(seq, 10, &mut s) }, LacunaryStatus::Ok);
    assert_eq!(take(s), "1024");

    let f = CString::new("cos:1").unwrap();
    assert_eq!(unsafe { lacunary_sigma_squared(seq, f.as_ptr(), 10, &mut s) }, LacunaryStatus::Ok);
    assert_eq!(take(s), "5");
    unsafe { lacunary_sequence_free(seq) };
}

#[test]
fn sum_at_dyadic_point() {
    // x = 1/8: cos(2π·2^k/8) for k = 1..3 is 0, -1, 1
    let seq = geometric(2);
    let f = CString::new("cos:1").unwrap();
    let x = CString::new("1").unwrap();
    let mut v = f64::NAN;
    assert_eq!(unsafe { lacunary_sum_at(seq, f.as_ptr(), 3, x.as_ptr(), 3, &mut v) }, LacunaryStatus::Ok);
    assert!(v.abs() < 1e-12, "{v}");
    unsafe { lacunary_sequence_free(seq) };
}

#[test]
fn counts_and_max_count() {
    let mut seq = ptr::null_mut();
    assert_eq!(unsafe { lacunary_sequence_erdos_fortet(&mut seq) }, LacunaryStatus::Ok);
    let c = CString::new("1").unwrap();
    let mut n = 0u64;
    assert_eq!(unsafe { lacunary_count(seq, 10, 1, 2, c.as_ptr(), &mut n) }, LacunaryStatus::Ok);
    assert_eq!(n, 9);

    let mut best_c = ptr::null_mut();
    assert_eq!(unsafe { lacunary_max_count(seq, 10, 1, 2, &mut n, &mut best_c) }, LacunaryStatus::Ok);
    assert_eq!(n, 9);
    assert_eq!(take(best_c), "1");
    unsafe { lacunary_sequence_free(seq) };
}

#[test]
fn erdos_fortet_residual_is_tiny() {
    let x = CString::new("123456789").unwrap();
    let mut r = f64::NAN;
    assert_eq!(unsafe { lacunary_erdos_fortet_residual(40, x.as_ptr(), 40, &mut r) }, LacunaryStatus::Ok);
    assert!(r < 1e-9, "{r}");
}

#[test]
fn paper_sequence_reduced_tower() {
    let eps = CString::new("1/2").unwrap();
    let k = CString::new("1").unwrap();
    let mut seq = ptr::null_mut();
    let st = unsafe { lacunary_sequence_paper(4, eps.as_ptr(), 2, k.as_ptr(), LacunaryTower::Reduced, &mut seq) };
    assert_eq!(st, LacunaryStatus::Ok);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { lacunary_sequence_term(seq, 1, &mut s) }, LacunaryStatus::Ok);
    assert!(!take(s).is_empty());
    unsafe { lacunary_sequence_free(seq) };
}

#[test]
fn clt_report_is_json() {
    let seq = geometric(2);
    let f = CString::new("cos:1").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { lacunary_clt_report_json(seq, f.as_ptr(), 8, 500, 7, &mut s) }, LacunaryStatus::Ok);
    let report = lacunary::stats::ExperimentReport::from_json(&take(s)).unwrap();
    assert_eq!(report.seed, Some(7));
    assert!(report.statistics.contains_key("kolmogorov_normal"));
    unsafe { lacunary_sequence_free(seq) };
}

#[test]
fn errors_set_status_and_message() {
    let mut seq = ptr::null_mut();
    assert_eq!(unsafe { lacunary_sequence_geometric(1, &mut seq) }, LacunaryStatus::InvalidParameter);
    assert!(seq.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { lacunary_sequence_geometric(2, ptr::null_mut()) }, LacunaryStatus::NullPointer);

    let seq = geometric(2);
    let bad = CString::new("seven").unwrap();
    let mut n = 0u64;
    assert_eq!(
        unsafe { lacunary_count(seq, 5, 1, 1, bad.as_ptr(), &mut n) },
        LacunaryStatus::InvalidParameter
    );
    assert!(last_error().contains("seven"));

    let f = CString::new("cos:1").unwrap();
    let x = CString::new("1").unwrap();
    let mut v = 0.0;
    assert_eq!(
        unsafe { lacunary_sum_at(ptr::null(), f.as_ptr(), 3, x.as_ptr(), 3, &mut v) },
        LacunaryStatus::NullPointer
    );
    unsafe { lacunary_sequence_free(seq) };
    unsafe { lacunary_sequence_free(ptr::null_mut()) };
    unsafe { lacunary_string_free(ptr::null_mut()) };
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/lacunary.h")
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(header()).unwrap();
    for name in [
        "lacunary_version",
        "lacunary_last_error_message",
        "lacunary_string_free",
        "lacunary_sequence_geometric",
        "lacunary_sequence_erdos_fortet",
        "lacunary_sequence_paper",
        "lacunary_sequence_free",
        "lacunary_sequence_term",
        "lacunary_count",
        "lacunary_max_count",
        "lacunary_sum_at",
        "lacunary_sigma_squared",
        "lacunary_erdos_fortet_residual",
        "lacunary_clt_report_json",
        "typedef struct LacunarySequence LacunarySequence",
    ] {
        assert!(h.contains(name), "missing {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-x", "c"])
        .arg(header())
        .status()
        .expect("cc");
    assert!(status.success());
}

#[test]
fn c_program_links_against_staticlib() {
    // test binary lives in target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("liblacunary_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());

    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/c/smoke.c");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror"])
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&bin)
        .status()
        .expect("cc");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), lacunary::stats::VERSION);
}
