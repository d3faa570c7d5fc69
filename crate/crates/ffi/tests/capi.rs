use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use gcfx_ffi::*;

fn owned(p: *mut c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { gcfx_string_free(p) };
    s
}

fn last_error() -> Option<String> {
    let p = gcfx_last_error();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

#[test]
fn periodic_golden_ratio() {
    let ones = [1u64];
    let mut s = ptr::null_mut();
    let st = unsafe { gcfx_stream_periodic(1, ones.as_ptr(), 1, ones.as_ptr(), 1, &mut s) };
    assert_eq!(st, GcfxStatus::Ok);
    let (mut num, mut den) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(
        unsafe { gcfx_stream_convergent(s, 10, &mut num, &mut den) },
        GcfxStatus::Ok
    );
    assert_eq!((owned(num), owned(den)), ("144".to_string(), "89".to_string()));

    let precision = CString::new("1e-20").unwrap();
    let mut json = ptr::null_mut();
    assert_eq!(
        unsafe { gcfx_stream_evaluate_json(s, precision.as_ptr(), 1000, &mut json) },
        GcfxStatus::Ok
    );
    let v: serde_json::Value = serde_json::from_str(&owned(json)).unwrap();
    assert!(v["lo"]["num"].is_string() && v["hi"]["den"].is_string());

    let mut short = ptr::null_mut();
    let st = unsafe { gcfx_stream_evaluate_json(s, precision.as_ptr(), 3, &mut short) };
    assert_eq!(st, GcfxStatus::NonConvergence);
    assert!(short.is_null());
    assert!(last_error().unwrap().contains("not reached"));
    unsafe { gcfx_stream_free(s) };
}

#[test]
fn family_bounds_and_nu() {
    let name = CString::new("thue_morse_cf").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { gcfx_stream_family(name.as_ptr(), ptr::null(), &mut s) },
        GcfxStatus::Ok
    );
    let mut nu = 0.0;
    assert_eq!(
        unsafe { gcfx_stream_nu_estimate(s, 4000, 500, &mut nu) },
        GcfxStatus::Ok
    );
    let density = 2f64.ln() / (5.0 + 4.0 * 2f64.sqrt()).ln();
    assert!((nu - density).abs() < 0.01, "{nu}");
    unsafe { gcfx_stream_free(s) };

    let ft = CString::new("ft_mixed_cf").unwrap();
    let mut json = ptr::null_mut();
    let st = unsafe { gcfx_family_bound_json(ft.as_ptr(), ptr::null(), &mut json) };
    assert_eq!(st, GcfxStatus::ConditionViolated);
    let v: serde_json::Value = serde_json::from_str(&owned(json)).unwrap();
    assert!(v["mu_upper"].is_null());

    let rr = CString::new("rogers_ramanujan").unwrap();
    let params = CString::new("a=1 b=2").unwrap();
    let mut json = ptr::null_mut();
    assert_eq!(
        unsafe { gcfx_family_bound_json(rr.as_ptr(), params.as_ptr(), &mut json) },
        GcfxStatus::Ok
    );
    let v: serde_json::Value = serde_json::from_str(&owned(json)).unwrap();
    assert_eq!(v["mu_upper"], 2.0);
}

#[test]
fn bounds() {
    let mut mu = 0.0;
    assert_eq!(unsafe { gcfx_bounded_bound(1, 1, 3, 3, &mut mu) }, GcfxStatus::Ok);
    assert_eq!(mu, 2.0);
    assert_eq!(
        unsafe { gcfx_bounded_bound(1, 2, 1, 1, &mut mu) },
        GcfxStatus::ConditionViolated
    );
    assert_eq!(unsafe { gcfx_lemma_bound(0.25, &mut mu) }, GcfxStatus::Ok);
    assert!((mu - 2.0 - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn plans() {
    let s = CString::new("3").unwrap();
    let mut plan = ptr::null_mut();
    assert_eq!(unsafe { gcfx_plan_new(s.as_ptr(), 4, &mut plan) }, GcfxStatus::Ok);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { gcfx_plan_json(plan, &mut json) }, GcfxStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&owned(json)).unwrap();
    assert_eq!(v["blocks"].as_array().unwrap().len(), 4);
    let mut audit = ptr::null_mut();
    assert_eq!(unsafe { gcfx_plan_audit_json(plan, 5, &mut audit) }, GcfxStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&owned(audit)).unwrap();
    assert_eq!(v["upper_holds"], true);
    let mut bad = ptr::null_mut();
    assert_eq!(
        unsafe { gcfx_plan_audit_json(plan, 4, &mut bad) },
        GcfxStatus::InvalidArgument
    );
    unsafe { gcfx_plan_free(plan) };

    let junk = CString::new("1/2").unwrap();
    let mut none = ptr::null_mut();
    assert_eq!(
        unsafe { gcfx_plan_new(junk.as_ptr(), 4, &mut none) },
        GcfxStatus::InvalidArgument
    );
    assert!(none.is_null());
}

#[test]
fn null_handles() {
    let mut nu = 0.0;
    assert_eq!(
        unsafe { gcfx_stream_nu_estimate(ptr::null(), 10, 5, &mut nu) },
        GcfxStatus::NullPointer
    );
    assert_eq!(
        unsafe { gcfx_stream_family(ptr::null(), ptr::null(), &mut ptr::null_mut()) },
        GcfxStatus::NullPointer
    );
    unsafe {
        gcfx_stream_free(ptr::null_mut());
        gcfx_plan_free(ptr::null_mut());
        gcfx_string_free(ptr::null_mut());
    }
    let v = unsafe { CStr::from_ptr(gcfx_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn profile_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_header() {
    let dir = profile_dir();
    let lib = dir.join("libgcfx_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no static library or C compiler");
        return;
    }
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let bin = dir.join("gcfx_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).contains("ok"));
}
