use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use adastream::instances::fixtures;
use adastream_ffi::*;

fn last_error() -> String {
    let p = ads_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn canonical_handle() -> *mut AdsInstance {
    let json = CString::new(adastream::instances::to_json_string(&fixtures::canonical_knapsack())).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { ads_instance_from_json(json.as_ptr(), &mut h) }, AdsStatus::Ok);
    h
}

#[test]
fn canonical_values_through_the_abi() {
    let h = canonical_handle();
    let mut opt = 0.0;
    assert_eq!(unsafe { ads_optimal_value(h, &mut opt) }, AdsStatus::Ok);
    assert!((opt - 2.55).abs() < 1e-9);

    let (mut v, mut a, mut b) = (0.0, 0.0, 0.0);
    assert_eq!(unsafe { ads_estimate_v(h, AdsVMode::DensityGreedy, &mut v, &mut a, &mut b) }, AdsStatus::Ok);
    assert!((v - 2.55).abs() < 1e-9);
    assert_eq!(b, 1.0);

    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { ads_evaluate_json(h, AdsPolicy::MixedSingleton, AdsVMode::DensityGreedy, 0, &mut s) },
        AdsStatus::Ok
    );
    let report: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(s) }.to_str().unwrap()).unwrap();
    unsafe { ads_string_free(s) };
    assert_eq!(report["per_order"].as_array().unwrap().len(), 6);
    assert!((report["worst_value"].as_f64().unwrap() - 1.45).abs() < 1e-9);

    let mut props = AdsProperties::default();
    assert_eq!(unsafe { ads_check_properties(h, &mut props) }, AdsStatus::Ok);
    assert!(props.adaptive_monotone && props.adaptive_submodular && props.semi_policywise && props.policywise);
    unsafe { ads_instance_free(h) };
}

#[test]
fn errors_map_to_status_codes() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { ads_instance_from_json(ptr::null(), &mut h) }, AdsStatus::NullOrInvalidArgument);
    let bad = CString::new(r#"{"items":[{"id":"x","cost":1}]}"#).unwrap();
    assert_eq!(unsafe { ads_instance_from_json(bad.as_ptr(), &mut h) }, AdsStatus::Model);
    assert!(last_error().contains("items[0].id"));
    let missing = CString::new("/nonexistent/instance.json").unwrap();
    assert_eq!(unsafe { ads_instance_load(missing.as_ptr(), &mut h) }, AdsStatus::Config);
    assert_eq!(unsafe { ads_instance_generate(AdsFamily::Coverage, 40, 2, 2.0, 0, &mut h) }, AdsStatus::CapExceeded);
    assert!(h.is_null());

    // Uniform-cost policy on a knapsack instance.
    let k = canonical_handle();
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { ads_evaluate_json(k, AdsPolicy::ThresholdUniform, AdsVMode::Greedy, 0, &mut s) },
        AdsStatus::Model
    );
    assert!(s.is_null());
    let mut opt = 0.0;
    assert_eq!(unsafe { ads_optimal_value(k, &mut opt) }, AdsStatus::Ok);
    assert!(ads_last_error().is_null());
    unsafe { ads_instance_free(k) };
    assert_eq!(unsafe { ads_optimal_value(ptr::null(), &mut opt) }, AdsStatus::NullOrInvalidArgument);
}

#[test]
fn json_and_hash_round_trip() {
    let h = canonical_handle();
    let (mut json, mut hash) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(unsafe { ads_instance_to_json(h, &mut json) }, AdsStatus::Ok);
    assert_eq!(unsafe { ads_instance_hash(h, &mut hash) }, AdsStatus::Ok);
    let mut again = ptr::null_mut();
    assert_eq!(unsafe { ads_instance_from_json(json, &mut again) }, AdsStatus::Ok);
    let mut hash2 = ptr::null_mut();
    assert_eq!(unsafe { ads_instance_hash(again, &mut hash2) }, AdsStatus::Ok);
    assert_eq!(unsafe { CStr::from_ptr(hash) }, unsafe { CStr::from_ptr(hash2) });
    assert_eq!(unsafe { CStr::from_ptr(hash) }.to_bytes().len(), 64);
    unsafe {
        ads_string_free(json);
        ads_string_free(hash);
        ads_string_free(hash2);
        ads_instance_free(h);
        ads_instance_free(again);
    }
}

/// Compiles a C program against the generated header and the static
/// library, then runs it.
#[test]
fn c_program_links_against_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // tests run from target/<profile>/deps
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libadastream_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let out_dir = tempfile::tempdir().unwrap();
    let exe = out_dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler named `cc` is required");
    assert!(status.success());
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let opt: f64 = String::from_utf8(run.stdout).unwrap().trim().parse().unwrap();
    assert!(opt > 0.0);
}
