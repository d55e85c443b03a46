use std::ffi::{CStr, CString};
use std::ptr;

use reskit_ffi::*;

const CONFIG: &str = r#"{
  "problem": {"domain": {"kind": "unit_disk"}, "case": "exp_harmonic"},
  "method": {"name": "trefftz", "max_order": 8},
  "discretization": {"n_boundary": 40},
  "output": {"dir": "."}
}"#;

fn last_error() -> String {
    let p = reskit_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn solve_round_trip() {
    let json = CString::new(CONFIG).unwrap();
    let mut cfg = ptr::null_mut();
    unsafe {
        assert_eq!(reskit_config_from_json(json.as_ptr(), &mut cfg), ReskitStatus::Ok);
        let mut cert = ptr::null_mut();
        assert_eq!(reskit_solve(cfg, &mut cert), ReskitStatus::Ok);

        let (mut bound, mut mp) = (0.0, -1);
        assert_eq!(reskit_certificate_bound(cert, &mut bound, &mut mp), ReskitStatus::Ok);
        assert_eq!(mp, 1);
        assert!(bound > 0.0 && bound < 1e-4, "bound {bound}");

        let mut dim = 0usize;
        assert_eq!(reskit_certificate_dimension(cert, &mut dim), ReskitStatus::Ok);
        assert_eq!(dim, 17);

        let mut err = 0.0;
        assert_eq!(reskit_certificate_true_error(cert, &mut err), ReskitStatus::Ok);
        assert!(err <= bound * 1.05);

        let mut res = 0.0;
        assert_eq!(reskit_certificate_combined_residual(cert, &mut res), ReskitStatus::Ok);
        assert!(res.is_finite());

        let mut text = ptr::null_mut();
        assert_eq!(reskit_certificate_to_json(cert, &mut text), ReskitStatus::Ok);
        let parsed: serde_json::Value =
            serde_json::from_str(CStr::from_ptr(text).to_str().unwrap()).unwrap();
        assert_eq!(parsed["M"], 17);
        reskit_string_free(text);

        reskit_certificate_free(cert);
        reskit_config_free(cfg);
    }
}

#[test]
fn bad_config_reports_config_status() {
    let json = CString::new(r#"{"problem": 3}"#).unwrap();
    let mut cfg = ptr::null_mut();
    let st = unsafe { reskit_config_from_json(json.as_ptr(), &mut cfg) };
    assert_eq!(st, ReskitStatus::ConfigInvalid);
    assert!(cfg.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn null_arguments_are_rejected() {
    let mut cfg = ptr::null_mut();
    let st = unsafe { reskit_config_from_json(ptr::null(), &mut cfg) };
    assert_eq!(st, ReskitStatus::NullPointer);
    let mut cert = ptr::null_mut();
    assert_eq!(unsafe { reskit_solve(ptr::null(), &mut cert) }, ReskitStatus::NullPointer);
    unsafe {
        reskit_config_free(ptr::null_mut());
        reskit_certificate_free(ptr::null_mut());
        reskit_string_free(ptr::null_mut());
    }
}

#[test]
fn lebesgue_constant_of_three_points() {
    let nodes = [-1.0, 0.0, 1.0];
    let mut out = 0.0;
    let st = unsafe { reskit_lebesgue_constant(nodes.as_ptr(), 3, 2001, &mut out) };
    assert_eq!(st, ReskitStatus::Ok);
    assert!((out - 1.25).abs() < 1e-12, "{out}");
}

#[test]
fn stability_lab_csv_and_invalid_selectors() {
    let orders = [5usize, 10];
    let mut out = ptr::null_mut();
    let st = unsafe {
        reskit_stability_lab_csv(
            RESKIT_FAMILY_CHEBYSHEV,
            RESKIT_OVERSAMPLING_NONE,
            orders.as_ptr(),
            orders.len(),
            &mut out,
        )
    };
    assert_eq!(st, ReskitStatus::Ok);
    let csv = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    unsafe { reskit_string_free(out) };
    assert_eq!(csv.lines().count(), 3, "{csv}");

    let st = unsafe { reskit_stability_lab_csv(7, 0, orders.as_ptr(), 2, &mut out) };
    assert_eq!(st, ReskitStatus::InvalidArgument);
    assert!(last_error().contains("family"));
}

#[test]
fn version_is_nonempty() {
    let v = unsafe { CStr::from_ptr(reskit_version()) };
    assert!(!v.to_bytes().is_empty());
}
