use std::ffi::CStr;
use std::ptr;

use chemotaxis_waves_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    let n = unsafe { cw_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n < buf.len());
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn params(a: f64, b: f64, chi: f64, tau: f64) -> *mut CwParams {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { cw_params_new(a, b, chi, tau, &mut p) }, CwStatus::Ok);
    assert!(!p.is_null());
    p
}

#[test]
fn invalid_parameters_report_domain_error() {
    let mut p = ptr::null_mut();
    let status = unsafe { cw_params_new(-1.0, 1.0, 0.1, 0.5, &mut p) };
    assert_eq!(status, CwStatus::Domain);
    assert!(p.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn null_out_pointer_is_rejected() {
    let status = unsafe { cw_params_new(1.0, 1.0, 0.1, 0.5, ptr::null_mut()) };
    assert_eq!(status, CwStatus::NullPointer);
    assert!(last_error().contains("NULL"));
    assert_eq!(
        unsafe { cw_admissible_window(ptr::null(), ptr::null_mut()) },
        CwStatus::NullPointer
    );
}

#[test]
fn window_matches_library() {
    let p = params(1.0, 1.0, 0.01, 0.5);
    let mut w = CwSpeedWindow::default();
    assert_eq!(unsafe { cw_admissible_window(p, &mut w) }, CwStatus::Ok);
    let lib =
        chemotaxis_waves::params::admissible_window(&chemotaxis_waves::ModelParams::new(1.0, 1.0, 0.01, 0.5).unwrap())
            .unwrap();
    assert_eq!(w.c_star, lib.c_star);
    assert_eq!(w.c_star2, lib.c_star2);
    assert_eq!(w.chi_star, lib.chi_star);
    assert!(w.mu_star2 < w.mu_star);

    let mut m = 0.0;
    assert_eq!(unsafe { cw_m_tau(1.0, 0.5, &mut m) }, CwStatus::Ok);
    assert_eq!(m, w.m_tau);
    unsafe { cw_params_free(p) };
}

#[test]
fn window_undefined_without_chemotaxis() {
    let p = params(1.0, 1.0, 0.0, 0.5);
    let mut w = CwSpeedWindow::default();
    assert_eq!(unsafe { cw_admissible_window(p, &mut w) }, CwStatus::WindowUndefined);
    unsafe { cw_params_free(p) };
}

#[test]
fn speed_below_minimum_has_no_root() {
    let p = params(1.0, 1.0, 0.01, 0.5);
    let mut mu = 0.0;
    assert_eq!(unsafe { cw_mu_from_speed(p, 1.5, &mut mu) }, CwStatus::NoRoot);
    assert_eq!(unsafe { cw_mu_from_speed(p, 2.5, &mut mu) }, CwStatus::Ok);
    assert!((mu * mu - 2.5 * mu + 1.0).abs() < 1e-12);
    unsafe { cw_params_free(p) };
}

#[test]
fn wave_roundtrip() {
    let p = params(1.0, 1.0, 0.01, 0.5);
    let mut w = ptr::null_mut();
    assert_eq!(unsafe { cw_wave_solve(p, 2.5, 0.1, &mut w) }, CwStatus::Ok);
    let n = unsafe { cw_wave_len(w) };
    assert!(n > 100);

    let mut s = CwWaveSummary::default();
    assert_eq!(unsafe { cw_wave_summary(w, &mut s) }, CwStatus::Ok);
    assert!(s.residual_norm <= s.residual_tolerance);
    assert!((s.left_state - 1.0).abs() < 0.01);

    let (mut x, mut u) = (vec![0.0; n], vec![0.0; n]);
    assert_eq!(
        unsafe { cw_wave_copy(w, x.as_mut_ptr(), u.as_mut_ptr(), ptr::null_mut(), n - 1) },
        CwStatus::BufferTooSmall
    );
    assert_eq!(
        unsafe { cw_wave_copy(w, x.as_mut_ptr(), u.as_mut_ptr(), ptr::null_mut(), n) },
        CwStatus::Ok
    );
    assert!(x.windows(2).all(|p| p[1] > p[0]));
    assert!(u.windows(2).all(|p| p[1] <= p[0] + 1e-9));
    unsafe {
        cw_wave_free(w);
        cw_params_free(p);
        cw_wave_free(ptr::null_mut());
        cw_params_free(ptr::null_mut());
    }
    assert_eq!(unsafe { cw_wave_len(ptr::null()) }, 0);
}

#[test]
fn error_message_truncates() {
    let mut p = ptr::null_mut();
    unsafe { cw_params_new(1.0, -1.0, 0.1, 0.5, &mut p) };
    let mut buf = [0 as std::ffi::c_char; 4];
    let n = unsafe { cw_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n >= 4);
    assert_eq!(buf[3], 0);
    assert_eq!(unsafe { cw_last_error_message(ptr::null_mut(), 0) }, n);
}
