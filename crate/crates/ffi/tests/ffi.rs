use std::ffi::{c_void, CStr};
use std::ptr;

use mopm::distributions::{draw, LawSpec};
use mopm::kernels::VarianceKernel;
use mopm::Seed;
use mopm_ffi::*;

fn sample_of(values: &[f64]) -> *mut MopmSample {
    let mut s = ptr::null_mut();
    let status = unsafe { mopm_sample_new(values.as_ptr(), values.len(), 1, &mut s) };
    assert_eq!(status, MopmStatus::Ok);
    s
}

fn variance_kernel() -> *mut MopmKernel {
    let mut k = ptr::null_mut();
    assert_eq!(unsafe { mopm_kernel_new_variance(&mut k) }, MopmStatus::Ok);
    k
}

fn last_error() -> String {
    let p = mopm_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn blank_plan() -> MopmPlan {
    MopmPlan {
        estimator: MopmEstimator::Mom,
        n: 0,
        delta: 0.0,
        tau: 0.0,
        k: 0,
        b: 0,
        m: 0,
        has_radius: false,
        radius: 0.0,
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(mopm_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn planners_match_the_core_crate() {
    let mut p = blank_plan();
    assert_eq!(unsafe { mopm_plan_mom(1000, 0.001, 1.0, &mut p) }, MopmStatus::Ok);
    assert_eq!((p.estimator, p.k, p.b), (MopmEstimator::Mom, 7, 142));
    assert!(p.has_radius);
    assert!((p.radius - 0.6837).abs() < 1e-4);
    assert!(p.tau.is_nan());

    assert_eq!(
        unsafe { mopm_plan_moru(1000, 0.001, 0.45, 0.5, 1.0, &mut p) },
        MopmStatus::Ok
    );
    assert_eq!((p.estimator, p.k, p.b), (MopmEstimator::Moru, 1521, 23));
    assert_eq!(p.tau, 0.45);

    assert_eq!(
        unsafe { mopm_plan_mou(1000, 0.001, 0.5, 1.0, &mut p) },
        MopmStatus::Ok
    );
    assert_eq!((p.k, p.b), (32, 31));
}

#[test]
fn infeasible_plans_report_out_of_range() {
    let mut p = blank_plan();
    let status = unsafe { mopm_plan_mou(50, 1e-9, 0.5, 1.0, &mut p) };
    assert_eq!(status, MopmStatus::OutOfRange);
    assert!(!last_error().is_empty());
    let status = unsafe { mopm_plan_mom(1000, 1.5, 1.0, &mut p) };
    assert_ne!(status, MopmStatus::Ok);
}

#[test]
fn null_pointers_are_rejected() {
    let mut out = 0.0;
    assert_eq!(
        unsafe { mopm_mom(ptr::null(), 3, 0, &mut out) },
        MopmStatus::NullPointer
    );
    assert!(last_error().contains("NULL"));
    let s = sample_of(&[1.0, 2.0, 3.0]);
    assert_eq!(
        unsafe { mopm_mom(s, 1, 0, ptr::null_mut()) },
        MopmStatus::NullPointer
    );
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { mopm_kernel_new_callback(None, ptr::null_mut(), &mut h) },
        MopmStatus::NullPointer
    );
    assert_eq!(
        unsafe { mopm_median(ptr::null(), 3, &mut out) },
        MopmStatus::NullPointer
    );
    unsafe {
        mopm_sample_free(s);
        mopm_sample_free(ptr::null_mut());
        mopm_kernel_free(ptr::null_mut());
    }
}

#[test]
fn median_and_errors() {
    let mut out = 0.0;
    let v = [4.0, 1.0, 3.0, 2.0];
    assert_eq!(unsafe { mopm_median(v.as_ptr(), 4, &mut out) }, MopmStatus::Ok);
    assert_eq!(out, 2.0);
    let s = sample_of(&[1.0, 2.0]);
    assert_eq!(
        unsafe { mopm_mom(s, 5, 0, &mut out) },
        MopmStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { mopm_mom(s, 0, 0, &mut out) },
        MopmStatus::InvalidArgument
    );
    assert_eq!(unsafe { mopm_sample_len(s) }, 2);
    unsafe { mopm_sample_free(s) };
}

#[test]
fn estimators_agree_with_the_core_crate() {
    let x = draw(LawSpec::student3(), 600, Seed(3));
    let values = x.scalars().unwrap().to_vec();
    let s = sample_of(&values);
    let h = variance_kernel();
    let mut out = 0.0;

    assert_eq!(unsafe { mopm_mom(s, 7, 11, &mut out) }, MopmStatus::Ok);
    assert_eq!(out, mopm::mean_estimators::mom(&x, 7, Seed(11)).unwrap().value);

    assert_eq!(unsafe { mopm_mou(s, h, 10, 12, &mut out) }, MopmStatus::Ok);
    assert_eq!(
        out,
        mopm::ustat_estimators::mou(&x, &VarianceKernel, 10, Seed(12))
            .unwrap()
            .value
    );

    assert_eq!(unsafe { mopm_moru(s, h, 25, 20, 13, &mut out) }, MopmStatus::Ok);
    assert_eq!(
        out,
        mopm::ustat_estimators::moru(&x, &VarianceKernel, 25, 20, Seed(13))
            .unwrap()
            .value
    );

    assert_eq!(unsafe { mopm_complete_ustat(s, h, &mut out) }, MopmStatus::Ok);
    assert_eq!(out, mopm::kernels::complete_ustat(&x, &VarianceKernel).unwrap());

    unsafe {
        mopm_kernel_free(h);
        mopm_sample_free(s);
    }
}

unsafe extern "C" fn scaled_abs_diff(x: *const f64, y: *const f64, dim: usize, ctx: *mut c_void) -> f64 {
    let scale = *(ctx as *const f64);
    let (x, y) = (
        std::slice::from_raw_parts(x, dim),
        std::slice::from_raw_parts(y, dim),
    );
    scale * x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[test]
fn callback_kernels_see_points_and_context() {
    let mut scale = 2.0f64;
    let mut h = ptr::null_mut();
    let status = unsafe {
        mopm_kernel_new_callback(
            Some(scaled_abs_diff),
            &mut scale as *mut f64 as *mut c_void,
            &mut h,
        )
    };
    assert_eq!(status, MopmStatus::Ok);
    let s = sample_of(&[1.0, 2.0, 4.0]);
    let mut out = 0.0;
    assert_eq!(unsafe { mopm_complete_ustat(s, h, &mut out) }, MopmStatus::Ok);
    assert!((out - 2.0 * (1.0 + 3.0 + 2.0) / 3.0).abs() < 1e-12);
    unsafe {
        mopm_kernel_free(h);
        mopm_sample_free(s);
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/mopm.h")).unwrap();
    for name in [
        "mopm_sample_new",
        "mopm_mou",
        "mopm_plan_moru",
        "MOPM_STATUS_OUT_OF_RANGE",
        "MopmPlan",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
