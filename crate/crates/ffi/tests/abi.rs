use std::ffi::{CStr, CString};
use std::ptr;

use approx::assert_relative_eq;
use cvsteer_ffi::*;

fn tmsv(r: f64) -> *mut CvsCovMatrix {
    let mut cm = ptr::null_mut();
    assert_eq!(unsafe { cvs_tmsv(r, &mut cm) }, CvsStatus::Ok);
    assert!(!cm.is_null());
    cm
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(cvs_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn handle_round_trip() {
    let entries: [f64; 16] = [
        2.0, 0.0, 1.0, 0.0, //
        0.0, 2.0, 0.0, -1.0, //
        1.0, 0.0, 2.0, 0.0, //
        0.0, -1.0, 0.0, 2.0,
    ];
    let mut cm = ptr::null_mut();
    assert_eq!(
        unsafe { cvs_cov_matrix_new(entries.as_ptr(), &mut cm) },
        CvsStatus::Ok
    );
    let mut back = [0.0; 16];
    assert_eq!(
        unsafe { cvs_cov_matrix_entries(cm, back.as_mut_ptr()) },
        CvsStatus::Ok
    );
    assert_eq!(back, entries);

    let mut inv = CvsLocalInvariants::default();
    assert_eq!(unsafe { cvs_local_invariants(cm, &mut inv) }, CvsStatus::Ok);
    assert_relative_eq!(inv.det_a, 4.0, epsilon = 1e-14);
    assert_relative_eq!(inv.det_c, -1.0, epsilon = 1e-14);
    unsafe { cvs_cov_matrix_free(cm) };
}

#[test]
fn unphysical_matrix_rejected() {
    let mut entries = [0.0; 16];
    for i in 0..4 {
        entries[5 * i] = 0.5;
    }
    let mut cm = ptr::null_mut();
    assert_eq!(
        unsafe { cvs_cov_matrix_new(entries.as_ptr(), &mut cm) },
        CvsStatus::Unphysical
    );
    assert!(cm.is_null());
    assert!(last_error().contains("unphysical"), "{}", last_error());
}

#[test]
fn asymmetric_matrix_rejected() {
    let mut entries = [0.0; 16];
    for i in 0..4 {
        entries[5 * i] = 1.0;
    }
    entries[1] = 0.3;
    let mut cm = ptr::null_mut();
    assert_eq!(
        unsafe { cvs_cov_matrix_new(entries.as_ptr(), &mut cm) },
        CvsStatus::NotSymmetric
    );
}

#[test]
fn measures_of_tmsv() {
    let cm = tmsv(1.0);
    let mut g = 0.0;
    assert_eq!(
        unsafe { cvs_gaussian_steering(cm, CvsDirection::AToB, &mut g) },
        CvsStatus::Ok
    );
    assert_relative_eq!(g, 1.325_002_747_357_864_5, epsilon = 1e-10);
    assert_eq!(
        unsafe { cvs_gaussian_steering(cm, CvsDirection::BToA, &mut g) },
        CvsStatus::Ok
    );
    assert_relative_eq!(g, 1.325_002_747_357_864_5, epsilon = 1e-10);

    let (mut np, mut nm) = (0.0, 0.0);
    assert_eq!(
        unsafe { cvs_symplectic_eigenvalues(cm, &mut np, &mut nm) },
        CvsStatus::Ok
    );
    assert_relative_eq!(np, 1.0, epsilon = 1e-12);
    assert_relative_eq!(nm, 1.0, epsilon = 1e-12);

    let mut m = [0.0; 4];
    assert_eq!(
        unsafe { cvs_schur_complement_b(cm, m.as_mut_ptr()) },
        CvsStatus::Ok
    );
    let sech2 = 1.0 / 2.0_f64.cosh();
    assert_relative_eq!(m[0], sech2, epsilon = 1e-12);
    assert_relative_eq!(m[3], sech2, epsilon = 1e-12);

    let mut w = CvsWisemanTest::default();
    assert_eq!(unsafe { cvs_wiseman_test(cm, &mut w) }, CvsStatus::Ok);
    assert!(w.violated_algebraic && w.violated_spectral);

    let mut report = CvsSteeringReport::default();
    assert_eq!(unsafe { cvs_full_report(cm, &mut report) }, CvsStatus::Ok);
    assert!(report.reid_violated);
    assert_relative_eq!(report.key_rate_bound, 1.018_149_927_917_81, epsilon = 1e-10);
    assert_relative_eq!(
        cvs_optimal_key_rate_bound(report.g_a_to_b),
        report.key_rate_bound,
        epsilon = 1e-10
    );

    let mut sf = CvsStandardForm::default();
    assert_eq!(unsafe { cvs_standard_form(cm, &mut sf) }, CvsStatus::Ok);
    assert_relative_eq!(sf.a, 2.0_f64.cosh(), epsilon = 1e-12);
    assert_relative_eq!(sf.c1, 2.0_f64.sinh(), epsilon = 1e-12);
    unsafe { cvs_cov_matrix_free(cm) };
}

#[test]
fn optimizer_through_abi() {
    let mut cm = ptr::null_mut();
    assert_eq!(unsafe { cvs_random_cm(3, 2.0, &mut cm) }, CvsStatus::Ok);
    let mut res = CvsOptimizationResult::default();
    assert_eq!(
        unsafe { cvs_minimize_reid(cm, 8, 42, &mut res) },
        CvsStatus::Ok
    );
    assert!(res.converged);
    assert!(res.gap < 1e-6);
    assert_eq!(res.restarts_used, 9);
    unsafe { cvs_cov_matrix_free(cm) };
}

#[test]
fn optimal_params_through_abi() {
    let sf = CvsStandardForm {
        a: 3.0,
        b: 2.0,
        c1: 1.5,
        c2: -1.0,
    };
    let (mut pa, mut pb) = (
        CvsSymplecticParams::default(),
        CvsSymplecticParams::default(),
    );
    assert_eq!(
        unsafe { cvs_optimal_params(sf, 0.3, 1.0, 2.0, &mut pa, &mut pb) },
        CvsStatus::Ok
    );
    assert_eq!(pb.v, 0.3);
    assert_eq!(pb.w, 2.0);
    let bad = CvsStandardForm { a: 0.5, ..sf };
    assert_eq!(
        unsafe { cvs_optimal_params(bad, 0.3, 1.0, 1.0, &mut pa, &mut pb) },
        CvsStatus::InvalidStandardForm
    );
}

#[test]
fn json_and_sampling() {
    let json =
        CString::new(r#"{"cm": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]], "mean": [0.5,0,0,0]}"#)
            .unwrap();
    let mut state = ptr::null_mut();
    assert_eq!(
        unsafe { cvs_state_from_json(json.as_ptr(), &mut state) },
        CvsStatus::Ok
    );
    let mut p = CvsEmpiricalProducts::default();
    assert_eq!(
        unsafe { cvs_empirical_products(state, 20_000, 1, 10, &mut p) },
        CvsStatus::Ok
    );
    assert_relative_eq!(p.inf_product, 1.0, max_relative = 0.05);
    assert_eq!(p.samples, 20_000);
    assert_eq!(
        unsafe { cvs_empirical_products(state, 100, 1, 10, &mut p) },
        CvsStatus::InsufficientSamples
    );
    unsafe { cvs_state_free(state) };

    let cm = tmsv(0.5);
    let mut g = ptr::null_mut();
    assert_eq!(
        unsafe { cvs_state_gaussian(cm, ptr::null(), &mut g) },
        CvsStatus::Ok
    );
    unsafe {
        cvs_state_free(g);
        cvs_cov_matrix_free(cm);
    }

    let broken = CString::new("{").unwrap();
    let mut cm = ptr::null_mut();
    assert_eq!(
        unsafe { cvs_cov_matrix_from_json(broken.as_ptr(), &mut cm) },
        CvsStatus::Parse
    );
}

#[test]
fn null_arguments() {
    let mut v = 0.0;
    assert_eq!(
        unsafe { cvs_reid_product(ptr::null(), &mut v) },
        CvsStatus::NullPointer
    );
    assert_eq!(
        unsafe { cvs_cov_matrix_new(ptr::null(), ptr::null_mut()) },
        CvsStatus::NullPointer
    );
    unsafe {
        cvs_cov_matrix_free(ptr::null_mut());
        cvs_state_free(ptr::null_mut());
    }
}
