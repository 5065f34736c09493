//! C ABI for `cvsteer`.
//!
//! Covariance matrices cross the boundary as opaque `CvsCovMatrix` handles,
//! created by one of the constructors and released with
//! [`cvs_cov_matrix_free`]. Every fallible function returns a [`CvsStatus`];
//! on failure a description is available from [`cvs_last_error_message`] on
//! the same thread. Output pointers are written only on success.
//!
//! Matrices are passed as 16 doubles in row-major order, quadratures ordered
//! `(x_A, p_A, x_B, p_B)`, vacuum units.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use cvsteer::gaussian::{CovMatrix, StandardForm, SymplecticParams};
use cvsteer::states::{GaussianStateSpec, StateSpec};
use cvsteer::{optimizer, sampler, states, steering, Error};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    NotSymmetric = 4,
    NonFinite = 5,
    Unphysical = 6,
    NotPositiveDefinite = 7,
    Singular = 8,
    NotSymplectic = 9,
    InvalidStandardForm = 10,
    NoConvergence = 11,
    DegenerateVariance = 12,
    InsufficientSamples = 13,
    InvalidMixture = 14,
    Panic = 15,
}

impl From<&Error> for CvsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::NotSymmetric { .. } => Self::NotSymmetric,
            Error::NonFinite => Self::NonFinite,
            Error::UnphysicalState { .. } | Error::UnphysicalMixture(_) => Self::Unphysical,
            Error::NotPositiveDefinite => Self::NotPositiveDefinite,
            Error::SingularParams { .. }
            | Error::SingularBlock { .. }
            | Error::SingularMarginal { .. } => Self::Singular,
            Error::NotSymplectic { .. } => Self::NotSymplectic,
            Error::InvalidStandardForm { .. } => Self::InvalidStandardForm,
            Error::NoConvergence { .. } => Self::NoConvergence,
            Error::DegenerateVariance => Self::DegenerateVariance,
            Error::InsufficientSamples { .. } => Self::InsufficientSamples,
            Error::InvalidMixture(_) => Self::InvalidMixture,
            Error::InvalidArgument(_) => Self::InvalidArgument,
            Error::Schema(_) => Self::Parse,
        }
    }
}

/// Opaque covariance-matrix handle.
pub struct CvsCovMatrix {
    inner: CovMatrix,
}

/// Opaque state handle for sampling: a Gaussian state with first moments
/// or a Gaussian mixture.
pub struct CvsState {
    inner: StateSpec,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvsDirection {
    AToB = 0,
    BToA = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CvsLocalInvariants {
    pub det_a: f64,
    pub det_b: f64,
    pub det_c: f64,
    pub det_sigma: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CvsStandardForm {
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
}

/// Chart coordinates of a 2×2 symplectic matrix
/// `[[1/((1-uv)w), v/((1-uv)w)], [u w, w]]`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CvsSymplecticParams {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CvsWisemanTest {
    pub det_m_b: f64,
    pub min_eigenvalue: f64,
    pub violated_algebraic: bool,
    pub violated_spectral: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CvsSteeringReport {
    pub det_m_b: f64,
    pub det_m_a: f64,
    pub g_a_to_b: f64,
    pub g_b_to_a: f64,
    pub reid_product_as_given: f64,
    pub reid_violated: bool,
    pub wiseman_violated_a_to_b: bool,
    pub key_rate_bound: f64,
    pub optimal_key_rate_bound: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CvsOptimizationResult {
    pub min_value: f64,
    pub argmin_a: CvsSymplecticParams,
    pub argmin_b: CvsSymplecticParams,
    pub iterations: usize,
    pub restarts_used: usize,
    pub converged: bool,
    pub det_m_b: f64,
    pub gap: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CvsEmpiricalProducts {
    pub inf_product: f64,
    pub min_product: f64,
    pub inf_product_sigma: f64,
    pub min_product_sigma: f64,
    pub gap_sigma: f64,
    pub samples: usize,
    pub bins: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Message of the most recent failure on the calling thread, or NULL. The
/// pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn cvs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cvs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Self::Lib(e)
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> CvsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CvsStatus::Ok,
        Ok(Err(Fail::Null(name))) => {
            set_last_error(format!("null pointer: {name}"));
            CvsStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            let status = CvsStatus::from(&e);
            set_last_error(e.to_string());
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal error: {msg}"));
            CvsStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(name))
}

unsafe fn out<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(name))
}

unsafe fn read16(p: *const f64) -> Result<[[f64; 4]; 4], Fail> {
    if p.is_null() {
        return Err(Fail::Null("entries"));
    }
    let s = std::slice::from_raw_parts(p, 16);
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| s[4 * i + j])
    }))
}

fn boxed_cm(cm: CovMatrix) -> *mut CvsCovMatrix {
    Box::into_raw(Box::new(CvsCovMatrix { inner: cm }))
}

fn params(p: &SymplecticParams) -> CvsSymplecticParams {
    CvsSymplecticParams {
        u: p.u,
        v: p.v,
        w: p.w,
    }
}

/// Validates 16 row-major entries and returns a new handle in `*out`.
///
/// # Safety
/// `entries` must point to 16 readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_cov_matrix_new(
    entries: *const f64,
    out_cm: *mut *mut CvsCovMatrix,
) -> CvsStatus {
    guard(|| {
        let rows = read16(entries)?;
        let slot = out(out_cm, "out")?;
        *slot = boxed_cm(CovMatrix::from_rows(rows)?);
        Ok(())
    })
}

/// Parses a Gaussian or mixture state file; for a mixture the handle holds
/// the mixture's covariance matrix.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_cov_matrix_from_json(
    json: *const c_char,
    out_cm: *mut *mut CvsCovMatrix,
) -> CvsStatus {
    guard(|| {
        if json.is_null() {
            return Err(Fail::Null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Error::Schema(e.to_string()))?;
        let state = cvsteer::io::parse_state(text)?;
        let slot = out(out_cm, "out")?;
        *slot = boxed_cm(state.cm());
        Ok(())
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `cm` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cvs_cov_matrix_free(cm: *mut CvsCovMatrix) {
    if !cm.is_null() {
        drop(Box::from_raw(cm));
    }
}

/// Copies the 16 entries, row-major, into `entries`.
///
/// # Safety
/// `cm` must be a live handle; `entries` must have room for 16 doubles.
#[no_mangle]
pub unsafe extern "C" fn cvs_cov_matrix_entries(
    cm: *const CvsCovMatrix,
    entries: *mut f64,
) -> CvsStatus {
    guard(|| {
        let cm = deref(cm, "cm")?;
        if entries.is_null() {
            return Err(Fail::Null("entries"));
        }
        let dst = std::slice::from_raw_parts_mut(entries, 16);
        for (i, row) in cm.inner.to_rows().iter().enumerate() {
            dst[4 * i..4 * i + 4].copy_from_slice(row);
        }
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_vacuum(out_cm: *mut *mut CvsCovMatrix) -> CvsStatus {
    guard(|| {
        *out(out_cm, "out")? = boxed_cm(CovMatrix::vacuum());
        Ok(())
    })
}

/// Two-mode squeezed vacuum in standard form.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_tmsv(r: f64, out_cm: *mut *mut CvsCovMatrix) -> CvsStatus {
    guard(|| {
        let cm = states::tmsv(r)?.cm;
        *out(out_cm, "out")? = boxed_cm(cm);
        Ok(())
    })
}

/// Two-mode squeezed vacuum plus `diag(n_a, n_a, n_b, n_b)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_noisy_tmsv(
    r: f64,
    n_a: f64,
    n_b: f64,
    out_cm: *mut *mut CvsCovMatrix,
) -> CvsStatus {
    guard(|| {
        let cm = states::noisy_tmsv(r, n_a, n_b)?.cm;
        *out(out_cm, "out")? = boxed_cm(cm);
        Ok(())
    })
}

/// Seeded random bona fide covariance matrix.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_random_cm(
    seed: u64,
    max_thermal: f64,
    out_cm: *mut *mut CvsCovMatrix,
) -> CvsStatus {
    guard(|| {
        let cm = states::random_cm(seed, max_thermal)?.cm;
        *out(out_cm, "out")? = boxed_cm(cm);
        Ok(())
    })
}

/// Symplectic eigenvalues, `nu_plus ≥ nu_minus`.
///
/// # Safety
/// `cm` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_symplectic_eigenvalues(
    cm: *const CvsCovMatrix,
    nu_plus: *mut f64,
    nu_minus: *mut f64,
) -> CvsStatus {
    guard(|| {
        let (p, m) = deref(cm, "cm")?.inner.symplectic_eigenvalues();
        let (op, om) = (out(nu_plus, "nu_plus")?, out(nu_minus, "nu_minus")?);
        *op = p;
        *om = m;
        Ok(())
    })
}

/// Smallest eigenvalue of `σ + iΩ`; non-negative for physical states.
///
/// # Safety
/// `cm` must be a live handle; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_min_uncertainty_eigenvalue(
    cm: *const CvsCovMatrix,
    value: *mut f64,
) -> CvsStatus {
    guard(|| {
        let v = deref(cm, "cm")?.inner.min_uncertainty_eigenvalue();
        *out(value, "value")? = v;
        Ok(())
    })
}

/// # Safety
/// `cm` must be a live handle; `inv` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_local_invariants(
    cm: *const CvsCovMatrix,
    inv: *mut CvsLocalInvariants,
) -> CvsStatus {
    guard(|| {
        let i = deref(cm, "cm")?.inner.local_invariants();
        *out(inv, "inv")? = CvsLocalInvariants {
            det_a: i.det_a,
            det_b: i.det_b,
            det_c: i.det_c,
            det_sigma: i.det_sigma,
        };
        Ok(())
    })
}

/// Standard-form parameters `(a, b, c1, c2)` with `c1 ≥ |c2|`.
///
/// # Safety
/// `cm` must be a live handle; `sf` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_standard_form(
    cm: *const CvsCovMatrix,
    sf: *mut CvsStandardForm,
) -> CvsStatus {
    guard(|| {
        let (f, _) = deref(cm, "cm")?.inner.to_standard_form();
        *out(sf, "sf")? = CvsStandardForm {
            a: f.a(),
            b: f.b(),
            c1: f.c1(),
            c2: f.c2(),
        };
        Ok(())
    })
}

/// `M_σ^B = B - Cᵀ A⁻¹ C`, row-major into `m` (4 doubles).
///
/// # Safety
/// `cm` must be a live handle; `m` must have room for 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn cvs_schur_complement_b(cm: *const CvsCovMatrix, m: *mut f64) -> CvsStatus {
    guard(|| {
        let s = steering::schur_complement_b(&deref(cm, "cm")?.inner)?;
        if m.is_null() {
            return Err(Fail::Null("m"));
        }
        let dst = std::slice::from_raw_parts_mut(m, 4);
        dst.copy_from_slice(&[s[(0, 0)], s[(0, 1)], s[(1, 0)], s[(1, 1)]]);
        Ok(())
    })
}

/// Gaussian steering measure in the given direction.
///
/// # Safety
/// `cm` must be a live handle; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_gaussian_steering(
    cm: *const CvsCovMatrix,
    direction: CvsDirection,
    value: *mut f64,
) -> CvsStatus {
    guard(|| {
        let cm = &deref(cm, "cm")?.inner;
        let g = match direction {
            CvsDirection::AToB => steering::gaussian_steering_a_to_b(cm)?,
            CvsDirection::BToA => steering::gaussian_steering_b_to_a(cm)?,
        };
        *out(value, "value")? = g;
        Ok(())
    })
}

/// Reid product of inference variances in the current basis.
///
/// # Safety
/// `cm` must be a live handle; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_reid_product(cm: *const CvsCovMatrix, value: *mut f64) -> CvsStatus {
    guard(|| {
        let r = steering::reid_product(&deref(cm, "cm")?.inner)?;
        *out(value, "value")? = r;
        Ok(())
    })
}

/// Algebraic and spectral forms of the Gaussian steering criterion.
///
/// # Safety
/// `cm` must be a live handle; `test` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_wiseman_test(
    cm: *const CvsCovMatrix,
    test: *mut CvsWisemanTest,
) -> CvsStatus {
    guard(|| {
        let t = steering::wiseman_test(&deref(cm, "cm")?.inner)?;
        *out(test, "test")? = CvsWisemanTest {
            det_m_b: t.det_m_b,
            min_eigenvalue: t.min_eigenvalue,
            violated_algebraic: t.violated_algebraic,
            violated_spectral: t.violated_spectral,
        };
        Ok(())
    })
}

/// Key-rate bound from the Reid product in the current basis.
///
/// # Safety
/// `cm` must be a live handle; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_key_rate_bound(cm: *const CvsCovMatrix, value: *mut f64) -> CvsStatus {
    guard(|| {
        let k = steering::key_rate_bound(&deref(cm, "cm")?.inner)?;
        *out(value, "value")? = k;
        Ok(())
    })
}

/// `max{0, s + ln 2 - 1}`.
#[no_mangle]
pub extern "C" fn cvs_optimal_key_rate_bound(s_lower: f64) -> f64 {
    steering::optimal_key_rate_bound(s_lower)
}

/// # Safety
/// `cm` must be a live handle; `report` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_full_report(
    cm: *const CvsCovMatrix,
    report: *mut CvsSteeringReport,
) -> CvsStatus {
    guard(|| {
        let r = steering::full_report(&deref(cm, "cm")?.inner)?;
        *out(report, "report")? = CvsSteeringReport {
            det_m_b: r.det_m_b,
            det_m_a: r.det_m_a,
            g_a_to_b: r.g_a_to_b,
            g_b_to_a: r.g_b_to_a,
            reid_product_as_given: r.reid_product_as_given,
            reid_violated: r.reid_violated,
            wiseman_violated_a_to_b: r.wiseman_violated_a_to_b,
            key_rate_bound: r.key_rate_bound,
            optimal_key_rate_bound: r.optimal_key_rate_bound,
        };
        Ok(())
    })
}

/// Closed-form minimizing parameters for the standard form `(a, b, c1, c2)`.
///
/// # Safety
/// `pa` and `pb` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_optimal_params(
    sf: CvsStandardForm,
    v_b: f64,
    w_a: f64,
    w_b: f64,
    pa: *mut CvsSymplecticParams,
    pb: *mut CvsSymplecticParams,
) -> CvsStatus {
    guard(|| {
        let f = StandardForm::new(sf.a, sf.b, sf.c1, sf.c2)?;
        let (a, b) = steering::optimal_params(&f, v_b, w_a, w_b)?;
        let (oa, ob) = (out(pa, "pa")?, out(pb, "pb")?);
        *oa = params(&a);
        *ob = params(&b);
        Ok(())
    })
}

/// Multi-start minimization of the Reid product. Returns
/// `CvsStatus::NoConvergence` if the closed-form minimum is not reached.
///
/// # Safety
/// `cm` must be a live handle; `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_minimize_reid(
    cm: *const CvsCovMatrix,
    restarts: usize,
    seed: u64,
    result: *mut CvsOptimizationResult,
) -> CvsStatus {
    guard(|| {
        let r = optimizer::minimize_reid(&deref(cm, "cm")?.inner, restarts, seed)?;
        *out(result, "result")? = CvsOptimizationResult {
            min_value: r.min_value,
            argmin_a: params(&r.argmin.0),
            argmin_b: params(&r.argmin.1),
            iterations: r.iterations,
            restarts_used: r.restarts_used,
            converged: r.converged,
            det_m_b: r.det_m_b,
            gap: r.gap,
        };
        Ok(())
    })
}

/// Gaussian state with covariance `cm` and first moments `mean` (4 doubles,
/// NULL for zero).
///
/// # Safety
/// `cm` must be a live handle; `mean` NULL or 4 readable doubles; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_state_gaussian(
    cm: *const CvsCovMatrix,
    mean: *const f64,
    out_state: *mut *mut CvsState,
) -> CvsStatus {
    guard(|| {
        let cm = deref(cm, "cm")?.inner;
        let mean = if mean.is_null() {
            [0.0; 4]
        } else {
            std::array::from_fn(|i| *mean.add(i))
        };
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite.into());
        }
        let state = StateSpec::from(GaussianStateSpec::with_mean(cm, mean));
        *out(out_state, "out")? = Box::into_raw(Box::new(CvsState { inner: state }));
        Ok(())
    })
}

/// State from a Gaussian or mixture JSON document.
///
/// # Safety
/// `json` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_state_from_json(
    json: *const c_char,
    out_state: *mut *mut CvsState,
) -> CvsStatus {
    guard(|| {
        if json.is_null() {
            return Err(Fail::Null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Error::Schema(e.to_string()))?;
        let state = cvsteer::io::parse_state(text)?;
        *out(out_state, "out")? = Box::into_raw(Box::new(CvsState { inner: state }));
        Ok(())
    })
}

/// # Safety
/// `state` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cvs_state_free(state: *mut CvsState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Monte Carlo estimate of the inference-variance products with bootstrap
/// error bars; `samples` per quadrature pair.
///
/// # Safety
/// `state` must be a live handle; `result` writable.
#[no_mangle]
pub unsafe extern "C" fn cvs_empirical_products(
    state: *const CvsState,
    samples: usize,
    seed: u64,
    bins: usize,
    result: *mut CvsEmpiricalProducts,
) -> CvsStatus {
    guard(|| {
        let p = sampler::empirical_products(&deref(state, "state")?.inner, samples, seed, bins)?;
        *out(result, "result")? = CvsEmpiricalProducts {
            inf_product: p.inf_product,
            min_product: p.min_product,
            inf_product_sigma: p.inf_product_sigma,
            min_product_sigma: p.min_product_sigma,
            gap_sigma: p.gap_sigma,
            samples: p.samples,
            bins: p.bins,
        };
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn status_mapping() {
        assert_eq!(
            CvsStatus::from(&Error::UnphysicalState {
                min_eigenvalue: -1.0
            }),
            CvsStatus::Unphysical
        );
        assert_eq!(
            CvsStatus::from(&Error::Schema("x".into())),
            CvsStatus::Parse
        );
    }

    #[test]
    fn null_output_is_reported() {
        let st = unsafe { cvs_tmsv(0.5, ptr::null_mut()) };
        assert_eq!(st, CvsStatus::NullPointer);
        let msg = unsafe { CStr::from_ptr(cvs_last_error_message()) };
        assert_eq!(msg.to_str().unwrap(), "null pointer: out");
    }

    #[test]
    fn version_is_nul_terminated() {
        let v = unsafe { CStr::from_ptr(cvs_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
