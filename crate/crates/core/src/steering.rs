//! Closed-form steering quantities computed from second moments.
//!
//! All logarithms are natural; measures and key rates are in nats.

use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{omega, CovMatrix, LocalSymplectic, StandardForm, SymplecticParams};
use crate::report::sig12;
use crate::{dd, linalg};

/// Determinants at or below this are treated as singular.
pub const SINGULAR_DET: f64 = 1e-14;

/// `M_σ^B = B - Cᵀ A⁻¹ C`, the Schur complement of `A`.
pub fn schur_complement_b(cm: &CovMatrix) -> Result<Matrix2<f64>> {
    schur(&cm.a(), &cm.b(), &cm.c())
}

/// `M_σ^A = A - C B⁻¹ Cᵀ`, the Schur complement of `B`.
pub fn schur_complement_a(cm: &CovMatrix) -> Result<Matrix2<f64>> {
    schur(&cm.b(), &cm.a(), &cm.c().transpose())
}

/// `det M_σ^B`, evaluated in double-double so it keeps its digits near 1.
pub fn det_schur_complement_b(cm: &CovMatrix) -> Result<f64> {
    Ok(dd::det2(&schur_dd(&cm.a(), &cm.b(), &cm.c())?).to_f64())
}

/// `det M_σ^A`, evaluated in double-double.
pub fn det_schur_complement_a(cm: &CovMatrix) -> Result<f64> {
    Ok(dd::det2(&schur_dd(&cm.b(), &cm.a(), &cm.c().transpose())?).to_f64())
}

fn schur_dd(cond: &Matrix2<f64>, target: &Matrix2<f64>, c: &Matrix2<f64>) -> Result<dd::Dd2> {
    let det = cond.determinant();
    if !(det > SINGULAR_DET) {
        return Err(Error::SingularBlock { det });
    }
    Ok(dd::schur(cond, target, c))
}

fn schur(cond: &Matrix2<f64>, target: &Matrix2<f64>, c: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    Ok(dd::to_matrix(&schur_dd(cond, target, c)?))
}

fn measure_from_det(det: f64) -> f64 {
    (-0.5 * det.ln()).max(0.0)
}

/// Gaussian steering `G^{A→B} = max{0, -½ ln det M_σ^B}`.
pub fn gaussian_steering_a_to_b(cm: &CovMatrix) -> Result<f64> {
    Ok(measure_from_det(det_schur_complement_b(cm)?))
}

/// Gaussian steering `G^{B→A} = max{0, -½ ln det M_σ^A}`.
pub fn gaussian_steering_b_to_a(cm: &CovMatrix) -> Result<f64> {
    Ok(measure_from_det(det_schur_complement_a(cm)?))
}

/// Product of the optimal linear-estimator inference variances of Bob's
/// `x` and `p` given Alice's `x` and `p`, in the basis the matrix is written in.
///
/// `(σ_xBxB - σ_xAxB²/σ_xAxA)(σ_pBpB - σ_pApB²/σ_pApA)`. Not a local
/// invariant; see [`crate::optimizer::minimize_reid`] for the optimized value.
pub fn reid_product(cm: &CovMatrix) -> Result<f64> {
    reid_product_raw(cm.matrix())
}

pub(crate) fn reid_product_raw(m: &Matrix4<f64>) -> Result<f64> {
    let (vx, vp) = (m[(0, 0)], m[(1, 1)]);
    for variance in [vx, vp] {
        if !(variance > 0.0) {
            return Err(Error::SingularMarginal { variance });
        }
    }
    let inf_x = m[(2, 2)] - m[(0, 2)] * m[(0, 2)] / vx;
    let inf_p = m[(3, 3)] - m[(1, 3)] * m[(1, 3)] / vp;
    Ok(inf_x * inf_p)
}

/// Reid's criterion is violated (steering detected) iff the product is < 1.
pub fn check_reid_criterion(cm: &CovMatrix) -> bool {
    reid_product(cm).map(|p| p < 1.0).unwrap_or(false)
}

/// Both evaluations of the Wiseman et al. condition `σ + i(0 ⊕ Ω_B) ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WisemanTest {
    pub det_m_b: f64,
    /// Smallest eigenvalue of the Hermitian matrix `σ + i(0 ⊕ Ω_B)`.
    pub min_eigenvalue: f64,
    /// Violation decided from `det M_σ^B < 1`.
    pub violated_algebraic: bool,
    /// Violation decided from a negative eigenvalue.
    pub violated_spectral: bool,
}

impl WisemanTest {
    pub fn agree(&self) -> bool {
        self.violated_algebraic == self.violated_spectral
    }
}

/// Relative tolerance on the smallest eigenvalue of `σ + i(0 ⊕ Ω_B)`.
pub const WISEMAN_SPECTRAL_TOL: f64 = 1e-12;

pub fn wiseman_test(cm: &CovMatrix) -> Result<WisemanTest> {
    let det_m_b = det_schur_complement_b(cm)?;
    let im = linalg::direct_sum(&Matrix2::zeros(), &omega());
    let min_eigenvalue = linalg::hermitian_eigenvalues(cm.matrix(), &im)[0];
    let scale = linalg::max_abs(cm.matrix()).max(1.0);
    Ok(WisemanTest {
        det_m_b,
        min_eigenvalue,
        violated_algebraic: det_m_b < 1.0,
        violated_spectral: min_eigenvalue < -WISEMAN_SPECTRAL_TOL * scale,
    })
}

/// `true` iff `σ + i(0 ⊕ Ω_B) ≥ 0` is violated, i.e. the state is
/// `A → B` steerable by Gaussian measurements.
///
/// The verdict is `det M_σ^B < 1`, which makes it consistent with
/// `G^{A→B} > 0`. [`wiseman_test`] exposes the spectral evaluation as well.
pub fn check_wiseman(cm: &CovMatrix) -> bool {
    wiseman_test(cm)
        .map(|t| t.violated_algebraic)
        .unwrap_or(false)
}

/// Relative size below which a standard-form correlation counts as zero.
const DEGENERATE_CORRELATION: f64 = 1e-12;

/// Local symplectic parameters, relative to the standard form `sf`, at which
/// the Reid product attains its global minimum `det M_σ^B`.
///
/// With `k = (c1² - ab)/(ab - c2²)` the minimizing family is
///
/// ```text
/// (u_A, v_A, u_B, v_B) = (c1 v_B / (k c2),  c2 v_B / c1,  v_B / k,  v_B)
/// ```
///
/// for any `v_B` and any `w_A`, `w_B ≠ 0`. Bona fide states have
/// `ab > c1²`, so `k < 0` and both charts stay regular (`1 - uv = 1 - v_B²/k > 0`).
/// If `c1` or `c2` vanishes the standard form itself is optimal and identity
/// parameters (with the requested `w`) are returned.
pub fn optimal_params(
    sf: &StandardForm,
    v_b: f64,
    w_a: f64,
    w_b: f64,
) -> Result<(SymplecticParams, SymplecticParams)> {
    if !v_b.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "v_b must be finite, got {v_b}"
        )));
    }
    let (a, b, c1, c2) = (sf.a(), sf.b(), sf.c1(), sf.c2());
    let tiny = DEGENERATE_CORRELATION * a.max(b);
    if c1.abs() <= tiny || c2.abs() <= tiny {
        return Ok((
            SymplecticParams::new(0.0, 0.0, w_a)?,
            SymplecticParams::new(0.0, 0.0, w_b)?,
        ));
    }
    let k = (c1 * c1 - a * b) / (a * b - c2 * c2);
    let pa = SymplecticParams::new(c1 * v_b / (k * c2), c2 * v_b / c1, w_a)?;
    let pb = SymplecticParams::new(v_b / k, v_b, w_b)?;
    Ok((pa, pb))
}

/// Local symplectic that takes `cm` to a basis where the Reid product equals
/// `det M_σ^B`: the reduction to standard form followed by the closed-form
/// optimal parameters at the given `v_B` (`w_A = w_B = 1`).
pub fn reid_optimal_transform(cm: &CovMatrix, v_b: f64) -> Result<LocalSymplectic> {
    let (sf, to_sf) = cm.to_standard_form();
    let (pa, pb) = optimal_params(&sf, v_b, 1.0, 1.0)?;
    Ok(LocalSymplectic::from_params(&pa, &pb)?.compose(&to_sf))
}

/// Secret key rate bound `max{0, ln(2 / (e √R))}` for direct reconciliation,
/// `R` being the Reid product in the current basis.
pub fn key_rate_bound(cm: &CovMatrix) -> Result<f64> {
    let r = reid_product(cm)?;
    Ok(key_rate_from_reid(r))
}

pub(crate) fn key_rate_from_reid(r: f64) -> f64 {
    if !(r > 0.0) {
        return f64::INFINITY;
    }
    (std::f64::consts::LN_2 - 1.0 - 0.5 * r.ln()).max(0.0)
}

/// `max{0, s + ln 2 - 1}`, the key rate guaranteed by a steering value `s`.
pub fn optimal_key_rate_bound(s_lower: f64) -> f64 {
    (s_lower + std::f64::consts::LN_2 - 1.0).max(0.0)
}

/// Everything the library computes for one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringReport {
    #[serde(serialize_with = "sig12")]
    pub det_m_b: f64,
    #[serde(serialize_with = "sig12")]
    pub det_m_a: f64,
    #[serde(serialize_with = "sig12")]
    pub g_a_to_b: f64,
    #[serde(serialize_with = "sig12")]
    pub g_b_to_a: f64,
    #[serde(serialize_with = "sig12")]
    pub reid_product_as_given: f64,
    pub reid_violated: bool,
    pub wiseman_violated_a_to_b: bool,
    #[serde(serialize_with = "sig12")]
    pub key_rate_bound: f64,
    #[serde(serialize_with = "sig12")]
    pub optimal_key_rate_bound: f64,
}

pub fn full_report(cm: &CovMatrix) -> Result<SteeringReport> {
    let det_m_b = det_schur_complement_b(cm)?;
    let det_m_a = det_schur_complement_a(cm)?;
    let g_a_to_b = measure_from_det(det_m_b);
    let reid = reid_product(cm)?;
    Ok(SteeringReport {
        det_m_b,
        det_m_a,
        g_a_to_b,
        g_b_to_a: measure_from_det(det_m_a),
        reid_product_as_given: reid,
        reid_violated: reid < 1.0,
        wiseman_violated_a_to_b: det_m_b < 1.0,
        key_rate_bound: key_rate_from_reid(reid),
        optimal_key_rate_bound: optimal_key_rate_bound(g_a_to_b),
    })
}
