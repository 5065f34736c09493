//! Two-mode covariance matrices and local symplectic algebra.
//!
//! Conventions used throughout the crate:
//!
//! * quadratures are ordered `(x_A, p_A, x_B, p_B)`;
//! * entries are in vacuum units, so the vacuum covariance matrix is the
//!   identity and the uncertainty principle reads `σ + iΩ ≥ 0`;
//! * `Ω_A = Ω_B = [[0, 1], [-1, 0]]`.
//!
//! First moments never enter any steering quantity, so [`CovMatrix`] carries
//! second moments only. Means live on [`crate::states::GaussianStateSpec`].

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Relative tolerance on `|σ_ij - σ_ji|`.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Absolute tolerance on the smallest eigenvalue of `σ + iΩ`.
pub const PHYSICALITY_TOL: f64 = 1e-10;
/// Tolerance for congruence round trips and invariant comparisons.
pub const CONGRUENCE_TOL: f64 = 1e-9;
/// Tolerance on `det S = 1` for 2×2 symplectic matrices.
pub const SYMPLECTIC_DET_TOL: f64 = 1e-10;

/// Single-mode symplectic form.
pub fn omega() -> Matrix2<f64> {
    Matrix2::new(0.0, 1.0, -1.0, 0.0)
}

/// Two-mode symplectic form `Ω_A ⊕ Ω_B`.
pub fn omega_ab() -> Matrix4<f64> {
    linalg::direct_sum(&omega(), &omega())
}

/// A physical two-mode covariance matrix.
///
/// Construction goes through [`validate_bona_fide`], so every value of this
/// type is symmetric and satisfies `σ + iΩ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 4]; 4]", into = "[[f64; 4]; 4]")]
pub struct CovMatrix(Matrix4<f64>);

impl CovMatrix {
    /// Validates `m`; see [`validate_bona_fide`].
    pub fn new(m: Matrix4<f64>) -> Result<Self> {
        validate_bona_fide(&m)
    }

    pub fn from_rows(rows: [[f64; 4]; 4]) -> Result<Self> {
        Self::new(Matrix4::from_fn(|i, j| rows[i][j]))
    }

    pub fn vacuum() -> Self {
        Self(Matrix4::identity())
    }

    /// Wraps a matrix known to be physical (e.g. the image of a physical
    /// matrix under a symplectic congruence). Only symmetrizes.
    pub(crate) fn from_trusted(m: Matrix4<f64>) -> Self {
        Self(linalg::symmetrize(&m))
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn to_rows(&self) -> [[f64; 4]; 4] {
        let m = &self.0;
        std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
    }

    /// Alice's marginal block.
    pub fn a(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(0, 0).into_owned()
    }

    /// Bob's marginal block.
    pub fn b(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(2, 2).into_owned()
    }

    /// Correlation block (rows: Alice, columns: Bob).
    pub fn c(&self) -> Matrix2<f64> {
        self.0.fixed_view::<2, 2>(0, 2).into_owned()
    }

    /// Relabels the modes, `(x_A, p_A, x_B, p_B) -> (x_B, p_B, x_A, p_A)`.
    pub fn swap_parties(&self) -> Self {
        let perm = [2, 3, 0, 1];
        Self(Matrix4::from_fn(|i, j| self.0[(perm[i], perm[j])]))
    }

    pub fn apply_local(&self, s: &LocalSymplectic) -> Self {
        apply_local(self, s)
    }

    pub fn local_invariants(&self) -> LocalInvariants {
        local_invariants(self)
    }

    pub fn symplectic_eigenvalues(&self) -> (f64, f64) {
        // A bona fide matrix is positive definite.
        symplectic_eigenvalues(&self.0).expect("bona fide covariance matrix is positive definite")
    }

    pub fn to_standard_form(&self) -> (StandardForm, LocalSymplectic) {
        to_standard_form(self)
    }

    /// Smallest eigenvalue of the Hermitian matrix `σ + iΩ`.
    pub fn min_uncertainty_eigenvalue(&self) -> f64 {
        linalg::hermitian_eigenvalues(&self.0, &omega_ab())[0]
    }
}

impl TryFrom<[[f64; 4]; 4]> for CovMatrix {
    type Error = Error;

    fn try_from(rows: [[f64; 4]; 4]) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<CovMatrix> for [[f64; 4]; 4] {
    fn from(cm: CovMatrix) -> Self {
        cm.to_rows()
    }
}

/// Checks symmetry and the uncertainty principle `σ + iΩ ≥ 0`.
///
/// The stored matrix is the symmetric part of `m`.
pub fn validate_bona_fide(m: &Matrix4<f64>) -> Result<CovMatrix> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let scale = linalg::max_abs(m);
    let max_asymmetry = linalg::max_abs(&(m - m.transpose()));
    if max_asymmetry > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric { max_asymmetry });
    }
    let sym = linalg::symmetrize(m);
    let min_eigenvalue = linalg::hermitian_eigenvalues(&sym, &omega_ab())[0];
    if min_eigenvalue < -PHYSICALITY_TOL {
        return Err(Error::UnphysicalState { min_eigenvalue });
    }
    Ok(CovMatrix(sym))
}

/// Symplectic eigenvalues `(ν₊, ν₋)`, descending, of a symmetric positive
/// definite 4×4 matrix.
///
/// `ν₊² + ν₋² = det A + det B + 2 det C` and `ν₊² ν₋² = det σ`. The values are
/// read off the spectrum `±ν` of the Hermitian matrix `i σ^{1/2} Ω σ^{1/2}`,
/// which stays accurate near `ν₊ = ν₋` where the quadratic formula in the two
/// invariants loses half the digits.
pub fn symplectic_eigenvalues(m: &Matrix4<f64>) -> Result<(f64, f64)> {
    if m.iter().any(|x| !x.is_finite()) || m.cholesky().is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    let eig = SymmetricEigen::new(linalg::symmetrize(m));
    let root = eig.eigenvectors
        * Matrix4::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()))
        * eig.eigenvectors.transpose();
    let k = root * omega_ab() * root;
    let spec = linalg::hermitian_eigenvalues(&Matrix4::zeros(), &linalg::symmetrize_anti(&k));
    Ok((spec[3], spec[2]))
}

/// The `(u, v, w)` chart of a 2×2 symplectic matrix:
///
/// ```text
/// S = [[ 1/((1-uv)w),  v/((1-uv)w) ],
///      [      u w,          w      ]]
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymplecticParams {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl SymplecticParams {
    pub const IDENTITY: Self = Self {
        u: 0.0,
        v: 0.0,
        w: 1.0,
    };

    pub fn new(u: f64, v: f64, w: f64) -> Result<Self> {
        let p = Self { u, v, w };
        p.matrix()?;
        Ok(p)
    }

    pub fn matrix(&self) -> Result<Matrix2<f64>> {
        symplectic_from_params(self)
    }

    /// Chart coordinates of a determinant-one matrix. `None` when either
    /// diagonal entry vanishes (those matrices lie outside the chart).
    pub fn from_matrix(s: &Matrix2<f64>) -> Option<Self> {
        let w = s[(1, 1)];
        if w == 0.0 || s[(0, 0)] == 0.0 {
            return None;
        }
        Some(Self {
            u: s[(1, 0)] / w,
            v: s[(0, 1)] / s[(0, 0)],
            w,
        })
    }
}

pub fn symplectic_from_params(p: &SymplecticParams) -> Result<Matrix2<f64>> {
    let SymplecticParams { u, v, w } = *p;
    let singular = Error::SingularParams { u, v, w };
    let one_minus_uv = 1.0 - u * v;
    if w == 0.0 || one_minus_uv == 0.0 {
        return Err(singular);
    }
    let d = one_minus_uv * w;
    let s = Matrix2::new(1.0 / d, v / d, u * w, w);
    if s.iter().any(|x| !x.is_finite()) {
        return Err(singular);
    }
    Ok(s)
}

/// A local symplectic transformation `S_A ⊕ S_B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalSymplectic {
    s_a: Matrix2<f64>,
    s_b: Matrix2<f64>,
}

impl LocalSymplectic {
    pub fn new(s_a: Matrix2<f64>, s_b: Matrix2<f64>) -> Result<Self> {
        for s in [&s_a, &s_b] {
            let det = s.determinant();
            if !det.is_finite() || (det - 1.0).abs() > SYMPLECTIC_DET_TOL {
                return Err(Error::NotSymplectic {
                    s: [[s[(0, 0)], s[(0, 1)]], [s[(1, 0)], s[(1, 1)]]],
                    det,
                });
            }
        }
        Ok(Self { s_a, s_b })
    }

    pub(crate) fn new_unchecked(s_a: Matrix2<f64>, s_b: Matrix2<f64>) -> Self {
        Self { s_a, s_b }
    }

    pub fn identity() -> Self {
        Self::new_unchecked(Matrix2::identity(), Matrix2::identity())
    }

    pub fn from_params(pa: &SymplecticParams, pb: &SymplecticParams) -> Result<Self> {
        Ok(Self::new_unchecked(pa.matrix()?, pb.matrix()?))
    }

    pub fn s_a(&self) -> &Matrix2<f64> {
        &self.s_a
    }

    pub fn s_b(&self) -> &Matrix2<f64> {
        &self.s_b
    }

    pub fn block(&self) -> Matrix4<f64> {
        linalg::direct_sum(&self.s_a, &self.s_b)
    }

    /// `self · other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Self) -> Self {
        Self::new_unchecked(self.s_a * other.s_a, self.s_b * other.s_b)
    }

    pub fn inverse(&self) -> Self {
        // For det = 1, [[a, b], [c, d]]⁻¹ = [[d, -b], [-c, a]].
        let inv = |s: &Matrix2<f64>| Matrix2::new(s[(1, 1)], -s[(0, 1)], -s[(1, 0)], s[(0, 0)]);
        Self::new_unchecked(inv(&self.s_a), inv(&self.s_b))
    }
}

/// `σ ↦ S σ Sᵀ`.
pub fn apply_local(cm: &CovMatrix, s: &LocalSymplectic) -> CovMatrix {
    let block = s.block();
    CovMatrix::from_trusted(block * cm.matrix() * block.transpose())
}

/// The four determinants left unchanged by local symplectic congruences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalInvariants {
    pub det_a: f64,
    pub det_b: f64,
    pub det_c: f64,
    pub det_sigma: f64,
}

pub fn local_invariants(cm: &CovMatrix) -> LocalInvariants {
    LocalInvariants {
        det_a: cm.a().determinant(),
        det_b: cm.b().determinant(),
        det_c: cm.c().determinant(),
        det_sigma: cm.matrix().determinant(),
    }
}

/// Standard form: `A = diag(a, a)`, `B = diag(b, b)`, `C = diag(c1, c2)`,
/// with the sign convention `c1 ≥ |c2|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardForm {
    a: f64,
    b: f64,
    c1: f64,
    c2: f64,
}

impl StandardForm {
    pub fn new(a: f64, b: f64, c1: f64, c2: f64) -> Result<Self> {
        let invalid = |reason| Error::InvalidStandardForm {
            a,
            b,
            c1,
            c2,
            reason,
        };
        if ![a, b, c1, c2].iter().all(|x| x.is_finite()) {
            return Err(invalid("non-finite entry"));
        }
        if a < 1.0 - PHYSICALITY_TOL || b < 1.0 - PHYSICALITY_TOL {
            return Err(invalid("marginals must satisfy a, b >= 1"));
        }
        if c1 < c2.abs() {
            return Err(invalid("sign convention requires c1 >= |c2|"));
        }
        let sf = Self { a, b, c1, c2 };
        validate_bona_fide(&sf.matrix()).map_err(|_| invalid("not bona fide"))?;
        Ok(sf)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    fn matrix(&self) -> Matrix4<f64> {
        let (a, b, c1, c2) = (self.a, self.b, self.c1, self.c2);
        Matrix4::new(
            a, 0.0, c1, 0.0, //
            0.0, a, 0.0, c2, //
            c1, 0.0, b, 0.0, //
            0.0, c2, 0.0, b,
        )
    }

    pub fn to_cov_matrix(&self) -> CovMatrix {
        CovMatrix::from_trusted(self.matrix())
    }

    /// `det M_σ^B = (b - c1²/a)(b - c2²/a)`.
    pub fn det_schur_b(&self) -> f64 {
        (self.b - self.c1 * self.c1 / self.a) * (self.b - self.c2 * self.c2 / self.a)
    }
}

/// Symplectic `S` with `S m Sᵀ = √(det m) · I` for a 2×2 positive definite `m`.
///
/// `S = √α · m^{-1/2}` with `α = √(det m)`; the square root has the closed
/// form `m^{1/2} = (m + α I) / √(tr m + 2α)`.
fn isotropize(m: &Matrix2<f64>) -> Matrix2<f64> {
    let alpha = m.determinant().sqrt();
    let t = (m.trace() + 2.0 * alpha).sqrt();
    let shifted = m + Matrix2::identity() * alpha;
    let inv = shifted
        .try_inverse()
        .expect("m + √(det m)·I is positive definite");
    inv * (alpha.sqrt() * t)
}

/// Reduces `cm` to standard form.
///
/// Returns the standard form together with the local symplectic that maps
/// `cm` onto it. Marginals are made isotropic by `√α · A^{-1/2}` (and the same
/// for `B`); the correlation block is then diagonalized by a pair of proper
/// rotations taken from its singular value decomposition, which leaves the
/// isotropic marginals untouched. When `C` vanishes the rotations are the
/// identity and `c1 = c2 = 0`.
pub fn to_standard_form(cm: &CovMatrix) -> (StandardForm, LocalSymplectic) {
    let (a_blk, b_blk, c_blk) = (cm.a(), cm.b(), cm.c());
    let s_a = isotropize(&a_blk);
    let s_b = isotropize(&b_blk);
    let a = a_blk.determinant().sqrt();
    let b = b_blk.determinant().sqrt();

    let c = s_a * c_blk * s_b.transpose();
    let scale = linalg::max_abs(cm.matrix());
    let tiny = 1e-14 * scale;

    let (r_a, r_b, c1, c2) = if linalg::max_abs2(&c) <= tiny {
        (Matrix2::identity(), Matrix2::identity(), 0.0, 0.0)
    } else if c[(0, 1)].abs() <= tiny && c[(1, 0)].abs() <= tiny && c[(0, 0)] >= c[(1, 1)].abs() {
        (
            Matrix2::identity(),
            Matrix2::identity(),
            c[(0, 0)],
            c[(1, 1)],
        )
    } else {
        diagonalize_by_rotations(&c)
    };

    let sf = StandardForm { a, b, c1, c2 };
    let s = LocalSymplectic::new_unchecked(r_a * s_a, r_b * s_b);
    (sf, s)
}

/// Proper rotations `(R_A, R_B)` with `R_A c R_Bᵀ = diag(c1, c2)`, `c1 ≥ |c2|`.
fn diagonalize_by_rotations(c: &Matrix2<f64>) -> (Matrix2<f64>, Matrix2<f64>, f64, f64) {
    let svd = c.svd(true, true);
    let u = svd.u.expect("requested U");
    let v = svd.v_t.expect("requested Vᵀ").transpose();
    let sv = svd.singular_values;

    let (first, second) = if sv[0] >= sv[1] { (0, 1) } else { (1, 0) };
    let mut u = Matrix2::from_columns(&[u.column(first), u.column(second)]);
    let mut v = Matrix2::from_columns(&[v.column(first), v.column(second)]);
    let c1 = sv[first];
    let mut c2 = sv[second];

    if u.determinant() < 0.0 {
        u.column_mut(1).neg_mut();
        c2 = -c2;
    }
    if v.determinant() < 0.0 {
        v.column_mut(1).neg_mut();
        c2 = -c2;
    }
    (u.transpose(), v.transpose(), c1, c2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tmsv(r: f64) -> CovMatrix {
        StandardForm::new(
            (2.0 * r).cosh(),
            (2.0 * r).cosh(),
            (2.0 * r).sinh(),
            -(2.0 * r).sinh(),
        )
        .unwrap()
        .to_cov_matrix()
    }

    fn fig1_rotation() -> LocalSymplectic {
        let p = |v: f64| SymplecticParams::new(v / (1.0 + v * v), v, 1.0 + v * v).unwrap();
        LocalSymplectic::from_params(&p(0.16), &p(0.19)).unwrap()
    }

    #[test]
    fn vacuum_is_bona_fide() {
        assert!(validate_bona_fide(&Matrix4::identity()).is_ok());
    }

    #[test]
    fn half_identity_is_unphysical() {
        match validate_bona_fide(&(Matrix4::identity() * 0.5)) {
            Err(Error::UnphysicalState { min_eigenvalue }) => {
                assert_relative_eq!(min_eigenvalue, -0.5, epsilon = 1e-12)
            }
            other => panic!("expected UnphysicalState, got {other:?}"),
        }
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let mut m = Matrix4::identity();
        m[(0, 2)] = 0.1;
        assert!(matches!(
            validate_bona_fide(&m),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn non_finite_rejected() {
        let mut m = Matrix4::identity();
        m[(1, 1)] = f64::NAN;
        assert_eq!(validate_bona_fide(&m), Err(Error::NonFinite));
    }

    #[test]
    fn tmsv_is_bona_fide_and_pure() {
        let cm = tmsv(1.0);
        assert!(validate_bona_fide(cm.matrix()).is_ok());
        let (n1, n2) = cm.symplectic_eigenvalues();
        assert_relative_eq!(n1, 1.0, epsilon = 1e-10);
        assert_relative_eq!(n2, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn symplectic_eigenvalues_of_thermal_states() {
        let (n1, n2) = symplectic_eigenvalues(&Matrix4::identity()).unwrap();
        assert_relative_eq!(n1, 1.0, epsilon = 1e-14);
        assert_relative_eq!(n2, 1.0, epsilon = 1e-14);
        let (n1, n2) = symplectic_eigenvalues(&(Matrix4::identity() * 2.0)).unwrap();
        assert_relative_eq!(n1, 2.0, epsilon = 1e-14);
        assert_relative_eq!(n2, 2.0, epsilon = 1e-14);
        let m = Matrix4::from_diagonal(&nalgebra::Vector4::new(3.0, 3.0, 1.5, 1.5));
        let (n1, n2) = symplectic_eigenvalues(&m).unwrap();
        assert_relative_eq!(n1, 3.0, epsilon = 1e-14);
        assert_relative_eq!(n2, 1.5, epsilon = 1e-14);
    }

    #[test]
    fn symplectic_eigenvalues_reject_indefinite() {
        let m = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, -1.0, 1.0, 1.0));
        assert_eq!(symplectic_eigenvalues(&m), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn identity_params_give_identity() {
        assert_eq!(
            SymplecticParams::IDENTITY.matrix().unwrap(),
            Matrix2::identity()
        );
    }

    #[test]
    fn fig1_params_have_unit_determinant() {
        let v = 0.16;
        let s = SymplecticParams::new(v / (1.0 + v * v), v, 1.0 + v * v)
            .unwrap()
            .matrix()
            .unwrap();
        assert_relative_eq!(s.determinant(), 1.0, epsilon = 1e-12);
        // u = v/(1+v²), w = 1+v² is the shear [[1, v], [v, 1 + v²]].
        assert_relative_eq!(s, Matrix2::new(1.0, v, v, 1.0 + v * v), epsilon = 1e-15);
    }

    #[test]
    fn singular_params_rejected() {
        assert!(matches!(
            SymplecticParams::new(2.0, 0.5, 1.0),
            Err(Error::SingularParams { .. })
        ));
        assert!(matches!(
            SymplecticParams::new(0.1, 0.2, 0.0),
            Err(Error::SingularParams { .. })
        ));
    }

    #[test]
    fn params_round_trip_through_matrix() {
        let p = SymplecticParams::new(0.3, -1.2, 0.7).unwrap();
        let q = SymplecticParams::from_matrix(&p.matrix().unwrap()).unwrap();
        assert_relative_eq!(p.u, q.u, epsilon = 1e-14);
        assert_relative_eq!(p.v, q.v, epsilon = 1e-14);
        assert_relative_eq!(p.w, q.w, epsilon = 1e-14);
    }

    #[test]
    fn local_symplectic_rejects_non_unit_determinant() {
        let bad = Matrix2::identity() * 2.0;
        assert!(matches!(
            LocalSymplectic::new(bad, Matrix2::identity()),
            Err(Error::NotSymplectic { .. })
        ));
    }

    #[test]
    fn identity_transformation_leaves_cm_unchanged() {
        let cm = tmsv(0.7);
        assert_eq!(apply_local(&cm, &LocalSymplectic::identity()), cm);
    }

    #[test]
    fn transformed_vacuum_stays_pure() {
        let out = apply_local(&CovMatrix::vacuum(), &fig1_rotation());
        let expect = fig1_rotation().block() * fig1_rotation().block().transpose();
        assert_relative_eq!(*out.matrix(), expect, epsilon = 1e-14);
        let (n1, n2) = out.symplectic_eigenvalues();
        assert_relative_eq!(n1, 1.0, epsilon = 1e-10);
        assert_relative_eq!(n2, 1.0, epsilon = 1e-10);
        assert!(validate_bona_fide(out.matrix()).is_ok());
    }

    #[test]
    fn invariants_of_vacuum_and_tmsv() {
        let v = local_invariants(&CovMatrix::vacuum());
        assert_eq!(
            (v.det_a, v.det_b, v.det_c, v.det_sigma),
            (1.0, 1.0, 0.0, 1.0)
        );

        let r: f64 = 0.9;
        let inv = local_invariants(&tmsv(r));
        let ch2 = (2.0 * r).cosh().powi(2);
        let sh2 = (2.0 * r).sinh().powi(2);
        assert_relative_eq!(inv.det_a, ch2, max_relative = 1e-12);
        assert_relative_eq!(inv.det_b, ch2, max_relative = 1e-12);
        assert_relative_eq!(inv.det_c, -sh2, max_relative = 1e-12);
        assert_relative_eq!(inv.det_sigma, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn invariants_survive_fig1_rotation() {
        let cm = tmsv(1.0);
        let before = local_invariants(&cm);
        let after = local_invariants(&apply_local(&cm, &fig1_rotation()));
        assert_relative_eq!(before.det_a, after.det_a, max_relative = 1e-9);
        assert_relative_eq!(before.det_b, after.det_b, max_relative = 1e-9);
        assert_relative_eq!(before.det_c, after.det_c, max_relative = 1e-9);
        assert_relative_eq!(before.det_sigma, after.det_sigma, epsilon = 1e-9);
    }

    #[test]
    fn standard_form_is_fixed_point() {
        let sf = StandardForm::new(2.0, 3.0, 1.5, -0.5).unwrap();
        let (got, s) = to_standard_form(&sf.to_cov_matrix());
        assert_eq!(got, sf);
        assert_relative_eq!(s.block(), Matrix4::identity(), epsilon = 1e-15);
    }

    #[test]
    fn rotated_tmsv_recovers_standard_form() {
        let r: f64 = 0.8;
        let rotated = apply_local(&tmsv(r), &fig1_rotation());
        let (sf, s) = to_standard_form(&rotated);
        assert_relative_eq!(sf.a(), 1.6_f64.cosh(), epsilon = 1e-10);
        assert_relative_eq!(sf.b(), 1.6_f64.cosh(), epsilon = 1e-10);
        assert_relative_eq!(sf.c1(), 1.6_f64.sinh(), epsilon = 1e-10);
        assert_relative_eq!(sf.c2(), -1.6_f64.sinh(), epsilon = 1e-10);
        let back = apply_local(&rotated, &s);
        assert_relative_eq!(*back.matrix(), *sf.to_cov_matrix().matrix(), epsilon = 1e-9);
    }

    #[test]
    fn uncorrelated_state_has_zero_correlations() {
        let m = Matrix4::new(
            2.0, 0.5, 0.0, 0.0, //
            0.5, 1.5, 0.0, 0.0, //
            0.0, 0.0, 3.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        );
        let cm = CovMatrix::new(m).unwrap();
        let (sf, s) = to_standard_form(&cm);
        assert_eq!((sf.c1(), sf.c2()), (0.0, 0.0));
        let back = apply_local(&cm, &s);
        assert_relative_eq!(
            *back.matrix(),
            *sf.to_cov_matrix().matrix(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn standard_form_sign_convention() {
        // Positive det C: both correlations positive.
        let sf = StandardForm::new(3.0, 3.0, 2.0, 1.0).unwrap();
        let rotated = apply_local(&sf.to_cov_matrix(), &fig1_rotation());
        let (got, _) = to_standard_form(&rotated);
        assert_relative_eq!(got.c1(), 2.0, epsilon = 1e-10);
        assert_relative_eq!(got.c2(), 1.0, epsilon = 1e-10);
        assert!(StandardForm::new(3.0, 3.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn swap_parties_exchanges_blocks() {
        let cm = CovMatrix::from_rows([
            [2.0, 0.1, 1.0, 0.2],
            [0.1, 1.5, 0.3, -0.4],
            [1.0, 0.3, 3.0, 0.0],
            [0.2, -0.4, 0.0, 1.2],
        ])
        .unwrap();
        let sw = cm.swap_parties();
        assert_eq!(sw.a(), cm.b());
        assert_eq!(sw.b(), cm.a());
        assert_eq!(sw.c(), cm.c().transpose());
    }

    #[test]
    fn serde_round_trip_validates() {
        let cm = tmsv(0.4);
        let json = serde_json::to_string(&cm).unwrap();
        let back: CovMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cm);
        let bad = "[[0.5,0,0,0],[0,0.5,0,0],[0,0,0.5,0],[0,0,0,0.5]]";
        assert!(serde_json::from_str::<CovMatrix>(bad).is_err());
    }
}
