//! Small dense helpers shared by the covariance and steering modules.

use nalgebra::{Matrix2, Matrix4, SMatrix, SymmetricEigen};

/// Eigenvalues (ascending) of the 4×4 Hermitian matrix `re + i·im`.
///
/// `re` must be symmetric and `im` antisymmetric. The spectrum is read off the
/// real symmetric 8×8 embedding `[[re, -im], [im, re]]`, whose eigenvalues are
/// those of the Hermitian matrix, each repeated twice.
pub(crate) fn hermitian_eigenvalues(re: &Matrix4<f64>, im: &Matrix4<f64>) -> [f64; 4] {
    let mut big = SMatrix::<f64, 8, 8>::zeros();
    big.fixed_view_mut::<4, 4>(0, 0).copy_from(re);
    big.fixed_view_mut::<4, 4>(4, 4).copy_from(re);
    big.fixed_view_mut::<4, 4>(4, 0).copy_from(im);
    big.fixed_view_mut::<4, 4>(0, 4).copy_from(&(-im));

    let mut values: Vec<f64> = SymmetricEigen::new(big)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    [values[0], values[2], values[4], values[6]]
}

pub(crate) fn max_abs(m: &Matrix4<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub(crate) fn max_abs2(m: &Matrix2<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Block-diagonal `s_a ⊕ s_b`.
pub(crate) fn direct_sum(s_a: &Matrix2<f64>, s_b: &Matrix2<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(s_a);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(s_b);
    m
}

pub(crate) fn symmetrize(m: &Matrix4<f64>) -> Matrix4<f64> {
    (m + m.transpose()) * 0.5
}

pub(crate) fn symmetrize_anti(m: &Matrix4<f64>) -> Matrix4<f64> {
    (m - m.transpose()) * 0.5
}

/// Counter-clockwise rotation by `theta` in one mode's phase space.
pub(crate) fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_spectrum_of_real_diagonal() {
        let re = Matrix4::from_diagonal(&nalgebra::Vector4::new(4.0, 1.0, 3.0, 2.0));
        let ev = hermitian_eigenvalues(&re, &Matrix4::zeros());
        for (got, want) in ev.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn hermitian_spectrum_of_vacuum_plus_i_omega() {
        // I + iΩ on each mode has eigenvalues 0 and 2.
        let omega = Matrix2::new(0.0, 1.0, -1.0, 0.0);
        let im = direct_sum(&omega, &omega);
        let ev = hermitian_eigenvalues(&Matrix4::identity(), &im);
        assert!(ev[0].abs() < 1e-12 && ev[1].abs() < 1e-12);
        assert!((ev[2] - 2.0).abs() < 1e-12 && (ev[3] - 2.0).abs() < 1e-12);
    }
}
