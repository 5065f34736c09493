//! Double-double arithmetic for the 2×2 Schur complement.
//!
//! Near the steering boundary `det M` is close to 1 while the blocks of a
//! strongly squeezed state are large, so the plain f64 evaluation loses most of
//! the digits that `-½ ln det M` needs.

use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::Matrix2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd {
        hi: s,
        lo: (a - (s - bb)) + (b - bb),
    }
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd {
        hi: s,
        lo: b - (s - a),
    }
}

fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd {
        hi: p,
        lo: a.mul_add(b, -p),
    }
}

impl Dd {
    pub(crate) fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.hi, o.hi);
        let t = two_sum(self.lo, o.lo);
        let s = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(s.hi, s.lo + t.lo)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let p = two_prod(self.hi, o.hi);
        quick_two_sum(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::from(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::from(q2);
        let q3 = r.hi / o.hi;
        let q = quick_two_sum(q1, q2);
        q + Dd::from(q3)
    }
}

pub(crate) type Dd2 = [[Dd; 2]; 2];

pub(crate) fn det2(m: &Dd2) -> Dd {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// `target - cᵀ cond⁻¹ c`, with `cond⁻¹ = adj(cond) / det(cond)`.
pub(crate) fn schur(cond: &Matrix2<f64>, target: &Matrix2<f64>, c: &Matrix2<f64>) -> Dd2 {
    let d = |m: &Matrix2<f64>, i: usize, j: usize| Dd::from(m[(i, j)]);
    let adj = [
        [d(cond, 1, 1), -d(cond, 0, 1)],
        [-d(cond, 1, 0), d(cond, 0, 0)],
    ];
    let det = d(cond, 0, 0) * d(cond, 1, 1) - d(cond, 0, 1) * d(cond, 1, 0);
    let mut out = [[Dd::from(0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            let mut acc = Dd::from(0.0);
            for (k, adj_row) in adj.iter().enumerate() {
                for (l, a) in adj_row.iter().enumerate() {
                    acc = acc + d(c, k, i) * *a * d(c, l, j);
                }
            }
            *slot = d(target, i, j) - acc / det;
        }
    }
    // Symmetrize.
    let off = (out[0][1] + out[1][0]) * Dd::from(0.5);
    out[0][1] = off;
    out[1][0] = off;
    out
}

pub(crate) fn to_matrix(m: &Dd2) -> Matrix2<f64> {
    Matrix2::new(
        m[0][0].to_f64(),
        m[0][1].to_f64(),
        m[1][0].to_f64(),
        m[1][1].to_f64(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn third_times_three() {
        let third = Dd::from(1.0) / Dd::from(3.0);
        let err = third * Dd::from(3.0) - Dd::from(1.0);
        assert!(err.to_f64().abs() < 1e-31);
    }

    #[test]
    fn recovers_cancelled_digits() {
        // (1 + 2⁻⁴⁰)² - 1 - 2⁻³⁹ = 2⁻⁸⁰, invisible in plain f64.
        let x = Dd::from(1.0) + Dd::from(2f64.powi(-40));
        let r = x * x - Dd::from(1.0) - Dd::from(2f64.powi(-39));
        assert_eq!(r.to_f64(), 2f64.powi(-80));
    }

    #[test]
    fn schur_of_diagonal_blocks() {
        let a = Matrix2::new(2.0, 0.0, 0.0, 4.0);
        let b = Matrix2::new(3.0, 0.0, 0.0, 3.0);
        let c = Matrix2::new(1.0, 0.0, 0.0, -2.0);
        let m = to_matrix(&schur(&a, &b, &c));
        assert_eq!(m, Matrix2::new(2.5, 0.0, 0.0, 2.0));
    }
}
