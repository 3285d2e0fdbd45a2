//! Dense 2×2 complex matrices with the Pauli algebra used by the Lax pair.

use num_complex::Complex64 as C64;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Imaginary unit.
pub const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// A 2×2 complex matrix stored row-major.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    /// Builds a matrix from its four entries in row-major order.
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    /// The zero matrix.
    pub const fn zero() -> Self {
        Mat2([[ZERO, ZERO], [ZERO, ZERO]])
    }

    /// The identity matrix.
    pub const fn identity() -> Self {
        Mat2([[ONE, ZERO], [ZERO, ONE]])
    }

    /// Pauli matrix `σ1`.
    pub const fn sigma1() -> Self {
        Mat2([[ZERO, ONE], [ONE, ZERO]])
    }

    /// Pauli matrix `σ2`.
    pub const fn sigma2() -> Self {
        Mat2([[ZERO, C64 { re: 0.0, im: -1.0 }], [I, ZERO]])
    }

    /// Pauli matrix `σ3`.
    pub const fn sigma3() -> Self {
        Mat2([[ONE, ZERO], [ZERO, C64 { re: -1.0, im: 0.0 }]])
    }

    /// Diagonal matrix `diag(a, d)`.
    pub const fn diag(a: C64, d: C64) -> Self {
        Mat2([[a, ZERO], [ZERO, d]])
    }

    /// Builds a matrix from its two columns.
    pub fn from_columns(c1: [C64; 2], c2: [C64; 2]) -> Self {
        Mat2([[c1[0], c2[0]], [c1[1], c2[1]]])
    }

    /// Entry `(i, j)` with zero-based indices.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[i][j]
    }

    /// Column `j` (zero-based).
    #[inline]
    pub fn col(&self, j: usize) -> [C64; 2] {
        [self.0[0][j], self.0[1][j]]
    }

    /// Determinant.
    #[inline]
    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// Trace.
    #[inline]
    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Inverse; the caller guarantees a nonzero determinant.
    pub fn inv(&self) -> Self {
        let d = self.det();
        Mat2([[self.0[1][1] / d, -self.0[0][1] / d], [-self.0[1][0] / d, self.0[0][0] / d]])
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        let c = |z: C64| z.conj();
        Mat2([[c(self.0[0][0]), c(self.0[0][1])], [c(self.0[1][0]), c(self.0[1][1])]])
    }

    /// Scales every entry by `s`.
    pub fn scale(&self, s: C64) -> Self {
        Mat2([[self.0[0][0] * s, self.0[0][1] * s], [self.0[1][0] * s, self.0[1][1] * s]])
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &Mat2) -> Self {
        *self * *other - *other * *self
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Exponential of a traceless matrix: `cosh(d) I + sinh(d)/d Ω` with `d² = -det Ω`.
    ///
    /// Only the traceless part is used; callers pass generators of `sl(2, C)`.
    pub fn expm_traceless(&self) -> Self {
        let d2 = -self.det();
        let d = d2.sqrt();
        let (c, s) = if d.norm() < 1e-4 {
            // Taylor series to sixth order keeps full precision near d = 0.
            let c = ONE + d2 / 2.0 + d2 * d2 / 24.0 + d2 * d2 * d2 / 720.0;
            let s = ONE + d2 / 6.0 + d2 * d2 / 120.0 + d2 * d2 * d2 / 5040.0;
            (c, s)
        } else {
            (d.cosh(), d.sinh() / d)
        };
        Mat2::identity().scale(c) + self.scale(s)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2([
            [self.0[0][0] + o.0[0][0], self.0[0][1] + o.0[0][1]],
            [self.0[1][0] + o.0[1][0], self.0[1][1] + o.0[1][1]],
        ])
    }
}

impl AddAssign for Mat2 {
    fn add_assign(&mut self, o: Mat2) {
        *self = *self + o;
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2([
            [self.0[0][0] - o.0[0][0], self.0[0][1] - o.0[0][1]],
            [self.0[1][0] - o.0[1][0], self.0[1][1] - o.0[1][1]],
        ])
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-ONE)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    #[inline]
    fn mul(self, o: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        Mat2([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }
}

impl Mul<[C64; 2]> for Mat2 {
    type Output = [C64; 2];
    #[inline]
    fn mul(self, v: [C64; 2]) -> [C64; 2] {
        [self.0[0][0] * v[0] + self.0[0][1] * v[1], self.0[1][0] * v[0] + self.0[1][1] * v[1]]
    }
}

/// Determinant of the matrix with columns `u`, `v`.
#[inline]
pub fn det_cols(u: [C64; 2], v: [C64; 2]) -> C64 {
    u[0] * v[1] - v[0] * u[1]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
        (*a - *b).max_abs() <= tol
    }

    #[test]
    fn pauli_algebra() {
        let (s1, s2, s3) = (Mat2::sigma1(), Mat2::sigma2(), Mat2::sigma3());
        // σ1 σ2 = i σ3 and each σ squares to the identity.
        assert!(close(&(s1 * s2), &s3.scale(I), 0.0));
        for s in [s1, s2, s3] {
            assert!(close(&(s * s), &Mat2::identity(), 0.0));
        }
    }

    #[test]
    fn exponential_of_diagonal_generator() {
        let a = C64::new(0.3, -1.7);
        let e = Mat2::diag(a, -a).expm_traceless();
        assert!(close(&e, &Mat2::diag(a.exp(), (-a).exp()), 1e-14));
    }

    #[test]
    fn exponential_of_nilpotent_and_small_generators() {
        let n = Mat2::new(C64::new(0.0, 0.0), C64::new(2.0, 1.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        assert!(close(&n.expm_traceless(), &(Mat2::identity() + n), 1e-15));
        // A small generator: compare against a truncated power series.
        let g = Mat2::new(C64::new(1e-5, 2e-5), C64::new(-3e-5, 0.0), C64::new(0.0, 4e-5), C64::new(-1e-5, -2e-5));
        let g2 = g * g;
        let series = Mat2::identity() + g + g2.scale(C64::new(0.5, 0.0)) + (g2 * g).scale(C64::new(1.0 / 6.0, 0.0));
        assert!(close(&g.expm_traceless(), &series, 1e-15));
        assert!((g.expm_traceless().det() - ONE).norm() < 1e-14);
    }

    #[test]
    fn inverse_and_determinant() {
        let m = Mat2::new(C64::new(1.0, 2.0), C64::new(0.5, 0.0), C64::new(-1.0, 0.3), C64::new(2.0, -1.0));
        assert!(close(&(m * m.inv()), &Mat2::identity(), 1e-15));
        assert!((det_cols(m.col(0), m.col(1)) - m.det()).norm() < 1e-15);
    }
}
