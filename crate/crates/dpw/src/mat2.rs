//! Dense 2×2 complex matrices, the only matrix size the loop group needs.

use num_complex::Complex64 as C;
use std::ops::{Add, Mul, Neg, Sub};

pub const I: C = C::new(0.0, 1.0);
pub const ONE: C = C::new(1.0, 0.0);
pub const ZERO: C = C::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C; 2]; 2]);

impl Mat2 {
    pub const fn new(a: C, b: C, c: C, d: C) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub const fn identity() -> Self {
        Mat2::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Mat2::new(ZERO, ZERO, ZERO, ZERO)
    }

    /// diag(1, −1), the form preserved by SU(1,1).
    pub fn j() -> Self {
        Mat2::real(1.0, 0.0, 0.0, -1.0)
    }

    pub fn diag(a: C, d: C) -> Self {
        Mat2::new(a, ZERO, ZERO, d)
    }

    pub fn offdiag(b: C, c: C) -> Self {
        Mat2::new(ZERO, b, c, ZERO)
    }

    pub fn sigma1() -> Self {
        Mat2::real(0.0, 1.0, 1.0, 0.0)
    }

    /// exp(t·σ₁) = [[cosh t, sinh t], [sinh t, cosh t]].
    pub fn exp_sigma1(t: C) -> Self {
        let (c, s) = (t.cosh(), t.sinh());
        Mat2::new(c, s, s, c)
    }

    #[inline]
    pub fn a(&self) -> C {
        self.0[0][0]
    }
    #[inline]
    pub fn b(&self) -> C {
        self.0[0][1]
    }
    #[inline]
    pub fn c(&self) -> C {
        self.0[1][0]
    }
    #[inline]
    pub fn d(&self) -> C {
        self.0[1][1]
    }

    pub fn det(&self) -> C {
        self.a() * self.d() - self.b() * self.c()
    }

    pub fn trace(&self) -> C {
        self.a() + self.d()
    }

    /// Inverse through the adjugate; callers are responsible for det ≠ 0.
    pub fn inv(&self) -> Self {
        let det = self.det();
        Mat2::new(self.d() / det, -self.b() / det, -self.c() / det, self.a() / det)
    }

    pub fn transpose(&self) -> Self {
        Mat2::new(self.a(), self.c(), self.b(), self.d())
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    /// Conjugate transpose.
    pub fn ct(&self) -> Self {
        self.transpose().conj()
    }

    pub fn scale(&self, s: C) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(C) -> C) -> Self {
        Mat2::new(f(self.a()), f(self.b()), f(self.c()), f(self.d()))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Operator ∞-norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let r0 = self.a().norm() + self.b().norm();
        let r1 = self.c().norm() + self.d().norm();
        r0.max(r1)
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Keep the diagonal (even) or off-diagonal (odd) part.
    pub fn parity_part(&self, odd: bool) -> Self {
        if odd {
            Mat2::offdiag(self.b(), self.c())
        } else {
            Mat2::diag(self.a(), self.d())
        }
    }

    /// Smaller eigenvalue of a Hermitian matrix (the imaginary parts of the
    /// diagonal are ignored).
    pub fn hermitian_min_eig(&self) -> f64 {
        let (a, d) = (self.a().re, self.d().re);
        let off = self.b().norm();
        let mean = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + off * off).sqrt();
        mean - rad
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a() + o.a(), self.b() + o.b(), self.c() + o.c(), self.d() + o.d())
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a() - o.a(), self.b() - o.b(), self.c() - o.c(), self.d() - o.d())
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.map(|z| -z)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b, c, d) = (self.a(), self.b(), self.c(), self.d());
        Mat2::new(
            a * o.a() + b * o.c(),
            a * o.b() + b * o.d(),
            c * o.a() + d * o.c(),
            c * o.b() + d * o.d(),
        )
    }
}

impl Mul<C> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: C) -> Mat2 {
        self.scale(s)
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        self.scale(C::new(s, 0.0))
    }
}

impl std::iter::Sum for Mat2 {
    fn sum<It: Iterator<Item = Mat2>>(iter: It) -> Mat2 {
        iter.fold(Mat2::zero(), |acc, m| acc + m)
    }
}

/// Branch-aware complex quantities: a modulus and a total argument on the
/// universal cover of ℂ*.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lift {
    pub modulus: f64,
    pub arg: f64,
}

impl Lift {
    pub fn new(modulus: f64, arg: f64) -> Self {
        Lift { modulus, arg }
    }

    /// Principal lift of a nonzero complex number.
    pub fn principal(z: C) -> Self {
        Lift { modulus: z.norm(), arg: z.arg() }
    }

    pub fn value(&self) -> C {
        C::from_polar(self.modulus, self.arg)
    }

    pub fn ln(&self) -> C {
        C::new(self.modulus.ln(), self.arg)
    }

    pub fn sqrt(&self) -> C {
        C::from_polar(self.modulus.sqrt(), 0.5 * self.arg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_det() {
        let m = Mat2::new(C::new(2.0, 1.0), C::new(0.5, 0.0), C::new(-1.0, 3.0), C::new(0.0, 1.0));
        let p = m * m.inv();
        assert!((p - Mat2::identity()).max_abs() < 1e-14);
        assert!(((m * m).det() - m.det() * m.det()).norm() < 1e-12);
    }

    #[test]
    fn exp_sigma1_is_pseudo_unitary_for_real_argument() {
        let e = Mat2::exp_sigma1(C::new(1.7, 0.0));
        let d = e.ct() * Mat2::j() * e - Mat2::j();
        assert!(d.max_abs() < 1e-13);
    }

    #[test]
    fn hermitian_eigenvalue() {
        let m = Mat2::new(ONE * 2.0, C::new(0.0, 1.0), C::new(0.0, -1.0), ONE * 2.0);
        assert!((m.hermitian_min_eig() - 1.0).abs() < 1e-15);
    }
}
