//! Complex double-double arithmetic.
//!
//! Used wherever large frame entries cancel: forming g = φ*Jφ on the circle
//! (for r ≳ 3 the entries of φ exceed those of g by orders of magnitude) and
//! stripping the exponential factor φ₀ off φ to expose K.
//!
//! The real type follows the usual error-free transformations (two-sum,
//! fma-based two-product). Elementary functions are accurate to a few units
//! in 1e−32 on the argument ranges used here.

use crate::mat2::Mat2;
use num_complex::Complex64 as C;
use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// Unevaluated sum hi + lo with |lo| ≤ ulp(hi)/2.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

#[inline]
fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd { hi: p, lo: a.mul_add(b, -p) }
}

const PI_DD: Dd = Dd { hi: std::f64::consts::PI, lo: 1.2246467991473532e-16 };
const LN2_DD: Dd = Dd { hi: std::f64::consts::LN_2, lo: 2.3190468138462996e-17 };
const EULER_DD: Dd = Dd { hi: 0.5772156649015329, lo: -4.942915152430645e-18 };

impl Dd {
    pub const fn from_parts(hi: f64, lo: f64) -> Self {
        Dd { hi, lo }
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    fn ldexp(self, k: i32) -> Self {
        let s = 2f64.powi(k);
        Dd { hi: self.hi * s, lo: self.lo * s }
    }

    pub fn recip(self) -> Self {
        dd(1.0) / self
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return dd(if self.hi == 0.0 { 0.0 } else { f64::NAN });
        }
        let s = self.hi.sqrt();
        let r = self - two_prod(s, s);
        quick_two_sum(s, r.hi / (2.0 * s))
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.0 {
            return dd(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return dd(0.0);
        }
        let k = (self.hi / LN2_DD.hi).round();
        // r = (x − k ln 2)/512, then expm1 by Taylor and nine squarings.
        let r = (self - LN2_DD * k).ldexp(-9);
        let mut term = r;
        let mut s = r;
        let mut n = 1.0;
        while term.hi.abs() > 1e-34 * s.hi.abs().max(1e-300) {
            n += 1.0;
            term = term * r / n;
            s += term;
        }
        for _ in 0..9 {
            s = s * s + s * 2.0;
        }
        (s + 1.0).ldexp(k as i32)
    }

    /// Natural logarithm by one Newton step on exp.
    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return dd(if self.hi == 0.0 { f64::NEG_INFINITY } else { f64::NAN });
        }
        let y = dd(self.hi.ln());
        y + self * (-y).exp() - 1.0
    }

    /// (sin x, cos x).
    pub fn sin_cos(self) -> (Self, Self) {
        let two_pi = PI_DD * 2.0;
        let k = (self.hi / two_pi.hi).round();
        let r = self - two_pi * k;
        let half_pi = PI_DD * 0.5;
        let q = (r.hi / half_pi.hi).round();
        let t = r - half_pi * q;
        let t2 = t * t;
        let (mut s, mut c) = (t, dd(1.0));
        let (mut ts, mut tc) = (t, dd(1.0));
        let mut n = 1.0;
        loop {
            ts = -(ts * t2) / ((n + 1.0) * (n + 2.0));
            tc = -(tc * t2) / (n * (n + 1.0));
            s += ts;
            c += tc;
            n += 2.0;
            if ts.hi.abs() < 1e-34 && tc.hi.abs() < 1e-34 {
                break;
            }
        }
        match (q as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    pub fn cosh(self) -> Self {
        let e = self.exp();
        (e + e.recip()) * 0.5
    }

    pub fn sinh(self) -> Self {
        if self.hi.abs() < 0.5 {
            let x2 = self * self;
            let mut term = self;
            let mut s = self;
            let mut n = 1.0;
            while term.hi.abs() > 1e-34 * s.hi.abs().max(1e-300) {
                term = term * x2 / ((n + 1.0) * (n + 2.0));
                s += term;
                n += 2.0;
            }
            return s;
        }
        let e = self.exp();
        (e - e.recip()) * 0.5
    }

    /// Angle of (x, y) = (other, self), refined by one Newton step.
    pub fn atan2(self, x: Dd) -> Self {
        if self.hi == 0.0 && x.hi == 0.0 {
            return dd(0.0);
        }
        let z = dd(self.hi.atan2(x.hi));
        let (s, c) = z.sin_cos();
        z + (self * c - x * s) / (x * c + self * s)
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&o.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&o.lo),
            c => c,
        }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let s = two_sum(self.hi, b.hi);
        let t = two_sum(self.lo, b.lo);
        let u = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(u.hi, u.lo + t.lo)
    }
}

impl Add<f64> for Dd {
    type Output = Dd;
    fn add(self, b: f64) -> Dd {
        let s = two_sum(self.hi, b);
        quick_two_sum(s.hi, s.lo + self.lo)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Sub<f64> for Dd {
    type Output = Dd;
    fn sub(self, b: f64) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let p = two_prod(self.hi, b.hi);
        quick_two_sum(p.hi, p.lo + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    fn mul(self, b: f64) -> Dd {
        let p = two_prod(self.hi, b);
        quick_two_sum(p.hi, p.lo + self.lo * b)
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        quick_two_sum(q1, q2) + q3
    }
}

impl Div<f64> for Dd {
    type Output = Dd;
    fn div(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let r = self - two_prod(q1, b);
        let q2 = r.hi / b;
        let r = r - two_prod(q2, b);
        quick_two_sum(q1, q2) + r.hi / b
    }
}

macro_rules! assign_ops {
    ($($tr:ident $f:ident $op:tt),*) => {$(
        impl $tr for Dd {
            fn $f(&mut self, b: Dd) { *self = *self $op b; }
        }
        impl $tr<f64> for Dd {
            fn $f(&mut self, b: f64) { *self = *self $op b; }
        }
    )*};
}
assign_ops!(AddAssign add_assign +, SubAssign sub_assign -, MulAssign mul_assign *, DivAssign div_assign /);

pub fn dd(x: f64) -> Dd {
    Dd::from(x)
}

/// Euler's constant to double-double accuracy.
pub fn euler_gamma() -> Dd {
    EULER_DD
}

/// Lifts the potential parameter a; the f64 rounding of γ is read as γ
/// itself, since the frame near the circle is very sensitive to a − γ.
pub fn param_dd(a: f64) -> Dd {
    if a == EULER_DD.hi {
        EULER_DD
    } else {
        dd(a)
    }
}

pub fn pi() -> Dd {
    PI_DD
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cdd {
    pub re: Dd,
    pub im: Dd,
}

impl Cdd {
    pub fn new(re: Dd, im: Dd) -> Self {
        Cdd { re, im }
    }

    pub fn real(x: Dd) -> Self {
        Cdd { re: x, im: dd(0.0) }
    }

    pub fn from_c(z: C) -> Self {
        Cdd { re: dd(z.re), im: dd(z.im) }
    }

    pub fn zero() -> Self {
        Cdd::real(dd(0.0))
    }

    pub fn one() -> Self {
        Cdd::real(dd(1.0))
    }

    pub fn i() -> Self {
        Cdd::new(dd(0.0), dd(1.0))
    }

    /// e^{iθ} with θ in double-double.
    pub fn expi(theta: Dd) -> Self {
        let (s, c) = theta.sin_cos();
        Cdd::new(c, s)
    }

    pub fn to_c(self) -> C {
        C::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn conj(self) -> Self {
        Cdd::new(self.re, -self.im)
    }

    pub fn norm_sqr(self) -> Dd {
        self.re * self.re + self.im * self.im
    }

    pub fn recip(self) -> Self {
        let n = self.norm_sqr();
        Cdd::new(self.re / n, -self.im / n)
    }

    pub fn scale(self, s: Dd) -> Self {
        Cdd::new(self.re * s, self.im * s)
    }

    pub fn cosh(self) -> Self {
        let (s, c) = self.im.sin_cos();
        Cdd::new(self.re.cosh() * c, self.re.sinh() * s)
    }

    pub fn sinh(self) -> Self {
        let (s, c) = self.im.sin_cos();
        Cdd::new(self.re.sinh() * c, self.re.cosh() * s)
    }

    /// Principal logarithm.
    pub fn ln(self) -> Self {
        Cdd::new(self.norm_sqr().ln() * 0.5, self.im.atan2(self.re))
    }

    pub fn abs_f64(self) -> f64 {
        self.to_c().norm()
    }
}

impl Add for Cdd {
    type Output = Cdd;
    fn add(self, o: Cdd) -> Cdd {
        Cdd::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Cdd {
    type Output = Cdd;
    fn sub(self, o: Cdd) -> Cdd {
        Cdd::new(self.re - o.re, self.im - o.im)
    }
}

impl Neg for Cdd {
    type Output = Cdd;
    fn neg(self) -> Cdd {
        Cdd::new(-self.re, -self.im)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Div for Cdd {
    type Output = Cdd;
    fn div(self, o: Cdd) -> Cdd {
        self * o.recip()
    }
}

impl Mul for Cdd {
    type Output = Cdd;
    fn mul(self, o: Cdd) -> Cdd {
        Cdd::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2dd(pub [[Cdd; 2]; 2]);

impl Mat2dd {
    pub fn new(a: Cdd, b: Cdd, c: Cdd, d: Cdd) -> Self {
        Mat2dd([[a, b], [c, d]])
    }

    pub fn j() -> Self {
        Mat2dd::new(Cdd::one(), Cdd::zero(), Cdd::zero(), -Cdd::one())
    }

    pub fn identity() -> Self {
        Mat2dd::new(Cdd::one(), Cdd::zero(), Cdd::zero(), Cdd::one())
    }

    pub fn diag(a: Cdd, d: Cdd) -> Self {
        Mat2dd::new(a, Cdd::zero(), Cdd::zero(), d)
    }

    pub fn from_mat2(m: &Mat2) -> Self {
        let f = Cdd::from_c;
        Mat2dd::new(f(m.a()), f(m.b()), f(m.c()), f(m.d()))
    }

    pub fn scale(&self, s: Cdd) -> Self {
        let m = &self.0;
        Mat2dd::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn det(&self) -> Cdd {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn inv(&self) -> Self {
        let m = &self.0;
        let r = self.det().recip();
        Mat2dd::new(m[1][1] * r, -(m[0][1] * r), -(m[1][0] * r), m[0][0] * r)
    }

    /// exp(x·σ₁).
    pub fn exp_sigma1(x: Cdd) -> Self {
        let (c, s) = (x.cosh(), x.sinh());
        Mat2dd::new(c, s, s, c)
    }

    pub fn ct(&self) -> Self {
        let m = &self.0;
        Mat2dd::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn to_mat2(&self) -> Mat2 {
        let m = &self.0;
        Mat2::new(m[0][0].to_c(), m[0][1].to_c(), m[1][0].to_c(), m[1][1].to_c())
    }
}

impl Mul for Mat2dd {
    type Output = Mat2dd;
    fn mul(self, o: Mat2dd) -> Mat2dd {
        let (a, b) = (&self.0, &o.0);
        let e = |i: usize, k: usize| a[i][0] * b[0][k] + a[i][1] * b[1][k];
        Mat2dd::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_keeps_extra_digits() {
        let big = Cdd::real(dd(1e8) + dd(1e-9));
        let p = big * big - Cdd::real(dd(1e16));
        // (1e8 + 1e-9)² − 1e16 = 0.2 + 1e-18
        assert!((p.to_c().re - 0.2).abs() < 1e-15);
    }

    #[test]
    fn division_is_double_double_accurate() {
        let x = dd(1.0) / dd(3.0);
        let e = x * 3.0 - 1.0;
        assert!(e.to_f64().abs() < 1e-31);
        let y = dd(2.0) / dd(7.0);
        assert!((y * dd(7.0) - 2.0).to_f64().abs() < 1e-31);
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn elementary_functions_match_reference_digits() {
        // Reference hi/lo splits computed with 50-digit arithmetic.
        let cases = [
            (dd(3.0).ln(), 1.0986122886681098, -9.071297235001530e-17),
            (dd(1.7).exp(), 5.473947391727200, -3.893534160478951e-16),
            (dd(0.3).sin_cos().0, 0.29552020666133955, 1.8315357276792536e-17),
            (dd(9.0).cosh(), 4051.5420254925939, 1.5376271469957949e-13),
            (dd(0.001).sinh(), 0.0010000001666666751, -3.5717428599830523e-20),
        ];
        for (v, hi, lo) in cases {
            let e = (v - Dd::from_parts(hi, lo)).to_f64().abs() / hi.abs();
            assert!(e < 1e-30, "{v:?} vs {hi} {lo}: {e}");
        }
    }

    #[test]
    fn unit_circle_points_have_unit_modulus() {
        for k in 0..64 {
            let th = dd(2.0) * pi() * dd(k as f64) / dd(64.0);
            let z = Cdd::expi(th);
            let e = z.norm_sqr() - dd(1.0);
            assert!((e.hi() + e.lo()).abs() < 1e-30);
        }
    }
}
