//! Branch-aware Bessel functions of the Smyth frame.
//!
//! I₀ and Y₀(ix) are evaluated by their power series (summed in
//! double-double, so cancellation for imaginary arguments costs nothing)
//! for |x| ≤ `X_SWITCH` and by the Hankel expansion beyond it. Y₀(ix) lives
//! on the universal cover: a point carries its principal value plus an
//! integer sheet, and every logarithm uses the sheet-adjusted argument.

use crate::dd::{self, dd, Cdd};
use crate::error::{DpwError, Result};
use num_complex::Complex64 as C;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

pub const EULER_GAMMA: f64 = 0.5772156649015329;
/// Series/asymptotic crossover radius.
pub const X_SWITCH: f64 = 12.0;
/// Default cap on the number of Hankel terms.
pub const N_TERMS: usize = 20;
/// Measured sup of |T₁(x)|·|x|² and |T₂(x)|·|x| over 10 ≤ |x| ≤ 1000 in the
/// sector of the expansion (see `tests::remainder_constants`).
pub const C1: f64 = 0.0725;
pub const C2: f64 = 0.1258;

const I: C = C::new(0.0, 1.0);

/// A point x̃ = x·e^{i·sheet·π} of the universal cover of ℂ*.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPoint {
    pub x: C,
    pub sheet: i64,
}

impl BranchPoint {
    pub fn new(x: C, sheet: i64) -> Result<Self> {
        if x == C::new(0.0, 0.0) || !x.re.is_finite() || !x.im.is_finite() {
            return Err(DpwError::DomainError(format!("branch point must be finite and nonzero, got {x}")));
        }
        Ok(BranchPoint { x, sheet })
    }

    /// Cover point with a prescribed total argument; the sheet is chosen so
    /// that the principal part lies in (−π, π].
    pub fn from_polar(modulus: f64, total_arg: f64) -> Result<Self> {
        let sheet = ((total_arg - PI) / (2.0 * PI)).ceil() as i64 * 2;
        let principal = total_arg - sheet as f64 * PI;
        BranchPoint::new(C::from_polar(modulus, principal), sheet)
    }

    pub fn total_arg(&self) -> f64 {
        self.x.arg() + self.sheet as f64 * PI
    }

    /// Numerical value of the cover point, x·(−1)^sheet.
    pub fn value(&self) -> C {
        if self.sheet.rem_euclid(2) == 0 {
            self.x
        } else {
            -self.x
        }
    }

    pub fn shifted(&self, shift: i64) -> Self {
        BranchPoint { x: self.x, sheet: self.sheet + shift }
    }

    /// log(x̃/2) on the sheet.
    pub fn ln_half(&self) -> C {
        C::new((0.5 * self.x.norm()).ln(), self.total_arg())
    }
}

/// I₀ and Y₀(ix) with their derivatives along the cover coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselPair {
    pub at: BranchPoint,
    pub i0: C,
    pub y0i: C,
    pub d_i0: C,
    pub d_y0i: C,
}

impl BesselPair {
    /// x·(I₀·Y₀′ − I₀′·Y₀); equals 2/π for exact values.
    pub fn scaled_wronskian(&self) -> C {
        self.at.value() * (self.i0 * self.d_y0i - self.d_i0 * self.y0i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticRemainder {
    pub t1: C,
    pub t2: C,
    pub n_terms: usize,
    /// Modulus of the first omitted Hankel term (relative to the leading one).
    pub truncation: f64,
    pub c1: f64,
    pub c2: f64,
}

/// ψ(1..=J) together with γ.
#[derive(Debug, Clone, PartialEq)]
pub struct DigammaTable {
    pub values: Vec<f64>,
    pub euler_gamma: f64,
}

impl DigammaTable {
    pub fn new(len: usize) -> Self {
        let mut values = Vec::with_capacity(len);
        let mut h = dd(0.0);
        for j in 0..len {
            if j > 0 {
                h += dd(1.0) / dd(j as f64);
            }
            let psi = h - dd::euler_gamma();
            values.push(psi.hi() + psi.lo());
        }
        DigammaTable { values, euler_gamma: EULER_GAMMA }
    }

    /// ψ(n) for 1 ≤ n ≤ len.
    pub fn psi(&self, n: usize) -> f64 {
        self.values[n - 1]
    }
}

/// Partial sums of the two Bessel series in t = (x/2)², with
/// τ_j = t^j/(j!)² and H_j the harmonic numbers:
/// s0 = Στ_j, s1 = Σjτ_j, h0 = ΣH_jτ_j, h1 = ΣjH_jτ_j.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SeriesSums {
    pub s0: Cdd,
    pub s1: Cdd,
    pub h0: Cdd,
    pub h1: Cdd,
    /// Modulus bound of the neglected tail, relative to the largest term.
    pub tail: f64,
    pub terms: usize,
}

pub(crate) const SERIES_MAX_TERMS: usize = 600;

pub(crate) fn series_sums(t: Cdd) -> SeriesSums {
    let tabs = t.abs_f64();
    let mut tau = Cdd::one();
    let mut harm = dd(0.0);
    let (mut s0, mut s1, mut h0, mut h1) = (Cdd::one(), Cdd::zero(), Cdd::zero(), Cdd::zero());
    let mut biggest = 1.0f64;
    let mut tail = f64::INFINITY;
    let mut j = 0usize;
    while j < SERIES_MAX_TERMS {
        j += 1;
        let jf = j as f64;
        tau = tau * t;
        tau = tau.scale(dd(1.0) / dd(jf * jf));
        harm += dd(1.0) / dd(jf);
        let jd = dd(jf);
        s0 = s0 + tau;
        s1 = s1 + tau.scale(jd);
        h0 = h0 + tau.scale(harm);
        h1 = h1 + tau.scale(harm * jd);
        let mag = tau.abs_f64() * jf * (1.0 + jf.ln());
        biggest = biggest.max(mag);
        let next = (j + 1) as f64;
        let ratio = tabs / (next * next);
        if ratio < 0.5 && mag < 1e-22 * biggest {
            // Geometric tail bound with the ratio of consecutive terms.
            tail = mag * ratio / (1.0 - ratio) / biggest;
            break;
        }
    }
    SeriesSums { s0, s1, h0, h1, tail, terms: j }
}

fn quarter_square(x: Cdd) -> Cdd {
    let h = x.scale(dd(0.5));
    h * h
}

/// I₀(x) and I₀′(x) by power series.
pub fn i0_series(x: C) -> (C, C) {
    let xd = Cdd::from_c(x);
    let s = series_sums(quarter_square(xd));
    let i0 = s.s0.to_c();
    let d = if x.norm() == 0.0 { C::new(0.0, 0.0) } else { (s.s1.scale(dd(2.0)) / xd).to_c() };
    (i0, d)
}

/// Series value of Y₀(ix̃) and its derivative on the sheet of `p`.
pub fn y0i_series(p: BranchPoint) -> BesselPair {
    let v = p.value();
    let xd = Cdd::from_c(v);
    let s = series_sums(quarter_square(xd));
    let lgh = Cdd::from_c(p.ln_half()) + Cdd::new(dd::euler_gamma(), dd::pi() * dd(0.5));
    let two_over_pi = dd(2.0) / dd::pi();
    let inv_x = xd.recip();
    let i0 = s.s0;
    let di0 = s.s1.scale(dd(2.0)) * inv_x;
    let y = (lgh * i0 - s.h0).scale(two_over_pi);
    let dsum = s.h1.scale(dd(2.0)) * inv_x;
    let dy = (i0 * inv_x + lgh * di0 - dsum).scale(two_over_pi);
    BesselPair { at: p, i0: i0.to_c(), y0i: y.to_c(), d_i0: di0.to_c(), d_y0i: dy.to_c() }
}

/// a_j(α) = Π_{l=1..j}(4α² − (2l−1)²) / (j!·8^j).
pub fn hankel_coefficient(alpha: f64, j: usize) -> f64 {
    let mut a = 1.0;
    for l in 1..=j {
        let odd = (2 * l - 1) as f64;
        a *= (4.0 * alpha * alpha - odd * odd) / (8.0 * l as f64);
    }
    a
}

/// Optimally truncated P, Q of order zero at w, with d/dw and the
/// truncation index.
fn pq_optimal(w: C, n_terms: usize) -> (C, C, C, C, usize, f64) {
    let mut p = C::new(0.0, 0.0);
    let mut q = C::new(0.0, 0.0);
    let mut dp = C::new(0.0, 0.0);
    let mut dq = C::new(0.0, 0.0);
    let inv_w = w.inv();
    let mut pow = C::new(1.0, 0.0);
    let mut prev = f64::INFINITY;
    let mut used = n_terms;
    let mut omitted = 0.0;
    for j in 0..n_terms.max(1) + 1 {
        let term = pow * hankel_coefficient(0.0, j);
        let mag = term.norm();
        if j == n_terms || (j > 0 && mag > prev) {
            used = j;
            omitted = mag;
            break;
        }
        prev = mag;
        // (−1)^k pairs with the even/odd split of the Hankel index.
        let sign = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let contrib = term * sign;
        let dcontrib = -contrib * (j as f64) * inv_w;
        if j % 2 == 0 {
            p += contrib;
            dp += dcontrib;
        } else {
            q += contrib;
            dq += dcontrib;
        }
        pow *= inv_w;
    }
    (p, q, dp, dq, used, omitted)
}

/// Large-|x| representation
/// I₀(x) = √(2/πx)e^{−iπ/4}{(1+T₁)cos(ix−π/4) − T₂ sin(ix−π/4)},
/// Y₀(ix) = √(2/πx)e^{−iπ/4}{(1+T₁)sin(ix−π/4) + T₂ cos(ix−π/4)},
/// valid for total argument in (−3π/2, π/2).
pub fn asymptotic_pair(p: BranchPoint, n_terms: usize) -> Result<(BesselPair, AsymptoticRemainder)> {
    let th = p.total_arg();
    if !(th > -1.5 * PI && th < FRAC_PI_2) {
        return Err(DpwError::SectorViolation(format!(
            "total argument {th} outside (-3pi/2, pi/2) for the asymptotic pair"
        )));
    }
    if p.x.norm() < 2.0 {
        return Err(DpwError::DomainError(format!("asymptotic pair needs |x| >= 2, got {}", p.x.norm())));
    }
    let xi = p.value();
    // w = i·x̃ has principal argument th + π/2.
    let w = I * xi;
    let (pp, qq, dp_w, dq_w, used, omitted) = pq_optimal(w, n_terms);
    let pre = (2.0 / (PI * w)).sqrt();
    let ph = w - FRAC_PI_4;
    let (c, s) = (ph.cos(), ph.sin());
    let i0 = pre * (pp * c - qq * s);
    let y0 = pre * (pp * s + qq * c);
    // d/dx̃ = i·d/dw.
    let dpre = -pre / (2.0 * w);
    let di0_w = dpre * (pp * c - qq * s) + pre * (dp_w * c - pp * s - dq_w * s - qq * c);
    let dy0_w = dpre * (pp * s + qq * c) + pre * (dp_w * s + pp * c + dq_w * c - qq * s);
    let pair = BesselPair { at: p, i0, y0i: y0, d_i0: I * di0_w, d_y0i: I * dy0_w };
    let rem = AsymptoticRemainder {
        t1: pp - 1.0,
        t2: qq,
        n_terms: used,
        truncation: omitted,
        c1: C1,
        c2: C2,
    };
    Ok((pair, rem))
}

/// T₁, T₂ and their derivatives along the cover coordinate.
pub(crate) fn t_pair_with_derivatives(p: BranchPoint, n_terms: usize) -> Result<(C, C, C, C)> {
    let th = p.total_arg();
    if !(th > -1.5 * PI && th < FRAC_PI_2) {
        return Err(DpwError::SectorViolation(format!("total argument {th} outside (-3pi/2, pi/2)")));
    }
    let w = I * p.value();
    let (pp, qq, dp_w, dq_w, _, _) = pq_optimal(w, n_terms);
    Ok((pp - 1.0, qq, I * dp_w, I * dq_w))
}

/// Monodromy [[1,0],[2i·shift,1]] acting on (I₀, Y₀(ix)); derivatives follow
/// the new cover coordinate, which differs from the old one by (−1)^shift.
pub fn continue_pair(p: &BesselPair, shift: i64) -> BesselPair {
    let k = C::new(0.0, 2.0 * shift as f64);
    let flip = if shift.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    BesselPair {
        at: p.at.shifted(shift),
        i0: p.i0,
        y0i: p.y0i + k * p.i0,
        d_i0: p.d_i0 * flip,
        d_y0i: (p.d_y0i + k * p.d_i0) * flip,
    }
}

/// I₀(x) and I₀′(x); series inside `X_SWITCH`, Hankel expansion outside.
pub fn eval_i0(x: C) -> (C, C) {
    eval_i0_with(x, X_SWITCH, N_TERMS)
}

pub fn eval_i0_with(x: C, x_switch: f64, n_terms: usize) -> (C, C) {
    if x.norm() <= x_switch.max(2.0) {
        return i0_series(x);
    }
    // I₀ is even: fold into arg ∈ [−π, 0], away from the sector edge at π/2
    // where the subdominant exponential is lost.
    let (xx, flip) = if x.arg() > 0.0 { (-x, -1.0) } else { (x, 1.0) };
    let p = BranchPoint { x: xx, sheet: 0 };
    match asymptotic_pair(p, n_terms) {
        Ok((pair, _)) => (pair.i0, pair.d_i0 * flip),
        Err(_) => i0_series(x),
    }
}

/// Y₀(ix̃) with derivative, plus the matching I₀ values.
pub fn eval_y0i(p: BranchPoint) -> BesselPair {
    eval_y0i_with(p, X_SWITCH, N_TERMS)
}

pub fn eval_y0i_with(p: BranchPoint, x_switch: f64, n_terms: usize) -> BesselPair {
    if p.x.norm() <= x_switch.max(2.0) {
        return y0i_series(p);
    }
    // Move to the sheet whose total argument lies in [−π, 0], well inside
    // the expansion sector, and continue back with the monodromy matrix.
    let th = p.total_arg();
    let s = ((th + FRAC_PI_2) / PI).round() as i64;
    let base = BranchPoint { x: p.x, sheet: p.sheet - s };
    match asymptotic_pair(base, n_terms) {
        Ok((pair, _)) => continue_pair(&pair, s),
        Err(_) => y0i_series(p),
    }
}

/// Values of the integer-order Bessel family at principal-branch x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixValues {
    pub y: C,
    pub k: C,
    pub i: C,
    pub j: C,
    /// Relative size of the neglected series tail.
    pub tail: f64,
}

pub fn eval_appendix_series(n: usize, x: C) -> Result<AppendixValues> {
    if x.norm() == 0.0 {
        return Err(DpwError::DomainError("Y_n and K_n are singular at x = 0".into()));
    }
    let xd = Cdd::from_c(x);
    let half = xd.scale(dd(0.5));
    let t = half * half;
    // Σ_j (±t)^j (x/2)^n/(j!(n+j)!) with and without ψ weights.
    let mut half_n = Cdd::one();
    for _ in 0..n {
        half_n = half_n * half;
    }
    let mut nfact = dd(1.0);
    for k in 1..=n {
        nfact *= dd(k as f64);
    }
    let mut term = half_n.scale(dd(1.0) / nfact);
    let (mut pos, mut alt, mut wpos, mut walt) = (Cdd::zero(), Cdd::zero(), Cdd::zero(), Cdd::zero());
    let mut biggest = 0.0f64;
    let mut tail = f64::INFINITY;
    let psi_dd = |k: usize| -> crate::dd::Dd {
        let mut h = dd(0.0);
        for l in 1..k {
            h += dd(1.0) / dd(l as f64);
        }
        h - dd::euler_gamma()
    };
    let mut psi_a = psi_dd(1);
    let mut psi_b = psi_dd(n + 1);
    for j in 0..SERIES_MAX_TERMS {
        if j > 0 {
            term = term * t;
            term = term.scale(dd(1.0) / dd((j * (n + j)) as f64));
            psi_a += dd(1.0) / dd(j as f64);
            psi_b += dd(1.0) / dd((n + j) as f64);
        }
        let sgn = if j % 2 == 0 { dd(1.0) } else { dd(-1.0) };
        let wsum = psi_a + psi_b;
        pos = pos + term;
        alt = alt + term.scale(sgn);
        wpos = wpos + term.scale(wsum);
        walt = walt + term.scale(wsum * sgn);
        let mag = term.abs_f64() * (1.0 + wsum.hi().abs());
        biggest = biggest.max(mag);
        let ratio = t.abs_f64() / (((j + 1) * (n + j + 1)) as f64);
        if ratio < 0.5 && mag < 1e-22 * biggest {
            tail = mag * ratio / (1.0 - ratio) / biggest;
            break;
        }
    }
    // Finite sums with (n−j−1)!/j! (x/2)^{2j−n}.
    let inv_half = half.recip();
    let mut fin_y = Cdd::zero();
    let mut fin_k = Cdd::zero();
    for j in 0..n {
        let mut c = dd(1.0);
        for l in 1..(n - j) {
            c *= dd(l as f64);
        }
        for l in 1..=j {
            c /= dd(l as f64);
        }
        let mut pw = Cdd::one();
        let e = 2 * j as i64 - n as i64;
        let base = if e >= 0 { half } else { inv_half };
        for _ in 0..e.unsigned_abs() {
            pw = pw * base;
        }
        let v = pw.scale(c);
        fin_y = fin_y + v;
        fin_k = fin_k + if j % 2 == 0 { v } else { -v };
    }
    let ln_half = half.ln();
    let pi = dd::pi();
    let i_n = pos;
    let j_n = alt;
    let y = -(fin_y.scale(dd(1.0) / pi)) + (ln_half * j_n).scale(dd(2.0) / pi) - walt.scale(dd(1.0) / pi);
    let sign_n1 = if n.is_multiple_of(2) { dd(-1.0) } else { dd(1.0) };
    let k = fin_k.scale(dd(0.5)) + (ln_half * i_n).scale(sign_n1) - wpos.scale(dd(0.5) * sign_n1);
    Ok(AppendixValues { y: y.to_c(), k: k.to_c(), i: i_n.to_c(), j: j_n.to_c(), tail })
}

/// Hankel functions of real order by the truncated asymptotic sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HankelAsymptotic {
    pub h1: C,
    pub h2: C,
    /// Bounds from the first omitted term.
    pub rem1: f64,
    pub rem2: f64,
    pub n_terms: usize,
}

pub fn eval_hankel_asymptotic(alpha: f64, p: BranchPoint, n_terms: usize) -> Result<HankelAsymptotic> {
    let th = p.total_arg();
    if !(th > -PI && th < 2.0 * PI) {
        return Err(DpwError::SectorViolation(format!("total argument {th} outside (-pi, 2pi)")));
    }
    if p.x.norm() < 2.0 {
        return Err(DpwError::DomainError(format!("Hankel expansion needs |x| >= 2, got {}", p.x.norm())));
    }
    let x = p.value();
    let sqrt_x = C::from_polar(p.x.norm().sqrt(), 0.5 * th);
    let pre = (2.0 / PI).sqrt() / sqrt_x;
    let omega = x - alpha * FRAC_PI_2 - FRAC_PI_4;
    let inv_x = x.inv();
    let mut s1 = C::new(0.0, 0.0);
    let mut s2 = C::new(0.0, 0.0);
    let mut pow = C::new(1.0, 0.0);
    let mut ij = C::new(1.0, 0.0);
    for j in 0..n_terms {
        let a = hankel_coefficient(alpha, j);
        s1 += ij * a * pow;
        s2 += ij.conj() * a * pow;
        pow *= inv_x;
        ij *= I;
    }
    let next = hankel_coefficient(alpha, n_terms).abs() * pow.norm();
    let e1 = pre * (I * omega).exp();
    let e2 = pre * (-I * omega).exp();
    Ok(HankelAsymptotic { h1: e1 * s1, h2: e2 * s2, rem1: e1.norm() * next, rem2: e2.norm() * next, n_terms })
}
