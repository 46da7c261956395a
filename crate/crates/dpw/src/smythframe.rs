//! The Smyth potential ξ = λ⁻¹[[0, z³], [z⁻¹, 0]]dz, its canonical solution L,
//! the dressed frame φ and the large-|x| splitting φ = H·A_m·φ₀·K_m·C.
//!
//! Throughout x = λ⁻¹z²/2 is the Bessel variable. The closed form is summed
//! in double-double for |x| ≤ `SERIES_CAP`; beyond that φ is assembled from
//! the splitting with K_m built from the Hankel remainders T₁, T₂.

use crate::bessel::{self, series_sums, BranchPoint, EULER_GAMMA, N_TERMS};
use crate::dd::{self, dd, param_dd, Cdd, Dd, Mat2dd};
use crate::error::{DpwError, Result};
use crate::mat2::{Lift, Mat2, I, ONE, ZERO};
use num_complex::Complex64 as C;
use std::f64::consts::{FRAC_PI_2, PI};

/// Largest |x| summed by the power series.
pub const SERIES_CAP: f64 = 30.0;
/// Below this |x| the exponential factor is removed from φ in
/// double-double; above it K_m comes from the asymptotic remainders.
pub const K_SOLVE_MAX: f64 = 12.0;

pub const K0: i32 = 3;
pub const K1: i32 = -1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmythPotential {
    pub k0: i32,
    pub k1: i32,
}

impl Default for SmythPotential {
    fn default() -> Self {
        SmythPotential { k0: K0, k1: K1 }
    }
}

impl SmythPotential {
    /// Coefficient of dz; general exponents are allowed here so the ODE
    /// integrator can be used for other potentials.
    pub fn at(&self, z: C, lambda: C) -> Result<Mat2> {
        if z == ZERO || lambda == ZERO {
            return Err(DpwError::DomainError("potential needs z != 0 and lambda != 0".into()));
        }
        Ok(Mat2::offdiag(z.powi(self.k0), z.powi(self.k1)) * lambda.inv())
    }
}

/// (1/λ)[[0, z³], [z⁻¹, 0]].
pub fn potential_at(z: C, lambda: C) -> Result<Mat2> {
    SmythPotential::default().at(z, lambda)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameValue {
    pub z: C,
    pub lambda: C,
    pub mat: Mat2,
    /// Dressing parameter; `None` for the undressed L.
    pub a: Option<f64>,
    /// Relative size of the neglected series tail (0 on the split path).
    pub tail: f64,
}

fn check_cut(z: C) -> Result<()> {
    if z == ZERO || (z.im == 0.0 && z.re < 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(DpwError::DomainError(format!("z = {z} lies on the cut (-inf, 0]")));
    }
    Ok(())
}

fn check_lambda(lambda: C) -> Result<()> {
    if lambda == ZERO || !lambda.re.is_finite() || !lambda.im.is_finite() {
        return Err(DpwError::DomainError(format!("lambda = {lambda} must be finite and nonzero")));
    }
    Ok(())
}

/// Bessel variable λ⁻¹z²/2.
pub fn bessel_x(z: C, lambda: C) -> C {
    z * z / (2.0 * lambda)
}

/// L in double-double, with the series tail; valid for any |x| the series
/// can resolve (callers enforce the cap).
pub(crate) fn canonical_l_dd(z: Cdd, lambda: Cdd) -> (Mat2dd, f64, usize) {
    let x = (z * z) / lambda.scale(dd(2.0));
    let half = x.scale(dd(0.5));
    let s = series_sums(half * half);
    let four_lam_s1 = (lambda * s.s1).scale(dd(4.0));
    let inv_lam = lambda.recip();
    let ell = (z.scale(dd(0.5))).ln();
    // Bessel block [[y₀, λz∂y₀], [y₁/4, y₀ + λz∂y₁/4]] with y₁ = −2λ⁻¹S.
    let b21 = -(s.h0 * inv_lam).scale(dd(0.5));
    let b22 = s.s0 - s.h1.scale(dd(2.0));
    let lb = Mat2dd::new(s.s0, four_lam_s1, b21, b22);
    let ll = Mat2dd::new(Cdd::one(), Cdd::zero(), ell * inv_lam, Cdd::one());
    (ll * lb, s.tail, s.terms)
}

fn dressing_dd(lambda: Cdd, a: Dd) -> Mat2dd {
    // s = √(−a) = i√a.
    let ra = a.sqrt();
    let s = Cdd::new(dd(0.0), ra);
    let inv_s = Cdd::new(dd(0.0), -(dd(1.0) / ra));
    Mat2dd::new(s, -(lambda * inv_s), Cdd::zero(), inv_s)
}

pub(crate) fn dressed_phi_dd(z: Cdd, lambda: Cdd, a: Dd) -> (Mat2dd, f64) {
    let (l, tail, _) = canonical_l_dd(z, lambda);
    (dressing_dd(lambda, a) * l, tail)
}

/// The canonical solution L of dL = Lξ with L(z) → Id-like normalization
/// inherited from the Bessel series.
pub fn canonical_l(z: C, lambda: C) -> Result<FrameValue> {
    check_cut(z)?;
    check_lambda(lambda)?;
    let x = bessel_x(z, lambda);
    if x.norm() > SERIES_CAP {
        return Err(DpwError::TruncationError(format!(
            "|x| = {} exceeds the series cap {SERIES_CAP}",
            x.norm()
        )));
    }
    let (m, tail, terms) = canonical_l_dd(Cdd::from_c(z), Cdd::from_c(lambda));
    if terms >= bessel::SERIES_MAX_TERMS || tail > 1e-17 {
        return Err(DpwError::TruncationError(format!("series tail {tail} after {terms} terms")));
    }
    Ok(FrameValue { z, lambda, mat: m.to_mat2(), a: None, tail })
}

/// φ = [[√(−a), −λ/√(−a)], [0, 1/√(−a)]]·L with √(−a) = i√a.
pub fn dressed_phi(z: C, lambda: C, a: f64) -> Result<FrameValue> {
    check_cut(z)?;
    check_lambda(lambda)?;
    if !(a > 0.0) {
        return Err(DpwError::DomainError(format!("dressing parameter must be positive, got {a}")));
    }
    let x = bessel_x(z, lambda);
    if x.norm() <= SERIES_CAP {
        let (m, tail) = dressed_phi_dd(Cdd::from_c(z), Cdd::from_c(lambda), param_dd(a));
        return Ok(FrameValue { z, lambda, mat: m.to_mat2(), a: Some(a), tail });
    }
    let lift = Lift::principal(lambda);
    let m = sector_for(z, &lift);
    let split = asymptotic_split(z, lift, m, a)?;
    Ok(FrameValue { z, lambda, mat: split.reconstruct(), a: Some(a), tail: 0.0 })
}

/// Sector index whose Ω̃_m centre is nearest to the total argument of x.
pub fn sector_for(z: C, lift: &Lift) -> i64 {
    let th = 2.0 * z.arg() - lift.arg;
    ((th + FRAC_PI_2) / PI).round() as i64
}

/// δ(θ) defined by φ(ze^{iθ}, λe^{2iθ}) = δ·T⁻¹·φ(z, λ)·T, T = diag(e^{−iθ}, e^{iθ}).
///
/// `lambda` is the unrotated spectral parameter.
pub fn rotate_frame(z: C, theta: f64, lambda: C, a: f64) -> Result<Mat2> {
    check_cut(z)?;
    let total = z.arg() + theta;
    if total.abs() >= PI {
        return Err(DpwError::CutCrossing(format!("arg z + theta = {total} leaves (-pi, pi)")));
    }
    let rot = C::from_polar(1.0, theta);
    let t = Mat2::diag(rot.conj(), rot);
    let lhs = dressed_phi(z * rot, lambda * rot * rot, a)?.mat;
    let phi = dressed_phi(z, lambda, a)?.mat;
    Ok(lhs * t.inv() * phi.inv() * t)
}

/// Closed form of the rotation gauge, δ = Id + (iθ/a)·[[1, λ′], [−1/λ′, −1]]
/// at the rotated parameter λ′ = λe^{2iθ}.
pub fn rotation_gauge(theta: f64, rotated_lambda: C, a: f64) -> Mat2 {
    let c = I * (theta / a);
    Mat2::identity() + Mat2::new(ONE, rotated_lambda, -rotated_lambda.inv(), -ONE) * c
}

/// Double-double lift of λ.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LiftDd {
    pub modulus: Dd,
    pub arg: Dd,
}

impl LiftDd {
    pub fn from_lift(l: &Lift) -> Self {
        LiftDd { modulus: dd(l.modulus), arg: dd(l.arg) }
    }

    pub fn value(&self) -> Cdd {
        Cdd::expi(self.arg).scale(self.modulus)
    }
}

fn h_dd(l: &LiftDd, a: Dd) -> Mat2dd {
    let lam = l.value();
    let p = Cdd::new(l.modulus.ln(), l.arg).scale(dd(0.5) / a);
    Mat2dd::new(Cdd::one() + p, lam * p, -(p / lam), Cdd::one() - p)
}

fn i_pow(m: i64) -> Cdd {
    match m.rem_euclid(4) {
        0 => Cdd::one(),
        1 => Cdd::i(),
        2 => -Cdd::one(),
        _ => -Cdd::i(),
    }
}

fn a_dd(l: &LiftDd, m: i64, a: Dd) -> Mat2dd {
    let pi = dd::pi();
    let lam = l.value();
    let sqrt_lam = Cdd::expi(l.arg * dd(0.5)).scale(l.modulus.sqrt());
    let pre = sqrt_lam.scale((dd(2.0) / pi).sqrt());
    let m1 = Mat2dd::diag(Cdd::one(), lam.recip());
    let ra = a.sqrt();
    let s = Cdd::new(dd(0.0), ra);
    let inv_s = Cdd::new(dd(0.0), -(dd(1.0) / ra));
    let m2 = Mat2dd::new(s, -inv_s, Cdd::zero(), inv_s);
    let m3 = Mat2dd::new(
        Cdd::one(),
        Cdd::zero(),
        -Cdd::new(dd::euler_gamma() * dd(0.5), pi * dd(0.25)),
        Cdd::real(pi * dd(0.25)),
    );
    let m4 = Mat2dd::new(Cdd::one(), Cdd::zero(), Cdd::new(dd(0.0), dd(2.0 * m as f64)), Cdd::one());
    let q = pi * dd(0.25);
    let e = Mat2dd::new(Cdd::expi(-q), Cdd::expi(q), Cdd::expi(q * dd(3.0)), Cdd::expi(q));
    let dm = Mat2dd::diag(i_pow(m), i_pow(-m));
    (m1 * m2 * m3 * m4 * e * dm).scale(pre)
}

fn phi0_dd(z: Cdd, lambda: Cdd) -> Mat2dd {
    Mat2dd::exp_sigma1((z * z) / lambda.scale(dd(2.0)))
}

/// H(λ) = [[1+p, λp], [−p/λ, 1−p]], p = log λ/(2a) on the lift's sheet.
pub fn h_matrix(lift: Lift, a: f64) -> Mat2 {
    h_dd(&LiftDd::from_lift(&lift), param_dd(a)).to_mat2()
}

/// A_m as the product √(2/π)√λ·diag(1, λ⁻¹)·[[√−a, −1/√−a], [0, 1/√−a]]
/// ·[[1, 0], [−(γ/2 + iπ/4), π/4]]·[[1, 0], [2im, 1]]·E·diag(i^m, i^{−m}).
pub fn a_matrix(lift: Lift, m: i64, a: f64) -> Mat2 {
    a_dd(&LiftDd::from_lift(&lift), m, param_dd(a)).to_mat2()
}

/// The entrywise closed form of A_m as printed alongside the splitting;
/// kept only so the comparison report can quantify its disagreement with
/// the product form.
pub fn a_matrix_displayed(lift: Lift, m: i64, a: f64) -> Mat2 {
    let g = EULER_GAMMA;
    let sl = lift.sqrt();
    let e_m = C::from_polar(1.0, -PI / 4.0);
    let e_p = C::from_polar(1.0, PI / 4.0);
    let im = i_pow(m).to_c();
    let imi = i_pow(-m).to_c();
    let mf = m as f64;
    let r2 = 2f64.sqrt();
    let k = 2.0 * (2.0 * (a / g).sqrt() - (g / a).sqrt()) * g;
    let q = (2.0 * g / a).sqrt();
    let a11 = im * sl * (k * e_m + (r2 * mf * e_p - 1.0) * q * PI);
    let a12 = imi * sl * (k * e_p - (r2 * mf * e_m - 1.0) * q * PI);
    let a21 = im / sl * ((r2 * g * e_m) - (r2 * mf * e_p - 1.0) * PI) * q;
    let a22 = imi / sl * ((r2 * g * e_p) + (r2 * mf * e_m - 1.0) * PI) * q;
    Mat2::new(a11, a12, a21, a22) * (I / (2.0 * (2.0 * g * PI).sqrt()))
}

/// φ₀ = exp(λ⁻¹(z²/2)·σ₁).
pub fn phi0_matrix(z: C, lambda: C) -> Mat2 {
    Mat2::exp_sigma1(bessel_x(z, lambda))
}

pub fn c_matrix(z: C) -> Mat2 {
    Mat2::diag(z.inv(), z)
}

/// Total argument of λ⁻¹z² must lie in (−3π/2 + mπ, π/2 + mπ).
pub fn check_sector(z: C, lift: &Lift, m: i64) -> Result<()> {
    let th = 2.0 * z.arg() - lift.arg;
    let lo = -1.5 * PI + m as f64 * PI;
    let hi = FRAC_PI_2 + m as f64 * PI;
    if th > lo && th < hi {
        Ok(())
    } else {
        Err(DpwError::SectorViolation(format!(
            "arg(lambda^-1 z^2) = {th} outside ({lo}, {hi}) for m = {m}"
        )))
    }
}

/// x̃·e^{−imπ} as a point of the cover in the expansion sector.
fn shifted_point(z: C, lift: &Lift, m: i64) -> Result<BranchPoint> {
    let modulus = z.norm_sqr() / (2.0 * lift.modulus);
    let th = 2.0 * z.arg() - lift.arg - m as f64 * PI;
    BranchPoint::from_polar(modulus, th)
}

/// K_m assembled from T₁, T₂ at x̃e^{−imπ}.
pub fn k_assembled(z: C, lift: Lift, m: i64) -> Result<Mat2> {
    check_sector(z, &lift, m)?;
    let p = shifted_point(z, &lift, m)?;
    if p.x.norm() < 2.0 {
        return Err(DpwError::DomainError(format!("|x| = {} < 2: no asymptotic K", p.x.norm())));
    }
    let (t1, t2, dt1, dt2) = bessel::t_pair_with_derivatives(p, N_TERMS)?;
    let xp = p.value();
    let lam = lift.value();
    let sg = if m.rem_euclid(2) == 0 { -I } else { I };
    let z2 = z * z;
    // (z⁻¹T)_z = (−T + 2x′T′)/z².
    let d1 = (-(ONE + t1) + 2.0 * xp * dt1) / z2;
    let d2 = (-t2 + 2.0 * xp * dt2) / z2;
    Ok(Mat2::new(ONE + t1, sg * t2 + lam * d1, sg * t2, ONE + t1 + lam * sg * d2))
}

/// K_m = φ₀⁻¹A_m⁻¹H⁻¹φC⁻¹, with the cancellation done in double-double.
pub fn k_solved(z: C, lift: Lift, m: i64, a: f64) -> Result<Mat2> {
    check_sector(z, &lift, m)?;
    let x = z * z / (2.0 * lift.modulus) * C::from_polar(1.0, -lift.arg);
    if x.norm() > SERIES_CAP {
        return Err(DpwError::TruncationError(format!("|x| = {} exceeds the series cap", x.norm())));
    }
    let l = LiftDd::from_lift(&lift);
    let zd = Cdd::from_c(z);
    let lam = l.value();
    let (phi, _) = dressed_phi_dd(zd, lam, param_dd(a));
    let c_inv = Mat2dd::diag(zd, zd.recip());
    let k = phi0_dd(zd, lam).inv() * a_dd(&l, m, param_dd(a)).inv() * h_dd(&l, param_dd(a)).inv() * phi * c_inv;
    Ok(k.to_mat2())
}

/// K_m by whichever route is accurate at this |x|.
pub fn k_matrix(z: C, lift: Lift, m: i64, a: f64) -> Result<Mat2> {
    let modulus = z.norm_sqr() / (2.0 * lift.modulus);
    if modulus <= K_SOLVE_MAX {
        k_solved(z, lift, m, a)
    } else {
        k_assembled(z, lift, m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitData {
    pub hmat: Mat2,
    pub am: Mat2,
    pub phi0: Mat2,
    /// The K_m used for reconstruction (see `k_matrix`).
    pub km: Mat2,
    pub km_solved: Option<Mat2>,
    pub km_assembled: Option<Mat2>,
    pub cmat: Mat2,
    pub sector: i64,
    /// ‖K_solved − K_assembled‖ when both exist.
    pub k_disagreement: Option<f64>,
    /// ‖A_displayed − A_product‖/‖A_product‖.
    pub a_display_gap: f64,
}

impl SplitData {
    pub fn reconstruct(&self) -> Mat2 {
        self.hmat * self.am * self.phi0 * self.km * self.cmat
    }
}

pub fn asymptotic_split(z: C, lift: Lift, m: i64, a: f64) -> Result<SplitData> {
    check_cut(z)?;
    check_sector(z, &lift, m)?;
    let lam = lift.value();
    let hmat = h_matrix(lift, a);
    let am = a_matrix(lift, m, a);
    let km_solved = k_solved(z, lift, m, a).ok();
    let km_assembled = k_assembled(z, lift, m).ok();
    let km = k_matrix(z, lift, m, a)?;
    let k_disagreement = match (km_solved, km_assembled) {
        (Some(s), Some(t)) => Some((s - t).norm_inf()),
        _ => None,
    };
    let disp = a_matrix_displayed(lift, m, a);
    Ok(SplitData {
        hmat,
        am,
        phi0: phi0_matrix(z, lam),
        km,
        km_solved,
        km_assembled,
        cmat: c_matrix(z),
        sector: m,
        k_disagreement,
        a_display_gap: (disp - am).norm_inf() / am.norm_inf(),
    })
}

/// g = conj-transpose(φ(z, 1/λ̄))·diag(1, −1)·φ(z, λ).
pub fn build_g(z: C, lambda: C, a: f64) -> Result<Mat2> {
    let phi = dressed_phi(z, lambda, a)?.mat;
    let refl = dressed_phi(z, lambda.conj().inv(), a)?.mat;
    Ok(refl.ct() * Mat2::j() * phi)
}

/// Unit-circle sample λ_k = e^{2πik/n} in double-double.
pub(crate) fn circle_point_dd(k: usize, n: usize) -> Cdd {
    Cdd::expi(dd(2.0) * dd::pi() * dd(k as f64) / dd(n as f64))
}

/// φ(r, λ_k) at the n circle samples; series path in double-double where
/// the cap allows, splitting beyond.
pub fn phi_on_circle(r: f64, n: usize, a: f64) -> Result<Vec<Mat2>> {
    let rc = C::new(r, 0.0);
    if 0.5 * r * r <= SERIES_CAP {
        Ok((0..n).map(|k| dressed_phi_dd(Cdd::real(dd(r)), circle_point_dd(k, n), param_dd(a)).0.to_mat2()).collect())
    } else {
        (0..n).map(|k| dressed_phi(rc, C::from_polar(1.0, 2.0 * PI * k as f64 / n as f64), a).map(|f| f.mat)).collect()
    }
}

/// g = φ*Jφ at the n circle samples, formed in double-double.
pub fn g_on_circle(r: f64, n: usize, a: f64) -> Result<Vec<Mat2>> {
    if 0.5 * r * r > SERIES_CAP {
        return Err(DpwError::TruncationError(format!("r = {r} is beyond the double-double series path")));
    }
    Ok((0..n)
        .map(|k| {
            let (phi, _) = dressed_phi_dd(Cdd::real(dd(r)), circle_point_dd(k, n), param_dd(a));
            (phi.ct() * Mat2dd::j() * phi).to_mat2()
        })
        .collect())
}

/// F₀ = exp((λ⁻¹ + λ)(r²/2)·σ₁).
pub fn f0_matrix(r: f64, lambda: C) -> Mat2 {
    Mat2::exp_sigma1((lambda.inv() + lambda) * (0.5 * r * r))
}

/// k̃_m = F₀⁻¹A_m⁻¹H⁻¹φ, evaluated as exp(−λ(r²/2)σ₁)·K_m·C so that no
/// exponentially large factors cancel.
pub fn ktilde(r: f64, lift: Lift, m: i64, a: f64) -> Result<Mat2> {
    let z = C::new(r, 0.0);
    let k = k_matrix(z, lift, m, a)?;
    let lam = lift.value();
    Ok(Mat2::exp_sigma1(-lam * (0.5 * r * r)) * k * c_matrix(z))
}

/// Middle factor of g = k̃*·M·k̃:
/// M = diag(−1, 1) + (2(a − γ)/π)·(F₀² + [[0, i], [−i, 0]]).
pub fn g_middle(r: f64, lambda: C, a: f64) -> Mat2 {
    let f0 = f0_matrix(r, lambda);
    let c = 2.0 * (a - EULER_GAMMA) / PI;
    Mat2::real(-1.0, 0.0, 0.0, 1.0) + (f0 * f0 + Mat2::offdiag(I, -I)) * c
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GRepresentation {
    pub g: Mat2,
    pub ktilde: Mat2,
    pub middle: Mat2,
    /// ‖k̃·diag(r, 1/r) − Id‖ at this λ; tends to 0 like |λ| as λ → 0.
    pub limit_defect: f64,
}

pub fn g_representation(r: f64, lift: Lift, m: i64, a: f64) -> Result<GRepresentation> {
    if !(r > 0.0) {
        return Err(DpwError::DomainError(format!("r must be positive, got {r}")));
    }
    let kt = ktilde(r, lift, m, a)?;
    // 1/λ̄ has the same argument and reciprocal modulus.
    let refl = ktilde(r, Lift::new(1.0 / lift.modulus, lift.arg), m, a)?;
    let middle = g_middle(r, lift.value(), a);
    let g = refl.ct() * middle * kt;
    let limit_defect = (kt * Mat2::diag(C::new(r, 0.0), C::new(1.0 / r, 0.0)) - Mat2::identity()).norm_inf();
    Ok(GRepresentation { g, ktilde: kt, middle, limit_defect })
}
