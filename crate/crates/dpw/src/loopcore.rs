//! Twisted 2×2 loops sampled on the unit circle, and the generic Birkhoff
//! and Iwasawa factorizations built on their Fourier coefficients.

use crate::error::{DpwError, Result};
use crate::linalg;
use crate::mat2::{Mat2, ONE, ZERO};
use num_complex::Complex64 as C;
use rustfft::FftPlanner;
use serde_json::{json, Value};
use std::f64::consts::PI;

pub const DEFAULT_N: usize = 256;
pub const DEFAULT_TOL: f64 = 1e-10;
/// |k| below this is treated as the boundary of the big cell.
pub const THETA_MIN: f64 = 1e-10;
/// Largest admissible |Im k|/|k|.
pub const THETA_MAX_IMAG: f64 = 1e-6;
/// Multiply-back residual beyond which g is declared outside the big cell.
const MAX_SPLIT_RESIDUAL: f64 = 1e-6;
const MIN_R_RATIO: f64 = 1e-13;

/// λ_k = e^{2πik/n}.
pub fn circle_point(k: usize, n: usize) -> C {
    C::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircleLoop {
    samples: Vec<Mat2>,
    /// c_j for j = −n/2..=n/2 at index j + n/2; the aliased Nyquist bin is
    /// split evenly between ±n/2.
    coeffs: Vec<Mat2>,
    n: usize,
    tol: f64,
}

fn check_n(n: usize) -> Result<()> {
    if n < 8 || !n.is_power_of_two() {
        return Err(DpwError::Config(format!("sample count must be a power of two >= 8, got {n}")));
    }
    Ok(())
}

fn dft_coeffs(samples: &[Mat2]) -> Vec<Mat2> {
    let n = samples.len();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut bins = vec![Mat2::zero(); n];
    for (i, k) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let mut buf: Vec<C> = samples.iter().map(|m| m.0[i][k]).collect();
        fft.process(&mut buf);
        for (b, v) in bins.iter_mut().zip(buf) {
            b.0[i][k] = v / n as f64;
        }
    }
    let h = n / 2;
    let mut out = vec![Mat2::zero(); n + 1];
    for d in -(h as i64)..=(h as i64) {
        let bin = bins[d.rem_euclid(n as i64) as usize];
        out[(d + h as i64) as usize] = if d.unsigned_abs() as usize == h { bin * 0.5 } else { bin };
    }
    out
}

fn samples_from_coeffs(coeffs: &[Mat2], n: usize) -> Vec<Mat2> {
    let h = n / 2;
    let mut bins = vec![Mat2::zero(); n];
    for (idx, c) in coeffs.iter().enumerate() {
        let d = idx as i64 - h as i64;
        let b = &mut bins[d.rem_euclid(n as i64) as usize];
        *b = *b + *c;
    }
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    let mut out = vec![Mat2::zero(); n];
    for (i, k) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let mut buf: Vec<C> = bins.iter().map(|m| m.0[i][k]).collect();
        fft.process(&mut buf);
        for (o, v) in out.iter_mut().zip(buf) {
            o.0[i][k] = v;
        }
    }
    out
}

impl CircleLoop {
    /// Builds a loop without any invariant checks; used for intermediate
    /// products whose defects are reported separately.
    pub fn from_samples_unchecked(samples: Vec<Mat2>, tol: f64) -> Self {
        let n = samples.len();
        let coeffs = dft_coeffs(&samples);
        CircleLoop { samples, coeffs, n, tol }
    }

    /// Checked construction of an SL₂-valued twisted loop.
    pub fn from_samples(samples: Vec<Mat2>, tol: f64) -> Result<Self> {
        Self::from_samples_with_det(samples, tol, Some(ONE))
    }

    /// Checked construction; `det` is the required constant determinant,
    /// or `None` to skip that check (e.g. for g, whose determinant is −1).
    pub fn from_samples_with_det(samples: Vec<Mat2>, tol: f64, det: Option<C>) -> Result<Self> {
        check_n(samples.len())?;
        if !(tol > 0.0) {
            return Err(DpwError::Config(format!("tolerance must be positive, got {tol}")));
        }
        if let Some(k) = samples.iter().position(|m| !m.is_finite()) {
            return Err(DpwError::DomainError(format!("non-finite loop value at sample {k}")));
        }
        let lp = Self::from_samples_unchecked(samples, tol);
        lp.check(det)?;
        Ok(lp)
    }

    fn check(&self, det: Option<C>) -> Result<()> {
        let tw = self.twist_defect();
        if tw > self.tol {
            return Err(DpwError::TwistViolation(format!(
                "parity defect {tw:.3e} exceeds {:.1e} (relative to the largest coefficient)",
                self.tol
            )));
        }
        if let Some(d) = det {
            let dd = self.det_defect(d);
            if dd > self.tol {
                return Err(DpwError::NonUnimodular(format!("max |det - {d}| = {dd:.3e} (relative)")));
            }
        }
        let tail = self.tail();
        if tail > 10.0 * self.tol {
            return Err(DpwError::TailTooFat(format!(
                "Nyquist coefficient {tail:.3e} exceeds {:.1e}; increase n",
                10.0 * self.tol
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn samples(&self) -> &[Mat2] {
        &self.samples
    }

    pub fn point(&self, k: usize) -> C {
        circle_point(k, self.n)
    }

    /// Largest stored degree, n/2.
    pub fn max_degree(&self) -> i64 {
        (self.n / 2) as i64
    }

    /// Laurent coefficient c_j (zero outside |j| ≤ n/2).
    pub fn coeff(&self, j: i64) -> Mat2 {
        let h = self.max_degree();
        if j.abs() > h {
            Mat2::zero()
        } else {
            self.coeffs[(j + h) as usize]
        }
    }

    /// (degree, coefficient) pairs in ascending degree.
    pub fn coeffs(&self) -> impl Iterator<Item = (i64, Mat2)> + '_ {
        let h = self.max_degree();
        self.coeffs.iter().enumerate().map(move |(i, c)| (i as i64 - h, *c))
    }

    /// Largest coefficient entry, the scale for relative checks.
    pub fn scale(&self) -> f64 {
        self.coeffs.iter().map(Mat2::max_abs).fold(0.0, f64::max)
    }

    fn rel(&self) -> f64 {
        self.scale().max(1.0)
    }

    pub fn twist_defect(&self) -> f64 {
        self.coeffs()
            .map(|(j, c)| (c - c.parity_part(j.rem_euclid(2) == 1)).max_abs())
            .fold(0.0, f64::max)
            / self.rel()
    }

    /// max_k |det(sample_k) − d| relative to the squared sample size.
    pub fn det_defect(&self, d: C) -> f64 {
        self.samples
            .iter()
            .map(|m| (m.det() - d).norm() / m.max_abs().max(1.0).powi(2))
            .fold(0.0, f64::max)
    }

    /// max(‖c_{−n/2}‖, ‖c_{n/2}‖) relative to the largest coefficient.
    pub fn tail(&self) -> f64 {
        let h = self.max_degree();
        self.coeff(h).max_abs().max(self.coeff(-h).max_abs()) / self.rel()
    }

    /// Energy in degrees of the wrong sign: `positive = true` measures
    /// j > 0, otherwise j < 0. Relative to the largest coefficient.
    pub fn degree_leak(&self, positive: bool) -> f64 {
        self.coeffs()
            .filter(|(j, _)| if positive { *j > 0 } else { *j < 0 })
            .map(|(_, c)| c.max_abs())
            .fold(0.0, f64::max)
            / self.rel()
    }

    /// Laurent sum at an arbitrary λ ≠ 0.
    pub fn eval(&self, lambda: C) -> Mat2 {
        let inv = lambda.inv();
        self.coeffs().map(|(j, c)| c * if j >= 0 { lambda.powi(j as i32) } else { inv.powi((-j) as i32) }).sum()
    }

    /// Samples of λ∂_λ of the loop, by multiplying c_j by j.
    pub fn lambda_derivative_samples(&self) -> Vec<Mat2> {
        let h = self.max_degree();
        let scaled: Vec<Mat2> = self.coeffs().map(|(j, c)| c * j as f64).collect();
        debug_assert_eq!(scaled.len(), (2 * h + 1) as usize);
        samples_from_coeffs(&scaled, self.n)
    }

    /// Pointwise map over samples; the result is not re-checked.
    pub fn map(&self, f: impl Fn(C, Mat2) -> Mat2) -> CircleLoop {
        let s = self.samples.iter().enumerate().map(|(k, m)| f(self.point(k), *m)).collect();
        CircleLoop::from_samples_unchecked(s, self.tol)
    }

    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self
            .coeffs()
            .map(|(j, c)| {
                let e: Vec<Value> = c.0.iter().flatten().map(|z| json!([z.re, z.im])).collect();
                json!([j, e])
            })
            .collect();
        json!({ "n": self.n, "tol": self.tol, "coeffs": coeffs })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| DpwError::Config(format!("loop JSON: {m}"));
        let n = v["n"].as_u64().ok_or_else(|| bad("missing n"))? as usize;
        let tol = v["tol"].as_f64().ok_or_else(|| bad("missing tol"))?;
        check_n(n)?;
        let h = (n / 2) as i64;
        let mut coeffs = vec![Mat2::zero(); n + 1];
        for item in v["coeffs"].as_array().ok_or_else(|| bad("missing coeffs"))? {
            let j = item[0].as_i64().ok_or_else(|| bad("degree"))?;
            if j.abs() > h {
                return Err(bad("degree out of range"));
            }
            let es = item[1].as_array().ok_or_else(|| bad("entries"))?;
            if es.len() != 4 {
                return Err(bad("need four entries"));
            }
            let mut m = Mat2::zero();
            for (idx, e) in es.iter().enumerate() {
                let re = e[0].as_f64().ok_or_else(|| bad("re"))?;
                let im = e[1].as_f64().ok_or_else(|| bad("im"))?;
                m.0[idx / 2][idx % 2] = C::new(re, im);
            }
            coeffs[(j + h) as usize] = m;
        }
        let samples = samples_from_coeffs(&coeffs, n);
        Ok(CircleLoop { samples, coeffs, n, tol })
    }
}

/// Samples `f` at the n-th roots of unity and checks all loop invariants.
pub fn sample_loop(f: impl Fn(C) -> Mat2, n: usize) -> Result<CircleLoop> {
    sample_loop_with(f, n, DEFAULT_TOL)
}

pub fn sample_loop_with(f: impl Fn(C) -> Mat2, n: usize, tol: f64) -> Result<CircleLoop> {
    check_n(n)?;
    CircleLoop::from_samples((0..n).map(|k| f(circle_point(k, n))).collect(), tol)
}

/// Middle term of a splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MiddleTerm {
    Identity,
    /// diag(1, −1).
    J,
    /// w = [[0, λ], [−λ⁻¹, 0]].
    W,
}

impl MiddleTerm {
    pub fn at(&self, lambda: C) -> Mat2 {
        match self {
            MiddleTerm::Identity => Mat2::identity(),
            MiddleTerm::J => Mat2::j(),
            MiddleTerm::W => Mat2::offdiag(lambda, -lambda.inv()),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            MiddleTerm::Identity => "identity",
            MiddleTerm::J => "diag(1,-1)",
            MiddleTerm::W => "w",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BirkhoffFactors {
    /// Holomorphic outside the disk, identity at λ = ∞.
    pub minus: CircleLoop,
    pub middle: MiddleTerm,
    /// Holomorphic inside the disk with plus(0) = diag(k, 1/k).
    pub plus: CircleLoop,
    /// k of plus(0) = diag(k, 1/k); real for the loops of interest, see
    /// [`BirkhoffFactors::real_theta`].
    pub theta: C,
    /// max_k ‖minus·middle·plus − g‖ relative to max(1, ‖g‖).
    pub residual: f64,
    /// min |R_ii| / max |R_ii| of the least-squares system.
    pub conditioning: f64,
}

impl BirkhoffFactors {
    /// k as a real number, subject to the big-cell thresholds.
    pub fn real_theta(&self) -> Result<f64> {
        let k = self.theta;
        if !(k.norm() > THETA_MIN) {
            return Err(DpwError::NotFactorizable(format!("|k| = {:.3e} below {THETA_MIN:.0e}", k.norm())));
        }
        if k.im.abs() / k.norm() >= THETA_MAX_IMAG {
            return Err(DpwError::ComplexTheta(format!("k = {k}")));
        }
        Ok(k.re)
    }
}

/// g = minus·middle·plus with minus(∞) = Id. The minus part is found as
/// m = minus⁻¹ = Id + Σ_{j=1..L} m_j λ^{−j} from the condition that m·g has
/// no coefficients of degree −1..−(n/2−1).
///
/// The square finite section (L = n/2 − 1) is numerically singular for the
/// frames of interest: its last rows probe the opposite (plus·minus)
/// splitting, which need not exist. Taking L = n/4 and solving the
/// overdetermined system in the least-squares sense avoids that, at the cost
/// of assuming the minus coefficients have decayed by degree n/4.
pub fn birkhoff_factorize(g: &CircleLoop) -> Result<BirkhoffFactors> {
    birkhoff_factorize_with(g, (g.n() / 4).max(1))
}

/// As [`birkhoff_factorize`] with an explicit number of minus coefficients.
pub fn birkhoff_factorize_with(g: &CircleLoop, unknowns: usize) -> Result<BirkhoffFactors> {
    let n = g.n();
    let h = n as i64 / 2;
    let rows = h - 1;
    let unknowns = unknowns.clamp(1, rows as usize);
    let co = |d: i64| if d.abs() < h { g.coeff(d) } else { Mat2::zero() };
    // Unknown x[(j, α), ρ] = m_j[ρ][α]; equation (k, β):
    // Σ_{j,α} m_j[ρ][α]·c_{j−k}[α][β] = −c_{−k}[ρ][β].
    let a = linalg::from_fn(2 * rows as usize, 2 * unknowns, |row, col| {
        let (k, beta) = (row / 2 + 1, row % 2);
        let (j, alpha) = (col / 2 + 1, col % 2);
        co(j as i64 - k as i64).0[alpha][beta]
    });
    let rhs = linalg::from_fn(2 * rows as usize, 2, |row, rho| {
        let (k, beta) = (row / 2 + 1, row % 2);
        -co(-(k as i64)).0[rho][beta]
    });
    let (x, cond) = linalg::lstsq(&a, &rhs);
    if !(cond > MIN_R_RATIO) {
        return Err(DpwError::NotFactorizable(format!(
            "Toeplitz column section is rank deficient (R ratio {cond:.2e})"
        )));
    }
    let mut ms = vec![Mat2::identity()];
    for j in 0..unknowns {
        let mut m = Mat2::zero();
        for rho in 0..2 {
            for alpha in 0..2 {
                m.0[rho][alpha] = x[(2 * j + alpha, rho)];
            }
        }
        ms.push(m);
    }
    if ms.iter().any(|m| !m.is_finite()) {
        return Err(DpwError::NotFactorizable("non-finite minus coefficients".into()));
    }
    let p0: Mat2 = ms.iter().enumerate().map(|(j, m)| *m * co(j as i64)).sum();
    let det0 = p0.det();
    let middle = if (det0 + 1.0).norm() < (det0 - 1.0).norm() { MiddleTerm::J } else { MiddleTerm::Identity };
    let mid = middle.at(ONE);
    let theta = p0.a();

    let mut minus_s = Vec::with_capacity(n);
    let mut plus_s = Vec::with_capacity(n);
    for k in 0..n {
        let inv = circle_point(k, n).inv();
        let mut m = Mat2::zero();
        let mut pw = ONE;
        for mj in &ms {
            m = m + *mj * pw;
            pw *= inv;
        }
        minus_s.push(m.inv());
        // mid is its own inverse.
        plus_s.push(mid * m * g.samples()[k]);
    }
    let minus = CircleLoop::from_samples_unchecked(minus_s, g.tol());
    let plus = CircleLoop::from_samples_unchecked(plus_s, g.tol());
    let residual = (0..n)
        .map(|k| {
            let gk = g.samples()[k];
            (minus.samples()[k] * mid * plus.samples()[k] - gk).max_abs() / gk.max_abs().max(1.0)
        })
        .fold(0.0, f64::max);
    if theta == ZERO || !(residual <= MAX_SPLIT_RESIDUAL) {
        return Err(DpwError::NotFactorizable(format!(
            "splitting residual {residual:.2e} (g is numerically outside the big cell)"
        )));
    }
    Ok(BirkhoffFactors { minus, middle, plus, theta, residual, conditioning: cond })
}

#[derive(Debug, Clone)]
pub struct IwasawaFactors {
    /// SU(1,1)-valued loop.
    pub f: CircleLoop,
    pub w_case: bool,
    /// Plus loop with B(0) = diag(ρ, 1/ρ).
    pub b: CircleLoop,
    pub rho0: f64,
    /// The real k read off the Birkhoff splitting of g.
    pub k: f64,
    /// max_k ‖F*JF − J‖ / max(1, ‖F‖²).
    pub unitarity_defect: f64,
    /// max_k ‖F·w·B − φ‖ / (‖F‖·‖B‖).
    pub reconstruction_defect: f64,
    /// Error estimate for ρ₀ from the splitting residuals.
    pub rho_error: f64,
    pub birkhoff_residual: f64,
}

impl IwasawaFactors {
    pub fn middle(&self) -> MiddleTerm {
        if self.w_case {
            MiddleTerm::W
        } else {
            MiddleTerm::Identity
        }
    }
}

/// g = φ(1/λ̄)*·J·φ(λ) on the circle, where 1/λ̄ = λ.
pub fn g_from_phi(phi: &CircleLoop) -> CircleLoop {
    phi.map(|_, m| m.ct() * Mat2::j() * m)
}

pub fn iwasawa_factorize(phi: &CircleLoop) -> Result<IwasawaFactors> {
    iwasawa_factorize_with_g(phi, &g_from_phi(phi))
}

/// Iwasawa splitting φ = F·w·B from a separately computed g (for large
/// frames g has to be formed in extended precision).
pub fn iwasawa_factorize_with_g(phi: &CircleLoop, g: &CircleLoop) -> Result<IwasawaFactors> {
    if phi.n() != g.n() {
        return Err(DpwError::Config("phi and g sample counts differ".into()));
    }
    let bf = birkhoff_factorize(g)?;
    if bf.middle != MiddleTerm::J {
        return Err(DpwError::NotFactorizable("g does not have determinant -1".into()));
    }
    let k = bf.real_theta()?;
    let w_case = k < 0.0;
    let s = k.signum();
    let norm = Mat2::diag(C::new(s / k.abs().sqrt(), 0.0), C::new(s * k.abs().sqrt(), 0.0));
    let b = bf.plus.map(|_, p| norm * p);
    let mid = if w_case { MiddleTerm::W } else { MiddleTerm::Identity };
    let n = phi.n();
    let f_s: Vec<Mat2> = (0..n)
        .map(|i| {
            let lam = circle_point(i, n);
            phi.samples()[i] * b.samples()[i].inv() * mid.at(lam).inv()
        })
        .collect();
    let f = CircleLoop::from_samples_unchecked(f_s, phi.tol());
    let j = Mat2::j();
    let unitarity_defect = f
        .samples()
        .iter()
        .map(|m| (m.ct() * j * *m - j).max_abs() / m.max_abs().max(1.0).powi(2))
        .fold(0.0, f64::max);
    let reconstruction_defect = (0..n)
        .map(|i| {
            let (fi, bi) = (f.samples()[i], b.samples()[i]);
            let lam = circle_point(i, n);
            (fi * mid.at(lam) * bi - phi.samples()[i]).max_abs() / (fi.max_abs() * bi.max_abs()).max(1.0)
        })
        .fold(0.0, f64::max);
    let rho0 = k.abs().sqrt();
    let leak = bf.minus.degree_leak(true).max(bf.plus.degree_leak(false));
    let rho_error = rho0 * bf.residual.max(leak).max(g.tail()).max(1e-13) * 10.0;
    Ok(IwasawaFactors {
        f,
        w_case,
        b,
        rho0,
        k,
        unitarity_defect,
        reconstruction_defect,
        rho_error,
        birkhoff_residual: bf.residual,
    })
}
