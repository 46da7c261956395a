//! sinh-Gordon profiles and Sym–Bobenko surfaces in ℝ^{2,1}.
//!
//! ℝ^{2,1} is identified with the J-skew matrices via the basis
//! e₀ = ½diag(i, −i) (timelike), e₁ = ½[[0, 1], [1, 0]], e₂ = ½[[0, i], [−i, 0]],
//! with ⟨X, Y⟩ = 2·tr(XY). Coordinates are listed as (x₁, x₂, x₀).

use crate::error::{DpwError, Result};
use crate::loopcore::CircleLoop;
use crate::mat2::{Mat2, I, ONE, ZERO};
use crate::rhfactor::{self, FactorizeOptions};
use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::fmt::Write as _;

pub const DEFAULT_H: f64 = 0.5;
/// Laurent tail beyond which spectral differentiation is not trusted.
pub const MAX_TAIL: f64 = 1e-10;
/// Relative unitarity defect accepted for a frame fed to Sym–Bobenko.
pub const MAX_UNITARITY: f64 = 1e-6;
/// Largest imaginary part of u or v that is silently discarded.
pub const MAX_IMAG: f64 = 1e-9;

/// One node of a profile; u and v are None where the factorization failed.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileNode {
    pub x: f64,
    pub r: f64,
    pub u: Option<f64>,
    pub v: Option<f64>,
    /// ¼(u_xx + u_x/x) − e^{2u} + e^{−2u} by fourth-order differences in log x.
    pub residual: Option<f64>,
    /// The same defect from the r-form ¼(v_rr + v_r/r) − r⁶e^{2v} + r⁻²e^{−2v}.
    pub residual_r: Option<f64>,
    pub imag: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinhGordonProfile {
    pub a: f64,
    pub nodes: Vec<ProfileNode>,
}

impl SinhGordonProfile {
    pub fn failures(&self) -> impl Iterator<Item = &ProfileNode> {
        self.nodes.iter().filter(|n| n.error.is_some())
    }

    pub fn max_residual(&self) -> Option<f64> {
        self.nodes.iter().filter_map(|n| n.residual.map(f64::abs)).reduce(f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.nodes.iter().map(|n| n.imag).fold(0.0, f64::max)
    }

    /// u(x)/log x at the first node.
    pub fn near_zero_ratio(&self) -> Option<f64> {
        let n = self.nodes.first()?;
        Some(n.u? / n.x.ln())
    }

    /// One JSON object per node: {x, u, v, residual}, plus an error field on
    /// failed nodes.
    pub fn to_json_lines(&self) -> String {
        let mut s = String::new();
        for n in &self.nodes {
            let mut o = json!({ "x": n.x, "u": n.u, "v": n.v, "residual": n.residual });
            if let Some(e) = &n.error {
                o["error"] = json!(e);
            }
            writeln!(s, "{o}").expect("write to string");
        }
        s
    }
}

/// Half-width of the profile difference stencil.
const PROFILE_STENCIL: usize = 2;

/// Second derivative at nodes[i] of samples over the given abscissae.
fn second_derivative(xs: &[f64], vals: &[f64]) -> f64 {
    let z = xs[xs.len() / 2];
    let (_, d2) = fd_weights(xs, z);
    d2.iter().zip(vals).map(|(w, v)| w * v).sum()
}

/// v(r) per node from the global factorization, u = log(r²e^v), and the
/// u-equation defect at interior nodes in x = r²/2. The radial Laplacian is
/// taken in s = log x, where u_xx + u_x/x = u_ss/x², with five-point weights.
pub fn sinh_profile(r_grid: &[f64], a: f64) -> Result<SinhGordonProfile> {
    if r_grid.is_empty() {
        return Err(DpwError::Config("empty r grid".into()));
    }
    if r_grid.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(DpwError::Config("r grid must be positive".into()));
    }
    if r_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(DpwError::Config("r grid must be strictly increasing".into()));
    }
    let vals: Vec<Result<rhfactor::VValue>> = r_grid.par_iter().map(|&r| rhfactor::v_of_r(r, a)).collect();
    let mut nodes: Vec<ProfileNode> = r_grid
        .iter()
        .zip(vals)
        .map(|(&r, val)| {
            let x = 0.5 * r * r;
            match val {
                Ok(vv) if vv.imag <= MAX_IMAG => ProfileNode {
                    x,
                    r,
                    u: Some(2.0 * r.ln() + vv.v),
                    v: Some(vv.v),
                    residual: None,
                    residual_r: None,
                    imag: vv.imag,
                    error: None,
                },
                Ok(vv) => ProfileNode {
                    x,
                    r,
                    u: None,
                    v: None,
                    residual: None,
                    residual_r: None,
                    imag: vv.imag,
                    error: Some(format!("geometry: imaginary part {:.2e} of v exceeds {MAX_IMAG:e}", vv.imag)),
                },
                Err(e) => ProfileNode {
                    x,
                    r,
                    u: None,
                    v: None,
                    residual: None,
                    residual_r: None,
                    imag: 0.0,
                    error: Some(format!("{}: {e}", e.module())),
                },
            }
        })
        .collect();
    let p = PROFILE_STENCIL;
    for i in p..nodes.len().saturating_sub(p) {
        let win = &nodes[i - p..=i + p];
        let (Some(us), Some(vs)) = (
            win.iter().map(|n| n.u).collect::<Option<Vec<f64>>>(),
            win.iter().map(|n| n.v).collect::<Option<Vec<f64>>>(),
        ) else {
            continue;
        };
        let ss: Vec<f64> = win.iter().map(|n| n.x.ln()).collect();
        let ts: Vec<f64> = win.iter().map(|n| n.r.ln()).collect();
        let (x, r, u0, v0) = (nodes[i].x, nodes[i].r, us[p], vs[p]);
        let res = 0.25 * second_derivative(&ss, &us) / (x * x) - (2.0 * u0).exp() + (-2.0 * u0).exp();
        let res_r = 0.25 * second_derivative(&ts, &vs) / (r * r) - r.powi(6) * (2.0 * v0).exp() + (-2.0 * v0).exp() / (r * r);
        nodes[i].residual = Some(res);
        nodes[i].residual_r = Some(res_r);
    }
    Ok(SinhGordonProfile { a, nodes })
}

/// n log-spaced x values on [x_min, x_max] as r = √(2x).
pub fn log_spaced_r(x_min: f64, x_max: f64, n: usize) -> Vec<f64> {
    let (l0, l1) = (x_min.ln(), x_max.ln());
    (0..n)
        .map(|i| {
            let s = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
            (2.0 * (l0 + s * (l1 - l0)).exp()).sqrt()
        })
        .collect()
}

fn basis() -> [Mat2; 3] {
    // e₁, e₂, e₀ in coordinate order.
    [
        Mat2::offdiag(C::new(0.5, 0.0), C::new(0.5, 0.0)),
        Mat2::offdiag(C::new(0.0, 0.5), C::new(0.0, -0.5)),
        Mat2::diag(C::new(0.0, 0.5), C::new(0.0, -0.5)),
    ]
}

/// (x₁, x₂, x₀) with x₁ = 2tr(fe₁), x₂ = 2tr(fe₂), x₀ = −2tr(fe₀), and the
/// largest imaginary part dropped on the way.
pub fn to_minkowski(f: &Mat2) -> ([f64; 3], f64) {
    let [e1, e2, e0] = basis();
    let c = [(*f * e1).trace() * 2.0, (*f * e2).trace() * 2.0, (*f * e0).trace() * -2.0];
    let imag = c.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    ([c[0].re, c[1].re, c[2].re], imag)
}

pub fn from_minkowski(x: [f64; 3]) -> Mat2 {
    let [e1, e2, e0] = basis();
    e1 * x[0] + e2 * x[1] + e0 * x[2]
}

/// ⟨a, b⟩ = a₁b₁ + a₂b₂ − a₀b₀.
pub fn minkowski(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] - a[2] * b[2]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymPoint {
    pub f: Mat2,
    pub coords: [f64; 3],
    /// Imaginary residue of the coordinates.
    pub imag: f64,
    /// ‖f*J + Jf‖.
    pub lie_defect: f64,
}

fn check_inputs(lambda0: C, h: f64) -> Result<()> {
    if (lambda0.norm() - 1.0).abs() > 1e-12 {
        return Err(DpwError::DomainError(format!("lambda0 = {lambda0} is not on the unit circle")));
    }
    if h == 0.0 || !h.is_finite() {
        return Err(DpwError::DomainError(format!("mean curvature must be finite and nonzero, got {h}")));
    }
    Ok(())
}

fn check_frame(f: &CircleLoop) -> Result<()> {
    let tail = f.tail();
    if !(tail <= MAX_TAIL) {
        return Err(DpwError::DegenerateFrame(format!("Laurent tail {tail:.2e} of F exceeds {MAX_TAIL:e}")));
    }
    let j = Mat2::j();
    let un = f
        .samples()
        .iter()
        .map(|m| (m.ct() * j * *m - j).max_abs() / m.max_abs().max(1.0).powi(2))
        .fold(0.0, f64::max);
    if !(un <= MAX_UNITARITY) {
        return Err(DpwError::DegenerateFrame(format!("F misses SU(1,1) by {un:.2e}")));
    }
    Ok(())
}

/// F(λ) and λ∂_λF(λ) from the Laurent coefficients.
fn eval_with_derivative(f: &CircleLoop, lambda: C) -> (Mat2, Mat2) {
    let mut v = Mat2::zero();
    let mut d = Mat2::zero();
    for (j, c) in f.coeffs() {
        let p = lambda.powi(j as i32);
        v = v + c * p;
        d = d + c * (p * j as f64);
    }
    (v, d)
}

fn sym_formula(fv: Mat2, dv: Mat2, h: f64) -> SymPoint {
    let j = Mat2::j();
    let inv = fv.inv();
    let f = (dv * inv + fv * j * inv * 0.5) * C::new(0.0, -0.5 / h);
    let (coords, imag) = to_minkowski(&f);
    SymPoint { f, coords, imag, lie_defect: (f.ct() * j + j * f).max_abs() }
}

/// f = (−i/2H)[λ∂_λF·F⁻¹ + ½F·J·F⁻¹] at λ₀, with λ∂_λ taken spectrally.
pub fn sym_bobenko(f: &CircleLoop, lambda0: C, h: f64) -> Result<SymPoint> {
    check_inputs(lambda0, h)?;
    check_frame(f)?;
    let (fv, dv) = eval_with_derivative(f, lambda0);
    Ok(sym_formula(fv, dv, h))
}

/// Sym–Bobenko at z = re^{iθ} from the frame at z = r:
/// F(z, λ) = δ(λ)·T⁻¹·F(r, λe^{−2iθ})·T with T = diag(e^{−iθ}, e^{iθ}) and
/// δ = Id + (iθ/a)[[1, λ], [−1/λ, −1]].
pub fn sym_bobenko_rotated(f_r: &CircleLoop, theta: f64, lambda0: C, h: f64, a: f64) -> Result<SymPoint> {
    check_inputs(lambda0, h)?;
    check_frame(f_r)?;
    Ok(rotated_point(f_r, theta, lambda0, h, a))
}

fn rotated_point(f_r: &CircleLoop, theta: f64, lambda0: C, h: f64, a: f64) -> SymPoint {
    let rot = C::from_polar(1.0, theta);
    let t = Mat2::diag(rot.conj(), rot);
    let ti = Mat2::diag(rot, rot.conj());
    let mu = lambda0 * rot.conj() * rot.conj();
    let (fv, dv) = eval_with_derivative(f_r, mu);
    let c = I * (theta / a);
    let delta = Mat2::identity() + Mat2::new(ONE, lambda0, -lambda0.inv(), -ONE) * c;
    let ddelta = Mat2::new(ZERO, lambda0, lambda0.inv(), ZERO) * c;
    let fz = delta * ti * fv * t;
    let dz = ddelta * ti * fv * t + delta * ti * dv * t;
    sym_formula(fz, dz, h)
}

/// Local differential geometry from central differences in (r, θ) on a
/// square stencil of half-width `GeometryOptions::half_width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalGeometry {
    pub point: SymPoint,
    /// ⟨f_r, f_r⟩, ⟨f_r, f_θ⟩, ⟨f_θ, f_θ⟩.
    pub e: f64,
    pub f: f64,
    pub g: f64,
    /// |⟨f_z, f_z⟩| / ⟨f_z, f_z̄⟩.
    pub conformality: f64,
    /// ½·tr(I⁻¹·II) against the unit timelike normal; defined up to the
    /// orientation of the normal.
    pub mean_curvature: f64,
    /// Conformal factor ⟨f_z, f_z̄⟩ = (E + G/r²)/4.
    pub conformal_factor: f64,
}

/// Weights for the first and second derivative at z from values on the
/// nodes xs, by Fornberg's recursion.
pub fn fd_weights(xs: &[f64], z: f64) -> (Vec<f64>, Vec<f64>) {
    let n = xs.len();
    // c[j][m]: weight of node j for the m-th derivative at z.
    let mut c = vec![[0.0f64; 3]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    for i in 1..n {
        let mut c2 = 1.0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            for m in (0..=2.min(i)).rev() {
                let prev_i = if m > 0 { c[i - 1][m - 1] } else { 0.0 };
                if j == i - 1 {
                    c[i][m] = c1 * (m as f64 * prev_i - (xs[i - 1] - z) * c[i - 1][m]) / c2;
                }
                let prev_j = if m > 0 { c[j][m - 1] } else { 0.0 };
                c[j][m] = ((xs[i] - z) * c[j][m] - m as f64 * prev_j) / c3;
            }
        }
        c1 = c2;
    }
    (c.iter().map(|w| w[1]).collect(), c.iter().map(|w| w[2]).collect())
}

/// Central weights on the unit-spaced nodes −p..=p.
pub fn central_weights(p: usize) -> (Vec<f64>, Vec<f64>) {
    let xs: Vec<f64> = (0..=2 * p).map(|k| k as f64 - p as f64).collect();
    fd_weights(&xs, 0.0)
}

fn combine(pts: &[[f64; 3]], w: &[f64], scale: f64) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (p, c) in pts.iter().zip(w) {
        for k in 0..3 {
            out[k] += c * p[k];
        }
    }
    out.map(|v| v * scale)
}

/// Frames at r + k·dr, k = −p..=p.
#[derive(Debug, Clone)]
pub struct RadialStencil {
    pub r: f64,
    pub dr: f64,
    pub frames: Vec<CircleLoop>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryOptions {
    /// Circle samples of each frame.
    pub n: usize,
    pub dr: f64,
    pub dtheta: f64,
    /// Stencil half-width p; the differences are of order 2p.
    pub half_width: usize,
}

impl Default for GeometryOptions {
    // At r = 2 the vertices vary on a scale of about 0.1 in r and θ and carry
    // relative noise near 1e-11 at |θ| ≈ 1.5; fourth order differences cannot
    // get the metric to 1e-6 there at any step.
    fn default() -> Self {
        GeometryOptions { n: 128, dr: 1e-2, dtheta: 1e-2, half_width: 4 }
    }
}

impl RadialStencil {
    pub fn new(r: f64, a: f64, opts: &GeometryOptions) -> Result<Self> {
        let p = opts.half_width;
        if p == 0 {
            return Err(DpwError::Config("stencil half-width must be at least 1".into()));
        }
        let r_min = r - p as f64 * opts.dr;
        if !(r_min > 0.0) {
            return Err(DpwError::DomainError(format!("r = {r} too small for the stencil step {}", opts.dr)));
        }
        // One contour grid for the whole stencil, sized for its smallest radius.
        let base = rhfactor::ContourGrid::for_radius(r_min)?;
        let fo = FactorizeOptions {
            n: opts.n,
            grid: Some((base.truncation().1, base.per_half())),
            ..Default::default()
        };
        let p = p as i64;
        let frames = (-p..=p)
            .map(|k| rhfactor::global_factorize_with(r + k as f64 * opts.dr, a, &fo).map(|g| g.f))
            .collect::<Result<Vec<_>>>()?;
        for f in &frames {
            check_frame(f)?;
        }
        Ok(RadialStencil { r, dr: opts.dr, frames })
    }

    pub fn half_width(&self) -> usize {
        self.frames.len() / 2
    }

    pub fn centre(&self) -> &CircleLoop {
        &self.frames[self.half_width()]
    }

    pub fn local(&self, theta: f64, dtheta: f64, lambda0: C, h: f64, a: f64) -> Result<LocalGeometry> {
        check_inputs(lambda0, h)?;
        let p = self.half_width();
        let (d1, d2) = central_weights(p);
        let grid: Vec<Vec<[f64; 3]>> = self
            .frames
            .iter()
            .map(|fr| {
                (0..=2 * p)
                    .map(|l| rotated_point(fr, theta + (l as f64 - p as f64) * dtheta, lambda0, h, a).coords)
                    .collect()
            })
            .collect();
        let point = rotated_point(self.centre(), theta, lambda0, h, a);
        let (hr, ht) = (self.dr, dtheta);
        let col: Vec<[f64; 3]> = grid.iter().map(|row| row[p]).collect();
        let fr = combine(&col, &d1, 1.0 / hr);
        let frr = combine(&col, &d2, 1.0 / (hr * hr));
        let ft = combine(&grid[p], &d1, 1.0 / ht);
        let ftt = combine(&grid[p], &d2, 1.0 / (ht * ht));
        let ft_rows: Vec<[f64; 3]> = grid.iter().map(|row| combine(row, &d1, 1.0 / ht)).collect();
        let frt = combine(&ft_rows, &d1, 1.0 / hr);
        let (e, f, g) = (minkowski(&fr, &fr), minkowski(&fr, &ft), minkowski(&ft, &ft));
        let r = self.r;
        let (ec, gc, fc) = (e, g / (r * r), f / r);
        let conformality = ((ec - gc).powi(2) + 4.0 * fc * fc).sqrt() / (ec + gc);
        // Lorentzian cross product: Euclidean cross with the timelike slot negated.
        let cr = [
            fr[1] * ft[2] - fr[2] * ft[1],
            fr[2] * ft[0] - fr[0] * ft[2],
            -(fr[0] * ft[1] - fr[1] * ft[0]),
        ];
        let nn = -minkowski(&cr, &cr);
        if !(nn > 0.0) {
            return Err(DpwError::DegenerateFrame(format!("tangent plane at r = {r}, theta = {theta} is not spacelike")));
        }
        let nrm = cr.map(|v| v / nn.sqrt());
        let (l, m, n) = (minkowski(&frr, &nrm), minkowski(&frt, &nrm), minkowski(&ftt, &nrm));
        let mean_curvature = 0.5 * (l * g - 2.0 * m * f + n * e) / (e * g - f * f);
        Ok(LocalGeometry {
            point,
            e,
            f,
            g,
            conformality,
            mean_curvature,
            conformal_factor: 0.25 * (ec + gc),
        })
    }
}

pub fn local_geometry(r: f64, theta: f64, lambda0: C, h: f64, a: f64, opts: &GeometryOptions) -> Result<LocalGeometry> {
    RadialStencil::new(r, a, opts)?.local(theta, opts.dtheta, lambda0, h, a)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceOptions {
    pub r_range: (f64, f64),
    pub theta_range: (f64, f64),
    pub nr: usize,
    pub ntheta: usize,
    pub lambda0: C,
    pub h: f64,
    pub a: f64,
    pub geometry: GeometryOptions,
}

impl Default for SurfaceOptions {
    fn default() -> Self {
        SurfaceOptions {
            r_range: (0.3, 2.0),
            theta_range: (-1.5, 1.5),
            nr: 40,
            ntheta: 40,
            lambda0: ONE,
            h: DEFAULT_H,
            a: crate::bessel::EULER_GAMMA,
            geometry: GeometryOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SurfaceStats {
    pub max_conformality: f64,
    /// max | |H_measured| − |H| |.
    pub max_mean_curvature_error: f64,
    /// max over radii of the relative θ-spread of E and G/r².
    pub max_metric_theta_variation: f64,
    pub max_lie_defect: f64,
    pub max_imag: f64,
}

#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    pub vertices: Vec<[f64; 3]>,
    /// Quads of 0-based vertex indices.
    pub faces: Vec<[usize; 4]>,
    pub options: SurfaceOptions,
    pub stats: SurfaceStats,
    pub radii: Vec<f64>,
    pub thetas: Vec<f64>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

pub fn surface_mesh(opts: &SurfaceOptions) -> Result<SurfaceMesh> {
    let (r0, r1) = opts.r_range;
    let (t0, t1) = opts.theta_range;
    if opts.nr < 2 || opts.ntheta < 2 {
        return Err(DpwError::Config("mesh needs at least 2 points in each direction".into()));
    }
    if !(r0 > 0.0 && r1 > r0) {
        return Err(DpwError::Config(format!("bad r range ({r0}, {r1})")));
    }
    let margin = opts.geometry.half_width as f64 * opts.geometry.dtheta;
    if !(t1 > t0 && t0 - margin > -std::f64::consts::PI && t1 + margin < std::f64::consts::PI) {
        return Err(DpwError::Config(format!("theta range ({t0}, {t1}) must lie inside (-pi, pi)")));
    }
    check_inputs(opts.lambda0, opts.h)?;
    let radii = linspace(r0, r1, opts.nr);
    let thetas = linspace(t0, t1, opts.ntheta);
    let stencils: Vec<RadialStencil> = radii
        .par_iter()
        .map(|&r| RadialStencil::new(r, opts.a, &opts.geometry))
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<LocalGeometry>> = stencils
        .par_iter()
        .map(|s| {
            thetas
                .iter()
                .map(|&th| s.local(th, opts.geometry.dtheta, opts.lambda0, opts.h, opts.a))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut stats = SurfaceStats::default();
    let mut vertices = Vec::with_capacity(opts.nr * opts.ntheta);
    for (i, row) in rows.iter().enumerate() {
        let r = radii[i];
        let (mut emin, mut emax, mut gmin, mut gmax) = (f64::INFINITY, 0.0f64, f64::INFINITY, 0.0f64);
        for lg in row {
            vertices.push(lg.point.coords);
            stats.max_conformality = stats.max_conformality.max(lg.conformality);
            stats.max_mean_curvature_error =
                stats.max_mean_curvature_error.max((lg.mean_curvature.abs() - opts.h.abs()).abs());
            stats.max_lie_defect = stats.max_lie_defect.max(lg.point.lie_defect);
            stats.max_imag = stats.max_imag.max(lg.point.imag);
            let g = lg.g / (r * r);
            emin = emin.min(lg.e);
            emax = emax.max(lg.e);
            gmin = gmin.min(g);
            gmax = gmax.max(g);
        }
        let var = ((emax - emin) / emax).max((gmax - gmin) / gmax);
        stats.max_metric_theta_variation = stats.max_metric_theta_variation.max(var);
    }
    let nt = opts.ntheta;
    let mut faces = Vec::with_capacity((opts.nr - 1) * (nt - 1));
    for i in 0..opts.nr - 1 {
        for j in 0..nt - 1 {
            let v = i * nt + j;
            faces.push([v, v + nt, v + nt + 1, v + 1]);
        }
    }
    Ok(SurfaceMesh { vertices, faces, options: *opts, stats, radii, thetas })
}

impl SurfaceMesh {
    /// Wavefront OBJ: "v x₁ x₂ x₀" lines, then 1-based quads.
    pub fn to_obj(&self) -> String {
        let mut s = String::with_capacity(self.vertices.len() * 64);
        for v in &self.vertices {
            writeln!(s, "v {:.15e} {:.15e} {:.15e}", v[0], v[1], v[2]).expect("write to string");
        }
        for f in &self.faces {
            writeln!(s, "f {} {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1, f[3] + 1).expect("write to string");
        }
        s
    }

    pub fn sidecar(&self) -> Value {
        let o = &self.options;
        json!({
            "lambda0": [o.lambda0.re, o.lambda0.im],
            "H": o.h,
            "a": o.a,
            "nr": o.nr,
            "ntheta": o.ntheta,
            "rRange": [o.r_range.0, o.r_range.1],
            "thetaRange": [o.theta_range.0, o.theta_range.1],
            "vertices": self.vertices.len(),
            "faces": self.faces.len(),
            "defects": {
                "conformality": self.stats.max_conformality,
                "meanCurvature": self.stats.max_mean_curvature_error,
                "metricThetaVariation": self.stats.max_metric_theta_variation,
                "lieAlgebra": self.stats.max_lie_defect,
                "imaginary": self.stats.max_imag,
            },
        })
    }
}
