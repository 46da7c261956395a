//! The radial Riemann–Hilbert problem on the real axis and the global
//! Iwasawa factorization built from its solution.
//!
//! Contour: Γ₊ = (0, ∞) and Γ₋ = (−∞, 0), oriented left to right, with the
//! jump Y₊ = Y₋·G where G = (k₀k₁⁻¹)ᵗ. Both halves are parametrized by
//! λ = ±eᵗ, t ∈ [−S, S], and Y = Id + C[μ] is found by Nyström collocation
//! of μ − C₋[μ](G − Id) = G − Id.

use crate::bessel::EULER_GAMMA;
use crate::error::{DpwError, Result};
use crate::linalg::{from_fn, DenseLu};
use crate::loopcore::{self, circle_point, CircleLoop, IwasawaFactors, MiddleTerm};
use crate::mat2::{Lift, Mat2, I, ONE, ZERO};
use crate::smythframe::{self, SERIES_CAP};
use num_complex::Complex64 as C;
use serde_json::{json, Value};
use std::f64::consts::PI;

/// Nodes per unit of t.
pub const DEFAULT_DENSITY: f64 = 16.0;
/// The jump deviation at the truncation ends is at most e^{−2·END_EXPONENT}.
pub const END_EXPONENT: f64 = 40.0;
/// Extra t beyond the point where the end exponent is reached.
pub const END_MARGIN: f64 = 0.5;
/// Fine points per unit of distance to the contour when evaluating C[μ]
/// off the contour (trapezoid error ~ e^{−2π·this}).
const NEAR_FACTOR: f64 = 6.0;
const MIN_PIVOT_RATIO: f64 = 1e-14;

/// Symmetric grid λ = ±eᵗ; Γ₊ nodes first, then Γ₋, both by increasing t.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourGrid {
    t: Vec<f64>,
    h: f64,
    s_max: f64,
}

impl ContourGrid {
    /// Default grid for radius r: S with r²·cosh S ≥ 40 (plus a margin),
    /// 16 nodes per unit t, an odd count per half so that λ = ±1 are nodes.
    pub fn for_radius(r: f64) -> Result<Self> {
        Self::for_radius_with_density(r, DEFAULT_DENSITY)
    }

    pub fn for_radius_with_density(r: f64, density: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(DpwError::DomainError(format!("r must be positive, got {r}")));
        }
        if !(density > 0.0) {
            return Err(DpwError::Config(format!("grid density must be positive, got {density}")));
        }
        let s = (END_EXPONENT / (r * r)).max(1.0).acosh().max(1.0) + END_MARGIN;
        let per_half = ((2.0 * s * density).ceil() as usize) | 1;
        Self::new(s, per_half)
    }

    /// Grid with n_nodes total (split evenly between the halves) on a
    /// truncation chosen for r.
    pub fn with_nodes(r: f64, n_nodes: usize) -> Result<Self> {
        let base = Self::for_radius(r)?;
        if n_nodes < 8 || !n_nodes.is_multiple_of(2) {
            return Err(DpwError::Config(format!("nNodes must be even and at least 8, got {n_nodes}")));
        }
        Self::new(base.s_max, n_nodes / 2)
    }

    pub fn new(s_max: f64, per_half: usize) -> Result<Self> {
        if !(s_max > 0.0) || per_half < 4 {
            return Err(DpwError::Config(format!("bad contour grid: S = {s_max}, {per_half} nodes per half")));
        }
        let h = 2.0 * s_max / (per_half - 1) as f64;
        let t = (0..per_half).map(|i| -s_max + h * i as f64).collect();
        Ok(ContourGrid { t, h, s_max })
    }

    pub fn per_half(&self) -> usize {
        self.t.len()
    }

    pub fn n_nodes(&self) -> usize {
        2 * self.t.len()
    }

    pub fn truncation(&self) -> (f64, f64) {
        (-self.s_max, self.s_max)
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn node(&self, k: usize) -> f64 {
        let n = self.per_half();
        if k < n {
            self.t[k].exp()
        } else {
            -self.t[k - n].exp()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|k| self.node(k)).collect()
    }

    /// Trapezoid weights for dλ along the oriented real axis.
    pub fn weight(&self, k: usize) -> f64 {
        self.h * self.t[k % self.per_half()].exp()
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|k| self.weight(k)).collect()
    }

    /// Index of the node at −λ.
    pub fn negated(&self, k: usize) -> usize {
        let n = self.per_half();
        if k < n {
            k + n
        } else {
            k - n
        }
    }

    /// Index of the node at 1/λ.
    pub fn inverted(&self, k: usize) -> usize {
        let n = self.per_half();
        let (half, i) = (k / n, k % n);
        half * n + (n - 1 - i)
    }

    /// Index of the node λ = 1 (or −1 when `negative`), if the grid has it.
    pub fn unit_node(&self, negative: bool) -> Option<usize> {
        let n = self.per_half();
        (n % 2 == 1).then(|| (n - 1) / 2 + if negative { n } else { 0 })
    }

    /// max ‖G − Id‖ at the four truncation ends.
    pub fn end_jump_deviation(&self, r: f64) -> f64 {
        let n = self.per_half();
        [0, n - 1, n, 2 * n - 1]
            .iter()
            .map(|&k| (jump_matrix(r, self.node(k)).expect("nonzero node") - Mat2::identity()).max_abs())
            .fold(0.0, f64::max)
    }
}

/// G on Γ₊ = [[1+q, q], [−q, 1−q]] with q = i·e^{−r²(λ+1/λ)}; on Γ₋
/// [[1−q, q], [−q, 1+q]] with q = i·e^{r²(λ+1/λ)}.
pub fn jump_matrix(r: f64, lambda: f64) -> Result<Mat2> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(DpwError::DomainError(format!("jump matrix needs a nonzero real lambda, got {lambda}")));
    }
    let e = r * r * (lambda + 1.0 / lambda);
    Ok(if lambda > 0.0 {
        let q = I * (-e).exp();
        Mat2::new(ONE + q, q, -q, ONE - q)
    } else {
        let q = I * e.exp();
        Mat2::new(ONE - q, q, -q, ONE + q)
    })
}

/// k₀ and k₁ at a real λ: k̃ on the sheets m = 0 and m = 1 that meet the
/// positive axis at arg 0 and the negative axis at arg ±π.
pub fn contour_branches(r: f64, lambda: f64, a: f64) -> Result<(Mat2, Mat2)> {
    let m = lambda.abs();
    let (a0, a1) = if lambda > 0.0 { (0.0, 0.0) } else { (PI, -PI) };
    Ok((
        smythframe::ktilde(r, Lift::new(m, a0), 0, a)?,
        smythframe::ktilde(r, Lift::new(m, a1), 1, a)?,
    ))
}

#[derive(Debug, Clone)]
pub struct RhSolution {
    pub r: f64,
    pub grid: ContourGrid,
    pub mu: Vec<Mat2>,
    pub y_plus: Vec<Mat2>,
    pub y_minus: Vec<Mat2>,
    pub y_zero: Mat2,
    /// max over nodes of ‖Y₊ − Y₋G‖.
    pub residual: f64,
    /// ‖Y(0) − Y(0)_coarse‖ against a solve at two thirds of the density.
    pub refinement_estimate: Option<f64>,
    pub pivot_ratio: f64,
}

/// Σ_j Ĉ_kj·x_j, the Nyström lower boundary value of the Cauchy transform.
/// Ĉ_kk = −½; on the same half the principal value uses the nodes with odd
/// index offset at double weight.
fn cauchy_minus_entry(grid: &ContourGrid, k: usize, j: usize) -> C {
    if k == j {
        return C::new(-0.5, 0.0);
    }
    let n = grid.per_half();
    let same = k / n == j / n;
    let w = if same {
        if (k % n).abs_diff(j % n) % 2 == 1 {
            2.0 * grid.weight(j)
        } else {
            return ZERO;
        }
    } else {
        grid.weight(j)
    };
    C::new(w / (grid.node(j) - grid.node(k)), 0.0) / C::new(0.0, 2.0 * PI)
}

fn solve_on(r: f64, grid: &ContourGrid) -> Result<(Vec<Mat2>, Vec<Mat2>, f64)> {
    let nt = grid.n_nodes();
    let gi: Vec<Mat2> = (0..nt)
        .map(|k| jump_matrix(r, grid.node(k)).map(|g| g - Mat2::identity()))
        .collect::<Result<_>>()?;
    let chat = from_fn(nt, nt, |k, j| cauchy_minus_entry(grid, k, j));
    // Row (k, β), column (j, α): δ − Ĉ_kj·(G_k − Id)_{αβ}.
    let a = from_fn(2 * nt, 2 * nt, |row, col| {
        let (k, beta) = (row / 2, row % 2);
        let (j, alpha) = (col / 2, col % 2);
        let d = if row == col { ONE } else { ZERO };
        d - chat[(k, j)] * gi[k].0[alpha][beta]
    });
    let rhs = from_fn(2 * nt, 2, |row, rho| gi[row / 2].0[rho][row % 2]);
    let lu = DenseLu::new(&a, "RH collocation")?;
    if lu.pivot_ratio < MIN_PIVOT_RATIO {
        return Err(DpwError::SingularSystem(format!(
            "collocation pivot ratio {:.2e} at r = {r}",
            lu.pivot_ratio
        )));
    }
    let x = lu.solve(&rhs);
    let mu: Vec<Mat2> = (0..nt)
        .map(|j| Mat2::new(x[(2 * j, 0)], x[(2 * j + 1, 0)], x[(2 * j, 1)], x[(2 * j + 1, 1)]))
        .collect();
    let y_minus: Vec<Mat2> = (0..nt)
        .map(|k| Mat2::identity() + (0..nt).map(|j| mu[j] * chat[(k, j)]).sum::<Mat2>())
        .collect();
    Ok((mu, y_minus, lu.pivot_ratio))
}

fn y_zero_of(grid: &ContourGrid, mu: &[Mat2]) -> Mat2 {
    let s: Mat2 = (0..grid.n_nodes()).map(|j| mu[j] * (grid.weight(j) / grid.node(j))).sum();
    Mat2::identity() + s * C::new(0.0, -0.5 / PI)
}

/// Solves the jump problem on `grid`, with a companion solve at two thirds
/// of the density for the refinement estimate.
pub fn solve_rh(r: f64, grid: &ContourGrid) -> Result<RhSolution> {
    let sol = solve_rh_single(r, grid)?;
    let coarse_n = ((grid.per_half() as f64 * 2.0 / 3.0).ceil() as usize) | 1;
    let est = ContourGrid::new(grid.s_max, coarse_n)
        .and_then(|g| solve_rh_single(r, &g))
        .map(|c| (c.y_zero - sol.y_zero).max_abs())
        .ok();
    Ok(RhSolution { refinement_estimate: est, ..sol })
}

/// One collocation solve, no refinement estimate.
pub fn solve_rh_single(r: f64, grid: &ContourGrid) -> Result<RhSolution> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(DpwError::DomainError(format!("r must be positive, got {r}")));
    }
    let dev = grid.end_jump_deviation(r);
    if dev > 1e-16 {
        return Err(DpwError::TruncationError(format!(
            "jump deviates from Id by {dev:.2e} at the truncation ends (S = {})",
            grid.s_max
        )));
    }
    let (mu, y_minus, pivot_ratio) = solve_on(r, grid)?;
    let nt = grid.n_nodes();
    let y_plus: Vec<Mat2> = (0..nt).map(|k| y_minus[k] + mu[k]).collect();
    let residual = (0..nt)
        .map(|k| (y_plus[k] - y_minus[k] * jump_matrix(r, grid.node(k)).expect("nonzero node")).max_abs())
        .fold(0.0, f64::max);
    let y_zero = y_zero_of(grid, &mu);
    Ok(RhSolution {
        r,
        grid: grid.clone(),
        mu,
        y_plus,
        y_minus,
        y_zero,
        residual,
        refinement_estimate: None,
        pivot_ratio,
    })
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryReport {
    /// conj(Y₊) = Y₋ on the real nodes.
    pub conjugation: f64,
    /// J·Y₋(−λ)·J = Y₊(λ).
    pub half_turn: f64,
    /// Y₊(λ) = diag(α, −1/α)·(Y₊(1/λ)*)⁻¹·J.
    pub inversion: f64,
    /// |∫ (Y₊ − Id)(Y₋ − Id)* dλ| over the truncated contour.
    pub orthogonality: f64,
    /// Size of the pieces the grid leaves out: Y ≈ Id + c/λ beyond e^S and
    /// Y ≈ Y(0) inside e^{−S}.
    pub truncation_bound: f64,
    /// max(|Im Y(0)|, |Y(0) off-diagonal|).
    pub y_zero_defect: f64,
}

impl SymmetryReport {
    pub fn max(&self) -> f64 {
        self.conjugation.max(self.half_turn).max(self.inversion).max(self.y_zero_defect)
    }
}

impl RhSolution {
    /// α with Y(0) = diag(α, 1/α).
    pub fn alpha(&self) -> f64 {
        self.y_zero.a().re
    }

    /// Y(λ) off the contour. μ is sinc-interpolated onto a grid fine enough
    /// that the trapezoid rule resolves the Cauchy kernel at λ.
    pub fn eval(&self, lambda: C) -> Result<Mat2> {
        let g = &self.grid;
        let n = g.per_half();
        let th = lambda.arg();
        let mut acc = Mat2::zero();
        for half in 0..2 {
            // Distance to the half-line in the t-plane.
            let d = if half == 0 { th.abs() } else { PI - th.abs() };
            if d < 1e-9 {
                return Err(DpwError::DomainError(format!("lambda = {lambda} lies on the contour")));
            }
            let sign = if half == 0 { 1.0 } else { -1.0 };
            let f = ((NEAR_FACTOR * g.h / d).ceil() as usize).max(1);
            let mu = &self.mu[half * n..(half + 1) * n];
            if f == 1 {
                for (i, &tj) in g.t.iter().enumerate() {
                    let s = sign * tj.exp();
                    acc = acc + mu[i] * (g.h * tj.exp() / (C::new(s, 0.0) - lambda));
                }
                continue;
            }
            let hf = g.h / f as f64;
            for q in 0..=(n - 1) * f {
                let tf = -g.s_max + hf * q as f64;
                let mut m = Mat2::zero();
                if q % f == 0 {
                    m = mu[q / f];
                } else {
                    for (i, &tj) in g.t.iter().enumerate() {
                        m = m + mu[i] * sinc((tf - tj) / g.h);
                    }
                }
                let s = sign * tf.exp();
                acc = acc + m * (hf * tf.exp() / (C::new(s, 0.0) - lambda));
            }
        }
        Ok(Mat2::identity() + acc * C::new(0.0, -0.5 / PI))
    }

    pub fn symmetries(&self) -> SymmetryReport {
        let g = &self.grid;
        let nt = g.n_nodes();
        let j = Mat2::j();
        let al = self.alpha();
        let dinv = Mat2::diag(C::new(al, 0.0), C::new(-1.0 / al, 0.0));
        let id = Mat2::identity();
        let (mut conj, mut half, mut inv) = (0.0f64, 0.0f64, 0.0f64);
        let mut orth = Mat2::zero();
        for k in 0..nt {
            let (yp, ym) = (self.y_plus[k], self.y_minus[k]);
            let sc = yp.max_abs().max(1.0);
            conj = conj.max((yp.conj() - ym).max_abs() / sc);
            half = half.max((j * self.y_minus[g.negated(k)] * j - yp).max_abs() / sc);
            let yi = self.y_plus[g.inverted(k)];
            inv = inv.max((dinv * yi.ct().inv() * j - yp).max_abs() / sc);
            orth = orth + (yp - id) * (ym - id).ct() * g.weight(k);
        }
        let c: Mat2 = (0..nt).map(|k| self.mu[k] * g.weight(k)).sum::<Mat2>() * C::new(0.0, 0.5 / PI);
        let d0 = self.y_zero - id;
        let (inner, outer) = ((-g.s_max).exp(), g.s_max.exp());
        let truncation_bound = 2.0 * (c.max_abs().powi(2) / outer + d0.max_abs().powi(2) * inner);
        let y0 = self.y_zero;
        let y_zero_defect = y0
            .0
            .iter()
            .flatten()
            .map(|z| z.im.abs())
            .fold(y0.b().norm().max(y0.c().norm()), f64::max);
        SymmetryReport {
            conjugation: conj,
            half_turn: half,
            inversion: inv,
            orthogonality: orth.max_abs(),
            truncation_bound,
            y_zero_defect,
        }
    }

    pub fn diagnostics(&self, min_eig: f64, v: Option<f64>) -> Value {
        let y0: Vec<[f64; 2]> = self.y_zero.0.iter().flatten().map(|z| [z.re, z.im]).collect();
        json!({
            "r": self.r,
            "nNodes": self.grid.n_nodes(),
            "S": self.grid.s_max,
            "residual": self.residual,
            "yZero": y0,
            "minEigN": min_eig,
            "v": v,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityReport {
    pub min_eigenvalue: f64,
    pub at_lambda: f64,
}

/// min over the grid of the smaller eigenvalue of G + G*.
pub fn positivity_check(r: f64, grid: &ContourGrid) -> PositivityReport {
    let mut best = PositivityReport { min_eigenvalue: f64::INFINITY, at_lambda: f64::NAN };
    for lam in grid.nodes() {
        let g = jump_matrix(r, lam).expect("nonzero node");
        let e = (g + g.ct()).hermitian_min_eig();
        if e < best.min_eigenvalue {
            best = PositivityReport { min_eigenvalue: e, at_lambda: lam };
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct HFactors {
    pub plus: Vec<Mat2>,
    pub minus: Vec<Mat2>,
    pub alpha: f64,
    /// ε = sign(α).
    pub epsilon: i32,
    /// ρ = sign(α)/√|α|.
    pub rho: f64,
    /// ‖J·h∓(λ)·J − h±(−λ)‖ over nodes.
    pub half_turn_defect: f64,
    /// ‖h±(1/λ)*·J·h±(λ) − εJ‖ over nodes.
    pub pseudo_unitarity_defect: f64,
    /// ‖h±(λ) − diag(ρ, 1/ρ)‖ / max(|ρ|, 1/|ρ|) at the innermost nodes.
    pub limit_defect: f64,
}

/// diag(√|α|, 1/√|α|)·(Yᵗ)⁻¹.
fn h_of(y: &Mat2, alpha: f64) -> Mat2 {
    let s = alpha.abs().sqrt();
    Mat2::diag(C::new(s, 0.0), C::new(1.0 / s, 0.0)) * y.transpose().inv()
}

pub fn build_h(sol: &RhSolution) -> Result<HFactors> {
    let sym = sol.symmetries();
    if sym.y_zero_defect > 1e-6 {
        return Err(DpwError::InconsistentSign(format!(
            "Y(0) is not real diagonal (defect {:.2e})",
            sym.y_zero_defect
        )));
    }
    let alpha = sol.alpha();
    let epsilon = if alpha < 0.0 { -1 } else { 1 };
    let rho = epsilon as f64 / alpha.abs().sqrt();
    let plus: Vec<Mat2> = sol.y_plus.iter().map(|y| h_of(y, alpha)).collect();
    let minus: Vec<Mat2> = sol.y_minus.iter().map(|y| h_of(y, alpha)).collect();
    let g = &sol.grid;
    let j = Mat2::j();
    let ej = j * epsilon as f64;
    let (mut ht, mut pu) = (0.0f64, 0.0f64);
    for k in 0..g.n_nodes() {
        let nk = g.negated(k);
        ht = ht.max((j * minus[k] * j - plus[nk]).max_abs()).max((j * plus[k] * j - minus[nk]).max_abs());
        let ik = g.inverted(k);
        for h in [&plus, &minus] {
            let m = h[ik].ct() * j * h[k];
            // Sign read off the (0,0) entry must agree with ε everywhere.
            if m.a().re * epsilon as f64 <= 0.0 {
                return Err(DpwError::InconsistentSign(format!(
                    "pseudo-unitarity sign flips at lambda = {}",
                    g.node(k)
                )));
            }
            pu = pu.max((m - ej).max_abs() / h[k].max_abs().max(1.0).powi(2));
        }
    }
    let lim = Mat2::diag(C::new(rho, 0.0), C::new(1.0 / rho, 0.0));
    let limit_defect = [0, g.per_half()]
        .iter()
        .map(|&k| (plus[k] - lim).max_abs().max((minus[k] - lim).max_abs()))
        .fold(0.0, f64::max)
        / lim.max_abs();
    Ok(HFactors { plus, minus, alpha, epsilon, rho, half_turn_defect: ht, pseudo_unitarity_defect: pu, limit_defect })
}

/// max over nodes of ‖h₊k₀ − h₋k₁‖ / max(1, ‖h₊k₀‖).
pub fn gluing_residual(sol: &RhSolution, h: &HFactors, a: f64) -> Result<f64> {
    let g = &sol.grid;
    let mut worst = 0.0f64;
    for k in 0..g.n_nodes() {
        let (k0, k1) = contour_branches(sol.r, g.node(k), a)?;
        let (b0, b1) = (h.plus[k] * k0, h.minus[k] * k1);
        worst = worst.max((b0 - b1).max_abs() / b0.max_abs().max(1.0));
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Riemann–Hilbert route (a = γ).
    Rh,
    /// Birkhoff splitting of g on the unit circle.
    Circle,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Rh => "rh",
            Method::Circle => "circle",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = DpwError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rh" => Ok(Method::Rh),
            "circle" => Ok(Method::Circle),
            _ => Err(DpwError::Config(format!("unknown method '{s}' (expected rh or circle)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GlobalFactorization {
    pub r: f64,
    pub a: f64,
    pub method: Method,
    /// SU(1,1)-valued loop.
    pub f: CircleLoop,
    pub w_case: bool,
    /// Plus loop with B(0) = diag(e^{v/2}, e^{−v/2}).
    pub b: CircleLoop,
    pub v: f64,
    pub epsilon: i32,
    pub rho: f64,
    /// max_k ‖F·w·B − φ‖ / (‖F‖·‖B‖).
    pub reconstruction_defect: f64,
    /// max_k ‖F*JF − J‖ / max(1, ‖F‖²).
    pub unitarity_defect: f64,
    /// The same measure for φB⁻¹, i.e. with the identity middle term.
    pub identity_middle_defect: f64,
    /// ‖B(0) − diag(e^{v/2}, e^{−v/2})‖ from B's Laurent coefficient.
    pub b0_defect: f64,
    pub rh: Option<RhSolution>,
}

impl GlobalFactorization {
    /// e^{v/2}.
    pub fn ev2(&self) -> f64 {
        (0.5 * self.v).exp()
    }

    pub fn middle(&self) -> MiddleTerm {
        if self.w_case {
            MiddleTerm::W
        } else {
            MiddleTerm::Identity
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizeOptions {
    /// Circle samples of F and B.
    pub n: usize,
    pub density: f64,
    /// Forces the route; by default a = γ uses the RH route and any other a
    /// the circle route.
    pub method: Option<Method>,
    /// Pins the contour grid as (S, nodes per half) instead of choosing it
    /// from r, so that nearby radii share one discretization.
    pub grid: Option<(f64, usize)>,
}

impl Default for FactorizeOptions {
    fn default() -> Self {
        FactorizeOptions { n: loopcore::DEFAULT_N, density: DEFAULT_DENSITY, method: None, grid: None }
    }
}

fn unitarity(m: &Mat2) -> f64 {
    let j = Mat2::j();
    (m.ct() * j * *m - j).max_abs() / m.max_abs().max(1.0).powi(2)
}

/// φ on the circle, F·w·B reconstruction and the w/Id unitarity comparison.
#[allow(clippy::too_many_arguments)]
fn finish(
    r: f64,
    a: f64,
    method: Method,
    f: Vec<Mat2>,
    b: Vec<Mat2>,
    v: f64,
    epsilon: i32,
    rho: f64,
    rh: Option<RhSolution>,
) -> Result<GlobalFactorization> {
    let n = f.len();
    let phi = smythframe::phi_on_circle(r, n, a)?;
    let w = MiddleTerm::W;
    let mut rec = 0.0f64;
    let mut un = 0.0f64;
    let mut un_id = 0.0f64;
    for k in 0..n {
        let lam = circle_point(k, n);
        rec = rec.max((f[k] * w.at(lam) * b[k] - phi[k]).max_abs() / (f[k].max_abs() * b[k].max_abs()));
        un = un.max(unitarity(&f[k]));
        un_id = un_id.max(unitarity(&(phi[k] * b[k].inv())));
    }
    let b_loop = CircleLoop::from_samples_unchecked(b, loopcore::DEFAULT_TOL);
    let e = (0.5 * v).exp();
    let b0_defect = (b_loop.coeff(0) - Mat2::real(e, 0.0, 0.0, 1.0 / e)).max_abs() / e.max(1.0 / e);
    Ok(GlobalFactorization {
        r,
        a,
        method,
        f: CircleLoop::from_samples_unchecked(f, loopcore::DEFAULT_TOL),
        w_case: un < un_id,
        b: b_loop,
        v,
        epsilon,
        rho,
        reconstruction_defect: rec,
        unitarity_defect: un,
        identity_middle_defect: un_id,
        b0_defect,
        rh,
    })
}

/// Global factorization φ = F·w·B at z = r through the RH problem:
/// B = ε·h·k̃ with (h, k̃) = (h₊, k₀) on the closed upper half circle and
/// (h₋, k₁) on the open lower half, F = ε·H·A·F₀·h⁻¹·w⁻¹.
pub fn global_factorize_rh(r: f64, a: f64, opts: &FactorizeOptions) -> Result<GlobalFactorization> {
    let grid = match opts.grid {
        Some((s, n)) => ContourGrid::new(s, n)?,
        None => ContourGrid::for_radius_with_density(r, opts.density)?,
    };
    let sol = solve_rh(r, &grid)?;
    let h = build_h(&sol)?;
    let eps = h.epsilon as f64;
    let alpha = h.alpha;
    let n = opts.n;
    if n < 8 || !n.is_multiple_of(4) {
        return Err(DpwError::Config(format!("circle sample count must be a multiple of 4, got {n}")));
    }
    let at_one = grid.unit_node(false).ok_or_else(|| DpwError::Config("grid has no node at lambda = 1".into()))?;
    let at_minus_one = grid.unit_node(true).expect("odd grid");
    let mut f = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for k in 0..n {
        let lam = circle_point(k, n);
        let (y, lift, m) = if k == 0 {
            (sol.y_plus[at_one], Lift::new(1.0, 0.0), 0)
        } else if 2 * k == n {
            (sol.y_plus[at_minus_one], Lift::new(1.0, PI), 0)
        } else {
            let th = 2.0 * PI * k as f64 / n as f64;
            let y = sol.eval(lam)?;
            if 2 * k < n {
                (y, Lift::new(1.0, th), 0)
            } else {
                (y, Lift::new(1.0, th - 2.0 * PI), 1)
            }
        };
        let hm = h_of(&y, alpha);
        let kt = smythframe::ktilde(r, lift, m, a)?;
        let haf = smythframe::h_matrix(lift, a) * smythframe::a_matrix(lift, m, a) * smythframe::f0_matrix(r, lam);
        b.push(hm * kt * eps);
        f.push(haf * hm.inv() * MiddleTerm::W.at(lam).inv() * eps);
    }
    let v = -2.0 * (r * alpha.abs().sqrt()).ln();
    finish(r, a, Method::Rh, f, b, v, h.epsilon, h.rho, Some(sol))
}

/// Circle route: Birkhoff splitting of g = φ*Jφ, formed in double-double.
pub fn circle_factorize(r: f64, a: f64, n: usize) -> Result<IwasawaFactors> {
    if 0.5 * r * r > SERIES_CAP {
        return Err(DpwError::TruncationError(format!("circle route needs r^2/2 <= {SERIES_CAP}, got r = {r}")));
    }
    let phi = CircleLoop::from_samples_unchecked(smythframe::phi_on_circle(r, n, a)?, loopcore::DEFAULT_TOL);
    let g = CircleLoop::from_samples_unchecked(smythframe::g_on_circle(r, n, a)?, loopcore::DEFAULT_TOL);
    loopcore::iwasawa_factorize_with_g(&phi, &g)
}

/// Circle-route factorization repackaged; fails with NotFactorizable when
/// the splitting lands outside the w-cell.
pub fn global_factorize_circle(r: f64, a: f64, opts: &FactorizeOptions) -> Result<GlobalFactorization> {
    let it = circle_factorize(r, a, opts.n)?;
    if !it.w_case {
        return Err(DpwError::NotFactorizable(format!(
            "circle splitting at r = {r}, a = {a} lands in the identity cell (k = {:.6e})",
            it.k
        )));
    }
    let v = 2.0 * it.rho0.ln();
    let f = it.f.samples().to_vec();
    let b = it.b.samples().to_vec();
    finish(r, a, Method::Circle, f, b, v, -1, it.rho0, None)
}

pub fn global_factorize(r: f64, a: f64) -> Result<GlobalFactorization> {
    global_factorize_with(r, a, &FactorizeOptions::default())
}

pub fn global_factorize_with(r: f64, a: f64, opts: &FactorizeOptions) -> Result<GlobalFactorization> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(DpwError::DomainError(format!("r must be positive, got {r}")));
    }
    if !(a > 0.0) {
        return Err(DpwError::Config(format!("a must be positive, got {a}")));
    }
    let method = opts.method.unwrap_or(if a == EULER_GAMMA { Method::Rh } else { Method::Circle });
    let gf = match method {
        Method::Rh => global_factorize_rh(r, a, opts)?,
        Method::Circle => global_factorize_circle(r, a, opts)?,
    };
    if !(gf.reconstruction_defect <= 1e-6) || !(gf.unitarity_defect <= 1e-6) || !gf.v.is_finite() {
        return Err(DpwError::NotFactorizable(format!(
            "{} route at r = {r}, a = {a}: reconstruction defect {:.2e}, unitarity defect {:.2e}",
            method.label(),
            gf.reconstruction_defect,
            gf.unitarity_defect
        )));
    }
    Ok(gf)
}

/// e^{v/2} from the RH solution alone: 1/(r·√|α|).
pub fn ev2_from_solution(sol: &RhSolution) -> f64 {
    1.0 / (sol.r * sol.alpha().abs().sqrt())
}

/// v(r) and the imaginary part discarded when reading it off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VValue {
    pub v: f64,
    pub imag: f64,
}

/// The v that `global_factorize` extracts, without assembling F and B:
/// v = −2 log r − log|α| from a single RH solve at a = γ, or 2 log ρ₀ from
/// the circle splitting otherwise.
pub fn v_of_r(r: f64, a: f64) -> Result<VValue> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(DpwError::DomainError(format!("r must be positive, got {r}")));
    }
    if a == EULER_GAMMA {
        let sol = solve_rh_single(r, &ContourGrid::for_radius(r)?)?;
        let y0 = sol.y_zero.a();
        if !(y0.re.abs() > 0.0) {
            return Err(DpwError::SingularSystem(format!("Y(0) vanishes at r = {r}")));
        }
        Ok(VValue { v: -2.0 * r.ln() - y0.re.abs().ln(), imag: (y0.im / y0.re).abs() })
    } else {
        let it = circle_factorize(r, a, loopcore::DEFAULT_N)?;
        if !it.w_case {
            return Err(DpwError::NotFactorizable(format!(
                "circle splitting at r = {r}, a = {a} lands in the identity cell"
            )));
        }
        Ok(VValue { v: 2.0 * it.rho0.ln(), imag: 0.0 })
    }
}
