//! The acceptance checks, shared by `dpw verify` and the acceptance suite.
//!
//! Each check measures a handful of quantities and compares them against
//! fixed bounds. Upper bounds and tolerance bands shrink with `tol_scale`;
//! lower bounds do not.

use crate::bessel::{self, BranchPoint, EULER_GAMMA, N_TERMS};
use crate::error::Result;
use crate::geometry::{self, SurfaceOptions};
use crate::mat2::{Lift, Mat2, I, ONE};
use crate::rhfactor::{self, Method};
use crate::smythframe;
use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

const G: f64 = EULER_GAMMA;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    /// |value − target| ≤ band.
    Within { target: f64, band: f64 },
}

impl Bound {
    fn scaled(self, s: f64) -> Bound {
        match self {
            Bound::AtMost(t) => Bound::AtMost(t * s),
            Bound::Within { target, band } => Bound::Within { target, band: band * s },
            b => b,
        }
    }

    fn holds(&self, v: f64) -> bool {
        match *self {
            Bound::AtMost(t) => v <= t,
            Bound::AtLeast(t) => v >= t,
            Bound::Within { target, band } => (v - target).abs() <= band,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Bound::AtMost(t) => format!("<= {t:.1e}"),
            Bound::AtLeast(t) => format!(">= {t}"),
            Bound::Within { target, band } => format!("{target} +/- {band}"),
        }
    }

    fn to_json(self) -> Value {
        match self {
            Bound::AtMost(t) => json!({ "atMost": t }),
            Bound::AtLeast(t) => json!({ "atLeast": t }),
            Bound::Within { target, band } => json!({ "target": target, "band": band }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub label: String,
    pub value: f64,
    pub bound: Bound,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub id: u32,
    pub name: &'static str,
    pub module: &'static str,
    pub measurements: Vec<Measurement>,
    /// Set when the computation itself failed.
    pub error: Option<String>,
    /// Reason this check is expected to fail.
    pub known_gap: Option<&'static str>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.measurements.iter().all(|m| m.passed)
    }

    pub fn status(&self) -> &'static str {
        match (self.passed(), self.known_gap.is_some()) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        }
    }

    /// One line: status, id, name, and the worst measurement.
    pub fn summary_line(&self) -> String {
        let mut s = format!("{:<12} {:>2}  {}", self.status(), self.id, self.name);
        if let Some(e) = &self.error {
            write!(s, ": error: {e}").unwrap();
        } else if let Some(m) = self.measurements.iter().find(|m| !m.passed).or(self.measurements.first()) {
            write!(s, ": {} = {:.3e} ({})", m.label, m.value, m.bound.describe()).unwrap();
        }
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "id": self.id,
            "name": self.name,
            "module": self.module,
            "status": self.status(),
            "passed": self.passed(),
            "error": self.error,
            "knownGap": self.known_gap,
            "measurements": self.measurements.iter().map(|m| json!({
                "label": m.label,
                "value": m.value,
                "bound": m.bound.to_json(),
                "passed": m.passed,
            })).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyOptions {
    /// Module names or check ids; empty selects everything.
    pub only: Vec<String>,
    pub tol_scale: f64,
}

impl VerifyOptions {
    pub fn all() -> Self {
        VerifyOptions { only: Vec::new(), tol_scale: 1.0 }
    }

    fn selects(&self, def: &CheckDef) -> bool {
        self.only.is_empty()
            || self.only.iter().any(|o| o == def.module || o == &def.id.to_string() || o == def.key)
    }
}

/// Collects measurements while a check runs.
struct Recorder {
    scale: f64,
    out: Vec<Measurement>,
}

impl Recorder {
    fn push(&mut self, label: impl Into<String>, value: f64, bound: Bound) {
        let bound = bound.scaled(self.scale);
        // NaN never passes.
        let passed = !value.is_nan() && bound.holds(value);
        self.out.push(Measurement { label: label.into(), value, bound, passed });
    }

    fn max(&mut self, label: impl Into<String>, values: impl IntoIterator<Item = f64>, bound: Bound) {
        let v = values.into_iter().fold(0.0f64, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) });
        self.push(label, v, bound);
    }
}

struct CheckDef {
    id: u32,
    key: &'static str,
    name: &'static str,
    module: &'static str,
    known_gap: Option<&'static str>,
    run: fn(&mut Recorder) -> Result<()>,
}

const CHECKS: &[CheckDef] = &[
    CheckDef { id: 1, key: "frame", name: "frame correctness", module: "smythframe", known_gap: None, run: check_frame },
    CheckDef { id: 2, key: "bessel-identity", name: "Bessel identity of the frame", module: "bessel", known_gap: None, run: check_bessel_identity },
    CheckDef { id: 3, key: "rates", name: "asymptotic remainder rates", module: "bessel", known_gap: None, run: check_rates },
    CheckDef { id: 4, key: "monodromy", name: "monodromy", module: "bessel", known_gap: None, run: check_monodromy },
    CheckDef { id: 5, key: "splitting", name: "sector splitting", module: "smythframe", known_gap: None, run: check_splitting },
    CheckDef { id: 6, key: "rh", name: "RH solvability and globality", module: "rhfactor", known_gap: None, run: check_rh },
    CheckDef { id: 7, key: "iwasawa", name: "global Iwasawa factorization", module: "rhfactor", known_gap: None, run: check_iwasawa },
    CheckDef {
        id: 8,
        key: "near-zero",
        name: "near-zero law",
        module: "rhfactor",
        known_gap: Some("leading-order asymptotic; r = 1e-3 is not small enough for a 2% band"),
        run: check_near_zero,
    },
    CheckDef { id: 9, key: "sinh-gordon", name: "sinh-Gordon residual", module: "geometry", known_gap: None, run: check_sinh_gordon },
    CheckDef { id: 10, key: "surface", name: "surface checks", module: "geometry", known_gap: None, run: check_surface },
    CheckDef { id: 11, key: "negative-control", name: "negative control at a = 2γ", module: "smythframe", known_gap: None, run: check_negative_control },
];

/// Known check selectors: ids, keys and module names.
pub fn selectors() -> Vec<String> {
    let mut v: Vec<String> = CHECKS.iter().flat_map(|c| [c.id.to_string(), c.key.to_string()]).collect();
    for c in CHECKS {
        if !v.iter().any(|s| s == c.module) {
            v.push(c.module.to_string());
        }
    }
    v
}

pub fn run_checks(opts: &VerifyOptions) -> Vec<CheckResult> {
    let scale = if opts.tol_scale > 0.0 { opts.tol_scale } else { 1.0 };
    CHECKS
        .iter()
        .filter(|c| opts.selects(c))
        .map(|c| {
            let mut rec = Recorder { scale, out: Vec::new() };
            let error = (c.run)(&mut rec).err().map(|e| format!("{}: {e}", e.module()));
            CheckResult { id: c.id, name: c.name, module: c.module, measurements: rec.out, error, known_gap: c.known_gap }
        })
        .collect()
}

pub fn report_json(results: &[CheckResult], opts: &VerifyOptions) -> Value {
    json!({
        "tolScale": opts.tol_scale,
        "only": opts.only,
        "passed": results.iter().all(CheckResult::passed),
        "checks": results.iter().map(CheckResult::to_json).collect::<Vec<_>>(),
    })
}

pub fn report_table(results: &[CheckResult]) -> String {
    let mut s = String::new();
    for r in results {
        writeln!(s, "{}", r.summary_line()).unwrap();
        for m in &r.measurements {
            let mark = if m.passed { "ok" } else { "FAIL" };
            writeln!(s, "      {mark:<4} {:<44} {:>12.4e}  {}", m.label, m.value, m.bound.describe()).unwrap();
        }
    }
    let failed = results.iter().filter(|r| !r.passed()).count();
    writeln!(s, "{} of {} checks passed", results.len() - failed, results.len()).unwrap();
    s
}

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm()
}

fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a * (b / a).powf(k as f64 / (n - 1) as f64)).collect()
}

fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// K_α(s) for real s > 0 by the trapezoid rule on ∫₀^∞ e^{−s·cosh t}cosh(αt) dt.
fn k_quad(alpha: f64, s: f64) -> f64 {
    let h = 5e-3;
    let mut sum = 0.0;
    let mut k = 0usize;
    loop {
        let t = k as f64 * h;
        if s * t.cosh() - alpha * t > 800.0 {
            break;
        }
        let w = if k == 0 { 0.5 } else { 1.0 };
        sum += w * (-s * t.cosh()).exp() * (alpha * t).cosh();
        k += 1;
    }
    sum * h
}

fn rk4_frame(lambda: C, a: f64, z_end: f64, steps: usize) -> Result<Mat2> {
    let mut phi = smythframe::dressed_phi(ONE, lambda, a)?.mat;
    let h = (z_end - 1.0) / steps as f64;
    let f = |z: f64, m: Mat2| -> Result<Mat2> { Ok(m * smythframe::potential_at(C::new(z, 0.0), lambda)?) };
    let mut z = 1.0;
    for _ in 0..steps {
        let k1 = f(z, phi)?;
        let k2 = f(z + 0.5 * h, phi + k1 * (0.5 * h))?;
        let k3 = f(z + 0.5 * h, phi + k2 * (0.5 * h))?;
        let k4 = f(z + h, phi + k3 * h)?;
        phi = phi + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        z += h;
    }
    Ok(phi)
}

fn check_frame(rec: &mut Recorder) -> Result<()> {
    let h = 1e-6;
    let mut mc = Vec::new();
    for lambda in [ONE, I] {
        for k in 0..=30 {
            let z = C::new(0.5 + 0.05 * k as f64, 0.0);
            let l = smythframe::canonical_l(z, lambda)?.mat;
            let dl = (smythframe::canonical_l(z + h, lambda)?.mat - smythframe::canonical_l(z - h, lambda)?.mat) * (0.5 / h);
            mc.push((l.inv() * dl - smythframe::potential_at(z, lambda)?).max_abs());
        }
    }
    rec.max("max |L^-1 dL - xi|, z in [0.5, 2]", mc, Bound::AtMost(1e-9));
    let mut ode = Vec::new();
    for lambda in [ONE, I] {
        for z_end in [0.2, 0.5, 1.4, 2.2, 3.0] {
            let num = rk4_frame(lambda, G, z_end, 4000)?;
            let closed = smythframe::dressed_phi(C::new(z_end, 0.0), lambda, G)?.mat;
            ode.push((num - closed).max_abs() / closed.max_abs());
        }
    }
    rec.max("closed form vs ODE, z in [0.2, 3]", ode, Bound::AtMost(1e-6));
    Ok(())
}

fn check_bessel_identity(rec: &mut Recorder) -> Result<()> {
    let (mut e0, mut e1) = (Vec::new(), Vec::new());
    for k in 0..48 {
        let z = C::from_polar(0.3 + 0.08 * k as f64, 0.6 * (k as f64 * 0.37).sin());
        let lambda = C::from_polar(0.6 + 0.02 * k as f64, 0.21 * k as f64 - 3.0);
        let x = smythframe::bessel_x(z, lambda);
        if x.norm() > 8.0 {
            continue;
        }
        let l = smythframe::canonical_l(z, lambda)?.mat;
        let y0 = l.a();
        let i0 = bessel::eval_i0(x).0;
        e0.push(rel(y0, i0));
        // L₂₁ = λ⁻¹log(z/2)·y₀ + y₁/4.
        let y1 = (l.c() - lambda.inv() * (z * 0.5).ln() * y0) * 4.0;
        let y0i = bessel::eval_y0i(BranchPoint::new(x, 0)?).y0i;
        let want = -2.0 / lambda * (i0 * (x * 0.5).ln() + C::new(G, FRAC_PI_2) * i0 - y0i * FRAC_PI_2);
        e1.push((y1 - want).norm() / want.norm().max(1e-300));
    }
    rec.max("y0 vs I0(x), |x| <= 8", e0, Bound::AtMost(1e-12));
    rec.max("y1 vs the Y0/I0 combination", e1, Bound::AtMost(1e-10));
    Ok(())
}

fn check_rates(rec: &mut Recorder) -> Result<()> {
    let xs = log_grid(10.0, 100.0, 25);
    for th in [-PI, -FRAC_PI_2, 0.0] {
        let (mut t1, mut t2) = (Vec::new(), Vec::new());
        for &m in &xs {
            let (_, r) = bessel::asymptotic_pair(BranchPoint::from_polar(m, th)?, N_TERMS)?;
            t1.push(r.t1.norm());
            t2.push(r.t2.norm());
        }
        rec.push(format!("slope |T1|, arg {th:.3}"), loglog_slope(&xs, &t1), Bound::Within { target: -2.0, band: 0.1 });
        rec.push(format!("slope |T2|, arg {th:.3}"), loglog_slope(&xs, &t2), Bound::Within { target: -1.0, band: 0.1 });
    }
    // H^{(1)}_α(is) = 2K_α(s)/(π·i^{α+1}) as the exact reference.
    let xs = log_grid(10.0, 100.0, 12);
    for alpha in [0.0, 1.0] {
        for n in [3usize, 4] {
            let mut errs = Vec::new();
            for &s in &xs {
                let h = bessel::eval_hankel_asymptotic(alpha, BranchPoint::new(C::new(0.0, s), 0)?, n)?;
                let exact = C::new(2.0 * k_quad(alpha, s) / PI, 0.0) / I.powf(alpha + 1.0);
                errs.push(rel(h.h1, exact));
            }
            rec.push(
                format!("Hankel remainder slope, order {alpha}, {n} terms"),
                loglog_slope(&xs, &errs),
                Bound::Within { target: -(n as f64), band: 0.2 },
            );
        }
    }
    Ok(())
}

fn check_monodromy(rec: &mut Recorder) -> Result<()> {
    let mut errs = Vec::new();
    for x in [0.5, 1.3] {
        let p = BranchPoint::new(C::new(x, 0.0), 0)?;
        let base = bessel::eval_y0i(p);
        for m in [-2i64, -1, 1, 2] {
            let direct = bessel::eval_y0i(p.shifted(m));
            // [[1, 0], [2im, 1]] acting on (I₀, Y₀(ix)).
            let y = base.y0i + I * (2.0 * m as f64) * base.i0;
            errs.push((direct.y0i - y).norm().max((direct.i0 - base.i0).norm()) / direct.y0i.norm().max(1.0));
            let cont = bessel::continue_pair(&base, m);
            errs.push((cont.y0i - direct.y0i).norm() / direct.y0i.norm().max(1.0));
        }
    }
    rec.max("continuation matrix, m in {+-1, +-2}", errs, Bound::AtMost(1e-10));
    Ok(())
}

fn check_splitting(rec: &mut Recorder) -> Result<()> {
    let mut errs = Vec::new();
    for m in [-1i64, 0, 1, 2] {
        for xm in [4.0, 10.0] {
            let z = C::from_polar(1.5, 0.3);
            let target = m as f64 * PI - FRAC_PI_2;
            let lift = Lift::new(z.norm_sqr() / (2.0 * xm), 2.0 * z.arg() - target);
            let split = smythframe::asymptotic_split(z, lift, m, G)?;
            let phi = smythframe::dressed_phi(z, lift.value(), G)?.mat;
            errs.push((split.reconstruct() - phi).norm_inf() / phi.norm_inf());
        }
    }
    rec.max("|H A phi0 K C - phi| / |phi|", errs, Bound::AtMost(1e-8));
    let z = C::new(2.0, 0.0);
    let xs = log_grid(10.0, 100.0, 20);
    let mut ds = Vec::new();
    for &xm in &xs {
        ds.push((smythframe::k_assembled(z, Lift::new(2.0 / xm, 0.0), 0)? - Mat2::identity()).norm_inf());
    }
    rec.push("slope of |K_m - Id|", loglog_slope(&xs, &ds), Bound::Within { target: -1.0, band: 0.1 });
    let mut hj = Vec::new();
    for k in 0..24 {
        let h = smythframe::h_matrix(Lift::new(1.0, -3.0 * PI + 0.5 * k as f64), G);
        hj.push((h.ct() * Mat2::j() * h - Mat2::j()).max_abs());
    }
    rec.max("H*JH - J on |lambda| = 1", hj, Bound::AtMost(1e-10));
    Ok(())
}

pub const RH_RADII: [f64; 8] = [1e-3, 0.01, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0];

fn check_rh(rec: &mut Recorder) -> Result<()> {
    let sols = RH_RADII
        .par_iter()
        .map(|&r| {
            let grid = rhfactor::ContourGrid::for_radius(r)?;
            let sol = rhfactor::solve_rh(r, &grid)?;
            let pos = rhfactor::positivity_check(r, &grid);
            Ok((r, sol, pos))
        })
        .collect::<Result<Vec<_>>>()?;
    for (r, sol, pos) in &sols {
        let s = sol.symmetries();
        rec.push(format!("r = {r}: jump residual"), sol.residual, Bound::AtMost(1e-8));
        rec.push(format!("r = {r}: min eig(G + G*)"), pos.min_eigenvalue, Bound::AtLeast(f64::MIN_POSITIVE));
        rec.push(format!("r = {r}: Y symmetries"), s.conjugation.max(s.half_turn).max(s.inversion), Bound::AtMost(1e-7));
        rec.push(format!("r = {r}: Y(0) real diagonal"), s.y_zero_defect, Bound::AtMost(1e-8));
    }
    Ok(())
}

fn check_iwasawa(rec: &mut Recorder) -> Result<()> {
    let gfs = RH_RADII
        .par_iter()
        .map(|&r| rhfactor::global_factorize(r, G))
        .collect::<Result<Vec<_>>>()?;
    rec.max("|F w B - phi| over tested r", gfs.iter().map(|g| g.reconstruction_defect), Bound::AtMost(1e-6));
    rec.max("|F*JF - J| over tested r", gfs.iter().map(|g| g.unitarity_defect), Bound::AtMost(1e-8));
    let w = gfs.iter().filter(|g| g.w_case).count();
    rec.push("fraction of radii in the w-case", w as f64 / gfs.len() as f64, Bound::AtLeast(1.0));
    let radii = [0.1, 0.3, 0.5, 1.0, 2.0, 3.0, 4.0];
    let diffs = radii
        .par_iter()
        .map(|&r| {
            let opts = rhfactor::FactorizeOptions { method: Some(Method::Rh), ..Default::default() };
            let a = rhfactor::global_factorize_with(r, G, &opts)?;
            let b = rhfactor::circle_factorize(r, G, 256)?;
            Ok((a.v - 2.0 * b.rho0.ln()).abs())
        })
        .collect::<Result<Vec<_>>>()?;
    rec.max("|v_rh - v_circle|, r in [0.1, 4]", diffs, Bound::AtMost(1e-6));
    Ok(())
}

fn check_near_zero(rec: &mut Recorder) -> Result<()> {
    let r: f64 = 1e-3;
    let gf = rhfactor::global_factorize(r, G)?;
    rec.push("e^{v/2} / sqrt(-gamma - 2 log r), r = 1e-3", gf.ev2() / (-G - 2.0 * r.ln()).sqrt(), Bound::Within { target: 1.0, band: 0.02 });
    let x = 0.5 * r * r;
    let u = 2.0 * r.ln() + gf.v;
    rec.push("u(x) / log x, x = 5e-7", u / x.ln(), Bound::Within { target: 1.0, band: 0.02 });
    Ok(())
}

fn check_sinh_gordon(rec: &mut Recorder) -> Result<()> {
    let coarse = geometry::sinh_profile(&geometry::log_spaced_r(1e-2, 10.0, 200), G)?;
    let fine = geometry::sinh_profile(&geometry::log_spaced_r(1e-2, 10.0, 399), G)?;
    let failures = coarse.failures().count() + fine.failures().count();
    rec.push("failed profile nodes", failures as f64, Bound::AtMost(0.0));
    rec.push("profile imaginary parts", coarse.max_imag().max(fine.max_imag()), Bound::AtMost(1e-9));
    let (rc, rf) = (coarse.max_residual().unwrap_or(f64::NAN), fine.max_residual().unwrap_or(f64::NAN));
    rec.push("max residual, 200 nodes on [1e-2, 10]", rc, Bound::AtMost(1e-4));
    // Halving the log step.
    rec.push("convergence order", (rc / rf).log2(), Bound::AtLeast(1.8));
    Ok(())
}

fn check_surface(rec: &mut Recorder) -> Result<()> {
    let mesh = geometry::surface_mesh(&SurfaceOptions::default())?;
    rec.push("vertices of the 40x40 mesh", mesh.vertices.len() as f64, Bound::AtLeast(1600.0));
    rec.push("conformality defect", mesh.stats.max_conformality, Bound::AtMost(1e-4));
    rec.push("| |H| - 1/2 |", mesh.stats.max_mean_curvature_error, Bound::AtMost(1e-3));
    rec.push("metric theta-variation", mesh.stats.max_metric_theta_variation, Bound::AtMost(1e-6));
    Ok(())
}

fn check_negative_control(rec: &mut Recorder) -> Result<()> {
    let a = 2.0 * G;
    let (mut rep_err, mut const_err) = (Vec::new(), Vec::new());
    for k in 0..8 {
        let lam = C::from_polar(1.0, -2.8 + 0.8 * k as f64);
        // Sector 0 is valid for arg λ in (−π/2, 3π/2); lift into it.
        let arg = if lam.arg() < -FRAC_PI_2 { lam.arg() + 2.0 * PI } else { lam.arg() };
        let rep = smythframe::g_representation(1.0, Lift::new(1.0, arg), 0, a)?;
        let g = smythframe::build_g(ONE, lam, a)?;
        let scale = g.max_abs().max(1.0);
        rep_err.push((rep.g - g).max_abs() / scale);
        // On |λ| = 1 the reflected k̃ is k̃ itself.
        let reduced = rep.ktilde.ct() * Mat2::real(-1.0, 0.0, 0.0, 1.0) * rep.ktilde;
        const_err.push((reduced - g).max_abs() / scale);
    }
    rec.max("representation vs g at a = 2 gamma", rep_err, Bound::AtMost(1e-6));
    let worst = const_err.iter().cloned().fold(0.0, f64::max);
    rec.push("constant-middle reduction defect, r = 1", worst, Bound::AtLeast(1e-2));
    Ok(())
}
