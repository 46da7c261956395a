//! Independent quadrature oracles shared by the integration suites.
#![allow(dead_code)]

use num_complex::Complex64 as C;
use std::f64::consts::PI;

/// K_α(x) = ∫₀^∞ e^{−x·cosh t}·cosh(αt) dt for Re x > 0, trapezoid rule
/// (the integrand decays doubly exponentially).
pub fn k_quad(alpha: f64, x: C) -> C {
    let h = 5e-3;
    let mut s = C::new(0.0, 0.0);
    let mut k = 0usize;
    loop {
        let t = k as f64 * h;
        let e = x.re * t.cosh() - alpha.abs() * t;
        if e > 800.0 {
            break;
        }
        let w = if k == 0 { 0.5 } else { 1.0 };
        s += (-x * t.cosh()).exp() * (alpha * t).cosh() * w;
        k += 1;
    }
    s * h
}

/// I_n(x) = (1/2π)∫₀^{2π} e^{x·cos θ} cos(nθ) dθ, periodic trapezoid.
pub fn i_quad(n: i32, x: C) -> C {
    let m = 512;
    let mut s = C::new(0.0, 0.0);
    for k in 0..m {
        let th = 2.0 * PI * k as f64 / m as f64;
        s += (x * th.cos()).exp() * (n as f64 * th).cos();
    }
    s / m as f64
}

/// J_n(x) = (1/2π)∫₀^{2π} cos(nθ − x·sin θ) dθ, periodic trapezoid.
pub fn j_quad(n: i32, x: C) -> C {
    let m = 512;
    let mut s = C::new(0.0, 0.0);
    for k in 0..m {
        let th = 2.0 * PI * k as f64 / m as f64;
        s += (C::new(n as f64 * th, 0.0) - x * th.sin()).cos();
    }
    s / m as f64
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a * (b / a).powf(k as f64 / (n - 1) as f64)).collect()
}
