mod common;

use common::{i_quad, j_quad, k_quad, log_grid, loglog_slope};
use dpw::bessel::*;
use dpw::DpwError;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

const I: C = C::new(0.0, 1.0);

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm()
}

fn bp(x: C, sheet: i64) -> BranchPoint {
    BranchPoint::new(x, sheet).unwrap()
}

#[test]
fn i0_against_quadrature() {
    for x in [C::new(0.5, 0.0), C::new(3.0, -2.0), C::new(-7.0, 5.0), C::new(11.0, 0.5), C::new(15.0, 0.0), C::new(0.0, 25.0)] {
        let (v, _) = eval_i0(x);
        assert!(rel(v, i_quad(0, x)) < 1e-12, "{x}");
    }
}

#[test]
fn y0i_against_k0() {
    // Y₀(ix) = i·I₀(x) − (2/π)K₀(x) on the sheet through the positive axis.
    for x in [0.5, 1.7, 6.0, 14.0] {
        let p = eval_y0i(bp(C::new(x, 0.0), 0));
        let want = I * i_quad(0, C::new(x, 0.0)) - k_quad(0.0, C::new(x, 0.0)) * (2.0 / PI);
        assert!(rel(p.y0i, want) < 1e-10, "x = {x}: {} vs {want}", p.y0i);
    }
}

fn overlap_defect(m: f64, th: f64) -> (f64, f64) {
    let p = BranchPoint::from_polar(m, th).unwrap();
    let (asy, _) = asymptotic_pair(p, N_TERMS).unwrap();
    let ser = eval_y0i_with(p, 1e3, N_TERMS);
    let (i0, _) = eval_i0_with(p.value(), 1e3, N_TERMS);
    (rel(asy.i0, ser.i0).max(rel(asy.i0, i0)), rel(asy.y0i, ser.y0i))
}

const OVERLAP_ARGS: [f64; 6] = [-PI, -0.75 * PI, -FRAC_PI_2, -0.3 * PI, -0.1, 0.0];

#[test]
fn series_and_asymptotics_agree_beyond_ten() {
    // The optimally truncated expansion is good to about e^{-2|x|}.
    for m in [10.0, 12.0, 15.0, 20.0] {
        for th in OVERLAP_ARGS {
            let (di, dy) = overlap_defect(m, th);
            assert!(di < 1e-8 && dy < 1e-8, "|x| = {m}, arg {th}: {di:e} {dy:e}");
        }
    }
    // At the switch radius both routes are within 1e-10.
    for th in OVERLAP_ARGS {
        let (di, dy) = overlap_defect(X_SWITCH, th);
        assert!(di < 1e-10 && dy < 1e-10, "arg {th}: {di:e} {dy:e}");
    }
    let x = C::new(15.0, 0.0);
    assert!(rel(eval_i0_with(x, 1e3, N_TERMS).0, eval_i0_with(x, 2.0, N_TERMS).0) < 1e-10);
}

#[test]
#[ignore = "known gap: at |x| = 8 the optimally truncated expansion is only good to about 1e-7"]
fn series_and_asymptotics_agree_on_the_full_overlap() {
    for m in [8.0, 9.0, 10.0, 15.0, 20.0] {
        for th in OVERLAP_ARGS {
            let (di, dy) = overlap_defect(m, th);
            assert!(di < 1e-8 && dy < 1e-8, "|x| = {m}, arg {th}: {di:e} {dy:e}");
        }
    }
}

#[test]
fn asymptotic_sector_is_enforced() {
    for th in [0.6 * PI, -1.6 * PI] {
        let p = BranchPoint::from_polar(15.0, th).unwrap();
        assert!(matches!(asymptotic_pair(p, N_TERMS), Err(DpwError::SectorViolation(_))));
    }
    assert!(matches!(asymptotic_pair(bp(C::new(1.0, 0.0), 0), N_TERMS), Err(DpwError::DomainError(_))));
    assert!(matches!(eval_hankel_asymptotic(0.0, BranchPoint::from_polar(15.0, -1.1 * PI).unwrap(), 8), Err(DpwError::SectorViolation(_))));
    assert!(BranchPoint::new(C::new(0.0, 0.0), 0).is_err());
}

#[test]
fn remainder_rates() {
    let xs = log_grid(10.0, 100.0, 25);
    for th in [-PI, -FRAC_PI_2, 0.0] {
        let (mut t1, mut t2) = (Vec::new(), Vec::new());
        for &m in &xs {
            let (_, r) = asymptotic_pair(BranchPoint::from_polar(m, th).unwrap(), N_TERMS).unwrap();
            t1.push(r.t1.norm());
            t2.push(r.t2.norm());
            assert!(r.t1.norm() <= r.c1 / (m * m) && r.t2.norm() <= r.c2 / m);
        }
        let (s1, s2) = (loglog_slope(&xs, &t1), loglog_slope(&xs, &t2));
        assert!((s1 + 2.0).abs() <= 0.1, "arg {th}: T1 slope {s1}");
        assert!((s2 + 1.0).abs() <= 0.1, "arg {th}: T2 slope {s2}");
    }
}

#[test]
fn hankel_remainder_slope_matches_term_count() {
    // K_α(s) = (π/2)i^{α+1}H^{(1)}_α(is) gives an exact reference on the
    // imaginary axis.
    let xs = log_grid(10.0, 100.0, 12);
    for alpha in [0.0, 1.0, 2.0] {
        for n in [2usize, 3, 4, 5] {
            let errs: Vec<f64> = xs
                .iter()
                .map(|&s| {
                    let h = eval_hankel_asymptotic(alpha, bp(C::new(0.0, s), 0), n).unwrap();
                    let exact = k_quad(alpha, C::new(s, 0.0)) * 2.0 / (PI * I.powf(alpha + 1.0));
                    rel(h.h1, exact)
                })
                .collect();
            let slope = loglog_slope(&xs, &errs);
            assert!((slope + n as f64).abs() <= 0.2, "alpha {alpha}, n {n}: slope {slope}");
        }
    }
}

#[test]
fn hankel_cross_identities() {
    // K₀(20) = (iπ/2)H₀^{(1)}(20i).
    let h = eval_hankel_asymptotic(0.0, bp(C::new(0.0, 20.0), 0), N_TERMS).unwrap();
    let k = k_quad(0.0, C::new(20.0, 0.0));
    assert!(rel(I * FRAC_PI_2 * h.h1, k) < 1e-8);
    // Order zero: J₀(ix̃) = I₀(x̃) and (H⁽¹⁾ − H⁽²⁾)/2i = Y₀(ix̃) reproduce the pair.
    for th in [0.0, -PI / 3.0, -0.8 * PI] {
        let p = BranchPoint::from_polar(15.0, th).unwrap();
        let (pair, _) = asymptotic_pair(p, N_TERMS).unwrap();
        let w = BranchPoint::from_polar(15.0, th + FRAC_PI_2).unwrap();
        let hw = eval_hankel_asymptotic(0.0, w, N_TERMS).unwrap();
        assert!(rel((hw.h1 + hw.h2) * 0.5, pair.i0) < 1e-10, "arg {th}");
        assert!(rel((hw.h1 - hw.h2) / (2.0 * I), pair.y0i) < 1e-10, "arg {th}");
    }
}

#[test]
fn appendix_family_against_quadrature() {
    for n in 0..5usize {
        for x in [C::new(0.5, 0.0), C::new(2.3, 0.0), C::new(7.0, 0.0), C::new(1.5, 1.0)] {
            let v = eval_appendix_series(n, x).unwrap();
            assert!(rel(v.i, i_quad(n as i32, x)) < 1e-12, "I_{n}({x})");
            assert!(rel(v.j, j_quad(n as i32, x)) < 1e-11, "J_{n}({x})");
            assert!(rel(v.k, k_quad(n as f64, x)) < 1e-10, "K_{n}({x})");
            // J_{n+1}Y_n − J_nY_{n+1} = 2/(πx).
            let w = eval_appendix_series(n + 1, x).unwrap();
            let wr = w.j * v.y - v.j * w.y;
            assert!(rel(wr, 2.0 / (PI * x)) < 1e-10, "Wronskian n = {n}, x = {x}");
            assert!(v.tail < 1e-15);
        }
    }
    assert!(matches!(eval_appendix_series(0, C::new(0.0, 0.0)), Err(DpwError::DomainError(_))));
}

#[test]
fn appendix_y0_is_the_cover_y0() {
    for x in [0.4, 1.3, 5.0] {
        let a = eval_appendix_series(0, C::new(0.0, x)).unwrap().y;
        let b = eval_y0i(bp(C::new(x, 0.0), 0)).y0i;
        assert!(rel(a, b) < 1e-13, "x = {x}");
    }
}

#[test]
fn monodromy() {
    for x in [0.5, 1.3] {
        let p = bp(C::new(x, 0.0), 0);
        let base = eval_y0i(p);
        for m in [-2i64, -1, 1, 2] {
            let direct = eval_y0i(p.shifted(m));
            let cont = continue_pair(&base, m);
            assert!((direct.y0i - cont.y0i).norm() <= 1e-10 * direct.y0i.norm().max(1.0), "x = {x}, m = {m}");
            assert!((direct.i0 - cont.i0).norm() <= 1e-10 * direct.i0.norm());
            assert!((direct.y0i - base.y0i - I * (2.0 * m as f64) * base.i0).norm() <= 1e-10 * direct.y0i.norm().max(1.0));
        }
        let once = continue_pair(&continue_pair(&base, 1), 1);
        let twice = continue_pair(&base, 2);
        assert!((once.y0i - twice.y0i).norm() < 1e-14 && (once.d_y0i - twice.d_y0i).norm() < 1e-14);
        assert_eq!(continue_pair(&base, 0), base);
    }
}

#[test]
fn monodromy_through_the_asymptotic_sheets() {
    let p = BranchPoint::from_polar(16.0, -0.5).unwrap();
    let base = eval_y0i(p);
    for m in [-2i64, -1, 1, 2] {
        let direct = eval_y0i(p.shifted(m));
        let cont = continue_pair(&base, m);
        assert!(rel(direct.y0i, cont.y0i) < 1e-10, "m = {m}");
    }
}

#[test]
fn small_argument_limit() {
    for x in [1e-4, 1e-7] {
        let y = eval_y0i(bp(C::new(x, 0.0), 0)).y0i - (2.0 / PI) * (0.5 * x).ln();
        let lim = (2.0 / PI) * C::new(EULER_GAMMA, FRAC_PI_2);
        assert!((y - lim).norm() < 10.0 * x * x * (1.0 - x.ln()));
    }
}

proptest! {
    #[test]
    fn i0_is_even(re in -25.0f64..25.0, im in -25.0f64..25.0) {
        let x = C::new(re, im);
        let (a, da) = eval_i0(x);
        let (b, db) = eval_i0(-x);
        prop_assert!(rel(b, a) <= 1e-13);
        prop_assert!((da + db).norm() <= 1e-13 * da.norm().max(a.norm()));
    }

    #[test]
    fn derivatives_match_differences(re in 0.2f64..18.0, im in -6.0f64..6.0, sheet in -2i64..=2) {
        let x = C::new(re, im);
        let h = 1e-5;
        let (_, d) = eval_i0(x);
        let fd = (eval_i0(x + h).0 - eval_i0(x - h).0) / (2.0 * h);
        prop_assert!(rel(fd, d) <= 1e-8, "I0' at {}", x);
        // Along the cover coordinate x̃ = x·(−1)^sheet.
        let p = bp(x, sheet);
        let sgn = if sheet.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let fd = (eval_y0i(bp(x + h, sheet)).y0i - eval_y0i(bp(x - h, sheet)).y0i) / (2.0 * h * sgn);
        let d = eval_y0i(p).d_y0i;
        prop_assert!(rel(fd, d) <= 1e-8, "Y0' at {} sheet {}", x, sheet);
    }

    #[test]
    fn scaled_wronskian_is_two_over_pi(m in 0.1f64..30.0, th in -4.0f64..1.4) {
        let p = BranchPoint::from_polar(m, th).unwrap();
        let w = eval_y0i(p).scaled_wronskian();
        let pair = eval_y0i(p);
        let scale = (pair.i0.norm() * pair.y0i.norm() * m).max(1.0);
        prop_assert!((w - 2.0 / PI).norm() <= 1e-11 * scale, "{}", w);
    }
}

#[test]
fn digamma_recurrence() {
    let t = DigammaTable::new(40);
    assert_eq!(t.euler_gamma, EULER_GAMMA);
    assert!((t.psi(1) + EULER_GAMMA).abs() < 1e-16);
    assert!((t.psi(3) - (1.5 - EULER_GAMMA)).abs() < 1e-15);
    for j in 1..40 {
        assert!((t.psi(j + 1) - t.psi(j) - 1.0 / j as f64).abs() < 1e-14);
    }
}
