use dpw::bessel::EULER_GAMMA;
use dpw::geometry::*;
use dpw::loopcore::sample_loop;
use dpw::mat2::{Mat2, I};
use dpw::rhfactor::{global_factorize, global_factorize_with, FactorizeOptions};
use dpw::DpwError;
use num_complex::Complex64 as C;
use proptest::prelude::*;
use std::sync::OnceLock;

const G: f64 = EULER_GAMMA;

fn frame_at_one() -> &'static dpw::loopcore::CircleLoop {
    static F: OnceLock<dpw::loopcore::CircleLoop> = OnceLock::new();
    F.get_or_init(|| global_factorize(1.0, G).unwrap().f)
}

#[test]
fn constant_frame_gives_the_base_point() {
    let id = sample_loop(|_| Mat2::identity(), 32).unwrap();
    for h in [0.5, 2.0] {
        let p = sym_bobenko(&id, C::new(1.0, 0.0), h).unwrap();
        let want = Mat2::j() * (-I / (4.0 * h));
        assert!((p.f - want).max_abs() < 1e-15);
        assert!(p.imag < 1e-15 && p.lie_defect < 1e-15);
    }
}

#[test]
fn minkowski_identification_round_trips() {
    let x = [0.3, -1.2, 2.5];
    let (y, imag) = to_minkowski(&from_minkowski(x));
    assert!(imag < 1e-16);
    for k in 0..3 {
        assert!((x[k] - y[k]).abs() < 1e-15);
    }
    // e₀ is timelike.
    assert_eq!(minkowski(&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]), -1.0);
    // ⟨X, Y⟩ = 2tr(XY) on the identified matrices.
    let m = from_minkowski(x);
    assert!(((m * m).trace().re * 2.0 - minkowski(&x, &x)).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn points_are_real_and_in_the_lie_algebra(theta in -1.5f64..1.5, phase in -3.1f64..3.1) {
        let p = sym_bobenko_rotated(frame_at_one(), theta, C::from_polar(1.0, phase), 0.5, G).unwrap();
        let s = p.f.max_abs().max(1.0);
        prop_assert!(p.imag <= 1e-9 * s, "imag {:e}", p.imag);
        prop_assert!(p.lie_defect <= 1e-9 * s, "lie {:e}", p.lie_defect);
    }
}

#[test]
fn rotation_by_zero_is_the_plain_formula() {
    let f = frame_at_one();
    let a = sym_bobenko(f, C::new(1.0, 0.0), 0.5).unwrap();
    let b = sym_bobenko_rotated(f, 0.0, C::new(1.0, 0.0), 0.5, G).unwrap();
    assert!((a.f - b.f).max_abs() < 1e-15);
}

#[test]
fn point_scales_inversely_with_h() {
    let f = frame_at_one();
    let a = sym_bobenko_rotated(f, 0.6, C::new(1.0, 0.0), 0.5, G).unwrap();
    let b = sym_bobenko_rotated(f, 0.6, C::new(1.0, 0.0), 1.0, G).unwrap();
    assert!((a.f - b.f * 2.0).max_abs() <= 1e-14 * a.f.max_abs());
}

#[test]
fn local_geometry_is_conformal_with_constant_mean_curvature() {
    let opts = GeometryOptions::default();
    for r in [0.5, 1.2] {
        let s = RadialStencil::new(r, G, &opts).unwrap();
        for theta in [-1.0, 0.0, 0.7] {
            let lg = s.local(theta, opts.dtheta, C::new(1.0, 0.0), 0.5, G).unwrap();
            assert!(lg.conformality <= 1e-4, "r = {r}, theta = {theta}: {:e}", lg.conformality);
            assert!((lg.mean_curvature.abs() - 0.5).abs() <= 1e-3, "r = {r}: H = {}", lg.mean_curvature);
            assert!((lg.conformal_factor - 0.5 * lg.e).abs() <= 1e-4 * lg.conformal_factor);
        }
    }
}

#[test]
fn metric_is_rotation_invariant() {
    let opts = GeometryOptions::default();
    let r = 1.5;
    let s = RadialStencil::new(r, G, &opts).unwrap();
    let pts: Vec<_> = [-1.3, -0.5, 0.0, 0.4, 1.1]
        .iter()
        .map(|&t| s.local(t, opts.dtheta, C::new(1.0, 0.0), 0.5, G).unwrap())
        .collect();
    let e0 = pts[2].e;
    for p in &pts {
        assert!((p.e - e0).abs() <= 1e-6 * e0);
        assert!((p.g / (r * r) - e0).abs() <= 1e-6 * e0);
    }
}

#[test]
fn conformal_factor_is_independent_of_lambda0() {
    let opts = GeometryOptions::default();
    let s = RadialStencil::new(0.8, G, &opts).unwrap();
    let base = s.local(0.3, opts.dtheta, C::new(1.0, 0.0), 0.5, G).unwrap().conformal_factor;
    for phase in [0.5, 1.7, -2.4] {
        let cf = s.local(0.3, opts.dtheta, C::from_polar(1.0, phase), 0.5, G).unwrap().conformal_factor;
        assert!((cf - base).abs() <= 1e-6 * base, "phase {phase}: {cf} vs {base}");
    }
}

#[test]
fn central_weights_are_exact_on_polynomials() {
    for p in 1..=5 {
        let (d1, d2) = central_weights(p);
        for deg in 0..=2 * p {
            let xs = (0..=2 * p).map(|k| k as f64 - p as f64);
            let vals: Vec<f64> = xs.map(|x| x.powi(deg as i32)).collect();
            let s1: f64 = d1.iter().zip(&vals).map(|(w, v)| w * v).sum();
            let s2: f64 = d2.iter().zip(&vals).map(|(w, v)| w * v).sum();
            assert!((s1 - if deg == 1 { 1.0 } else { 0.0 }).abs() < 1e-9, "p = {p}, deg = {deg}");
            assert!((s2 - if deg == 2 { 2.0 } else { 0.0 }).abs() < 1e-9, "p = {p}, deg = {deg}");
        }
    }
}

#[test]
fn small_mesh_layout() {
    let opts = SurfaceOptions { r_range: (0.6, 1.0), theta_range: (-0.5, 0.5), nr: 4, ntheta: 5, ..Default::default() };
    let m = surface_mesh(&opts).unwrap();
    assert_eq!(m.vertices.len(), 20);
    assert_eq!(m.faces.len(), 12);
    assert!(m.faces.iter().flatten().all(|&v| v < 20));
    let obj = m.to_obj();
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 20);
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 12);
    let side = m.sidecar();
    for key in ["conformality", "meanCurvature", "metricThetaVariation", "lieAlgebra", "imaginary"] {
        assert!(side["defects"][key].as_f64().is_some(), "{key}");
    }
    assert!(m.stats.max_conformality <= 1e-4);
    assert!(m.stats.max_mean_curvature_error <= 1e-3);
    assert!(m.stats.max_imag <= 1e-8);
    // Vertices of one radius ring match single-point evaluation.
    let f = global_factorize_with(m.radii[1], G, &FactorizeOptions { n: opts.geometry.n, ..Default::default() })
        .unwrap()
        .f;
    let p = sym_bobenko_rotated(&f, m.thetas[2], C::new(1.0, 0.0), 0.5, G).unwrap();
    let v = m.vertices[5 + 2];
    for k in 0..3 {
        assert!((p.coords[k] - v[k]).abs() <= 1e-8 * (1.0 + v[k].abs()));
    }
}

#[test]
fn bad_inputs_are_rejected() {
    let f = frame_at_one();
    assert!(matches!(sym_bobenko(f, C::new(1.1, 0.0), 0.5), Err(DpwError::DomainError(_))));
    assert!(matches!(sym_bobenko(f, C::new(1.0, 0.0), 0.0), Err(DpwError::DomainError(_))));
    let wide = SurfaceOptions { theta_range: (-3.2, 0.0), ..Default::default() };
    assert!(matches!(surface_mesh(&wide), Err(DpwError::Config(_))));
    let backwards = SurfaceOptions { r_range: (1.0, 0.5), ..Default::default() };
    assert!(matches!(surface_mesh(&backwards), Err(DpwError::Config(_))));
    assert!(RadialStencil::new(0.02, G, &GeometryOptions::default()).is_err());
}

#[test]
fn degenerate_frames_are_rejected() {
    // Not in SU(1,1).
    let big = sample_loop(|_| Mat2::diag(C::new(2.0, 0.0), C::new(0.5, 0.0)), 32).unwrap();
    assert!(matches!(sym_bobenko(&big, C::new(1.0, 0.0), 0.5), Err(DpwError::DegenerateFrame(_))));
    // Too rough for the spectral derivative.
    let rough = dpw::loopcore::CircleLoop::from_samples_unchecked(
        (0..32)
            .map(|k| if k % 2 == 0 { Mat2::identity() } else { Mat2::j() })
            .collect(),
        1e-10,
    );
    assert!(matches!(sym_bobenko(&rough, C::new(1.0, 0.0), 0.5), Err(DpwError::DegenerateFrame(_))));
}

#[test]
fn profile_residual_converges() {
    // The five-point defect at x = 1 shrinks like the fourth power of the log step.
    let mut res = Vec::new();
    for s in [0.2f64, 0.1, 0.05] {
        let r: Vec<f64> = (-2..=2).map(|k| (2.0 * (k as f64 * s).exp()).sqrt()).collect();
        let p = sinh_profile(&r, G).unwrap();
        assert!(p.max_imag() <= 1e-9);
        assert_eq!(p.failures().count(), 0);
        let n = &p.nodes[2];
        res.push(n.residual.unwrap().abs());
        assert!(n.residual_r.unwrap().abs() < 1e-2);
        assert!(p.nodes[1].residual.is_none() && p.nodes[3].residual.is_none());
    }
    for w in res.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 3.5, "{res:?}");
    }
    assert!(res[2] < 1e-6, "{res:?}");
}

#[test]
fn profile_json_and_input_checks() {
    let p = sinh_profile(&log_spaced_r(0.5, 2.0, 5), G).unwrap();
    let lines: Vec<serde_json::Value> = p.to_json_lines().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 5);
    for (l, n) in lines.iter().zip(&p.nodes) {
        assert_eq!(l["u"].as_f64(), n.u);
        assert!((n.u.unwrap() - (2.0 * n.r.ln() + n.v.unwrap())).abs() < 1e-14);
    }
    let xs = log_spaced_r(1e-2, 10.0, 200);
    assert_eq!(xs.len(), 200);
    assert!((0.5 * xs[0] * xs[0] - 1e-2).abs() < 1e-15);
    assert!((0.5 * xs[199] * xs[199] - 10.0).abs() < 1e-12);
    assert!(matches!(sinh_profile(&[], G), Err(DpwError::Config(_))));
    assert!(matches!(sinh_profile(&[1.0, 0.5], G), Err(DpwError::Config(_))));
    assert!(matches!(sinh_profile(&[-1.0], G), Err(DpwError::Config(_))));
}

#[test]
#[ignore = "known gap: u/log x at x = 5e-7 is about 0.77, the law is only leading order there"]
fn near_zero_profile_law() {
    let p = sinh_profile(&[1e-3], G).unwrap();
    let ratio = p.near_zero_ratio().unwrap();
    assert!((ratio - 1.0).abs() <= 0.02, "{ratio}");
}
