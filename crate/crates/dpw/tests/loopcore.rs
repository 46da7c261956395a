use dpw::bessel::EULER_GAMMA;
use dpw::loopcore::*;
use dpw::mat2::{Mat2, ONE};
use dpw::smythframe::{g_on_circle, phi_on_circle};
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn smyth_phi(r: f64, n: usize) -> CircleLoop {
    CircleLoop::from_samples(phi_on_circle(r, n, EULER_GAMMA).unwrap(), DEFAULT_TOL).unwrap()
}

fn smyth_g(r: f64, n: usize) -> CircleLoop {
    CircleLoop::from_samples_with_det(g_on_circle(r, n, EULER_GAMMA).unwrap(), DEFAULT_TOL, Some(-ONE)).unwrap()
}

#[test]
fn birkhoff_of_identity() {
    let g = sample_loop(|_| Mat2::identity(), 32).unwrap();
    let b = birkhoff_factorize(&g).unwrap();
    assert_eq!(b.middle, MiddleTerm::Identity);
    assert!((b.theta - 1.0).norm() < 1e-14);
    assert!((b.minus.coeff(0) - Mat2::identity()).max_abs() < 1e-14);
    assert!((b.plus.coeff(0) - Mat2::identity()).max_abs() < 1e-14);
}

#[test]
fn birkhoff_recovers_constructed_factors() {
    let g = sample_loop(|l| Mat2::new(ONE * 2.0, l.inv(), l, ONE), 32).unwrap();
    let b = birkhoff_factorize(&g).unwrap();
    assert_eq!(b.middle, MiddleTerm::Identity);
    for k in 0..32 {
        let l = circle_point(k, 32);
        let minus = Mat2::new(ONE, l.inv(), C::new(0.0, 0.0), ONE);
        let plus = Mat2::new(ONE, C::new(0.0, 0.0), l, ONE);
        assert!((b.minus.samples()[k] - minus).max_abs() < 1e-13);
        assert!((b.plus.samples()[k] - plus).max_abs() < 1e-13);
    }
}

#[test]
fn birkhoff_of_smyth_g_multiplies_back() {
    let g = smyth_g(1.0, DEFAULT_N);
    let b = birkhoff_factorize(&g).unwrap();
    assert_eq!(b.middle, MiddleTerm::J);
    assert!(b.residual < 1e-8, "{}", b.residual);
    assert!(b.minus.degree_leak(true) < 1e-10);
    assert!(b.plus.degree_leak(false) < 1e-10);
    assert!(b.theta.im.abs() < 1e-12);
}

#[test]
fn iwasawa_of_identity_and_constants() {
    let id = sample_loop(|_| Mat2::identity(), 16).unwrap();
    let f = iwasawa_factorize(&id).unwrap();
    assert!(!f.w_case);
    assert!((f.b.coeff(0) - Mat2::identity()).max_abs() < 1e-14);
    let u = Mat2::exp_sigma1(C::new(0.6, 0.0)) * Mat2::diag(C::from_polar(1.0, 0.2), C::from_polar(1.0, -0.2));
    // A non-diagonal constant is not twisted, so skip the loop checks.
    let c = CircleLoop::from_samples_unchecked(vec![u; 16], DEFAULT_TOL);
    let f = iwasawa_factorize(&c).unwrap();
    assert!(!f.w_case);
    for s in f.f.samples() {
        assert!((*s - u).max_abs() < 1e-13);
    }
    for s in f.b.samples() {
        assert!((*s - Mat2::identity()).max_abs() < 1e-13);
    }
}

#[test]
fn smyth_frame_is_in_the_w_cell() {
    let phi = smyth_phi(1.0, DEFAULT_N);
    let f = iwasawa_factorize(&phi).unwrap();
    assert!(f.w_case);
    assert!((f.rho0 - 0.9643838909344806).abs() < 1e-9, "{}", f.rho0);
    assert!(f.unitarity_defect < 1e-8);
    assert!(f.reconstruction_defect < 1e-10);
    let b0 = f.b.eval(C::new(1e-12, 0.0));
    assert!((b0 - Mat2::diag(C::new(f.rho0, 0.0), C::new(1.0 / f.rho0, 0.0))).max_abs() < 1e-8);
}

#[test]
fn extended_precision_g_at_larger_radius() {
    for &(r, rho) in &[(2.0, 0.4999766890066494), (4.0, 0.25)] {
        let phi = smyth_phi(r, DEFAULT_N);
        let f = iwasawa_factorize_with_g(&phi, &smyth_g(r, DEFAULT_N)).unwrap();
        assert!(f.w_case);
        assert!((f.rho0 - rho).abs() < 1e-7, "r = {r}: {}", f.rho0);
        assert!(f.unitarity_defect < 1e-8, "r = {r}: {}", f.unitarity_defect);
    }
}

#[test]
fn iwasawa_is_idempotent() {
    let phi = smyth_phi(0.5, 128);
    let f = iwasawa_factorize(&phi).unwrap();
    let again = CircleLoop::from_samples_unchecked(
        (0..128).map(|k| f.f.samples()[k] * f.middle().at(circle_point(k, 128)) * f.b.samples()[k]).collect(),
        DEFAULT_TOL,
    );
    let g = iwasawa_factorize(&again).unwrap();
    assert_eq!(g.w_case, f.w_case);
    assert!((g.rho0 - f.rho0).abs() < 1e-10);
    for (a, b) in f.f.samples().iter().zip(g.f.samples()) {
        assert!((*a - *b).max_abs() < 1e-8);
    }
}

#[test]
fn doubling_n_is_within_the_error_estimate() {
    let a = iwasawa_factorize(&smyth_phi(1.0, 128)).unwrap();
    let b = iwasawa_factorize(&smyth_phi(1.0, 256)).unwrap();
    assert!((a.rho0 - b.rho0).abs() <= a.rho_error.max(b.rho_error), "{} {}", (a.rho0 - b.rho0).abs(), a.rho_error);
}

#[test]
fn smyth_loop_serializes() {
    let l = smyth_phi(0.7, 64);
    let v = l.to_json();
    assert_eq!(v["n"], 64);
    let degs: Vec<i64> = v["coeffs"].as_array().unwrap().iter().map(|c| c[0].as_i64().unwrap()).collect();
    assert!(degs.windows(2).all(|w| w[0] < w[1]));
    let back = CircleLoop::from_json(&v).unwrap();
    assert!((back.eval(C::from_polar(1.0, 0.3)) - l.eval(C::from_polar(1.0, 0.3))).max_abs() < 1e-12);
}

#[test]
fn determinant_and_tail_checks() {
    let r = sample_loop(|_| Mat2::real(2.0, 0.0, 0.0, 1.0), 16);
    assert!(matches!(r, Err(dpw::DpwError::NonUnimodular(_))));
    // exp(c(λ+λ⁻¹)σ₁)-type loop with too few samples for its spectrum
    let r = sample_loop(|l| Mat2::exp_sigma1((l + l.inv()) * 6.0), 8);
    assert!(matches!(r, Err(dpw::DpwError::TailTooFat(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn birkhoff_multiply_back(c1 in -0.5f64..0.5, c2 in -0.5f64..0.5, c3 in -0.3f64..0.3) {
        // minus = [[1, c1/λ], [0, 1]], plus = [[1, 0], [c2·λ + c3·λ³, 1]]
        let g = sample_loop(|l| {
            let m = Mat2::new(ONE, l.inv() * c1, C::new(0.0, 0.0), ONE);
            let p = Mat2::new(ONE, C::new(0.0, 0.0), l * c2 + l.powi(3) * c3, ONE);
            m * p
        }, 64).unwrap();
        let b = birkhoff_factorize(&g).unwrap();
        prop_assert!(b.residual < 1e-12);
        prop_assert!(b.minus.degree_leak(true) < 1e-12);
        prop_assert!(b.plus.degree_leak(false) < 1e-12);
        for s in b.minus.samples().iter().chain(b.plus.samples()) {
            prop_assert!((s.det() - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn iwasawa_unitarity_on_random_su11_dressings(t in -1.0f64..1.0, th in -3.0f64..3.0, r in 0.2f64..1.5) {
        // A constant SU(1,1) factor on the left only changes F.
        let u = Mat2::exp_sigma1(C::new(t, 0.0)) * Mat2::diag(C::from_polar(1.0, th), C::from_polar(1.0, -th));
        let phi = smyth_phi(r, 128);
        let base = iwasawa_factorize(&phi).unwrap();
        let moved = iwasawa_factorize(&phi.map(|_, m| u * m)).unwrap();
        prop_assert!(moved.unitarity_defect < 1e-8);
        prop_assert!((moved.rho0 - base.rho0).abs() < 1e-8);
        prop_assert_eq!(moved.w_case, base.w_case);
    }
}
