use dpw::bessel::{eval_y0i, BranchPoint, EULER_GAMMA};
use dpw_ffi::*;
use num_complex::Complex64 as C;
use std::ffi::{CStr, CString};
use std::ptr;

fn last_error() -> String {
    unsafe { CStr::from_ptr(dpw_last_error()) }.to_str().unwrap().to_owned()
}

#[test]
fn version_and_constants() {
    let v = unsafe { CStr::from_ptr(dpw_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    assert_eq!(dpw_euler_gamma(), EULER_GAMMA);
}

#[test]
fn bessel_matches_the_core_crate() {
    let mut out = DpwBesselPair::default();
    let s = unsafe { dpw_bessel_y0i(DpwComplex { re: 2.0, im: -1.0 }, -1, &mut out) };
    assert_eq!(s, DpwStatus::Ok);
    assert!(last_error().is_empty());
    let want = eval_y0i(BranchPoint::new(C::new(2.0, -1.0), -1).unwrap());
    assert_eq!(C::from(out.y0i), want.y0i);
    assert_eq!(C::from(out.d_i0), want.d_i0);
    assert_eq!(unsafe { dpw_bessel_y0i(DpwComplex::default(), 0, ptr::null_mut()) }, DpwStatus::NullPointer);
    assert!(last_error().contains("out"));
}

#[test]
fn factorization_handle_round_trip() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { dpw_factorize(0.8, EULER_GAMMA, DpwMethod::Auto, 0, &mut h) }, DpwStatus::Ok);
    let mut info = DpwFactorizationInfo::default();
    assert_eq!(unsafe { dpw_factorization_info(h, &mut info) }, DpwStatus::Ok);
    assert!(info.used_rh && info.w_case);
    assert_eq!(info.n, 256);
    assert!(info.reconstruction_defect < 1e-6);
    let core = dpw::rhfactor::global_factorize(0.8, EULER_GAMMA).unwrap();
    assert_eq!(info.v, core.v);
    let mut b = [DpwComplex::default(); 4];
    let lam = DpwComplex { re: -0.28, im: 0.96 };
    assert_eq!(unsafe { dpw_factorization_eval(h, 1, lam, b.as_mut_ptr()) }, DpwStatus::Ok);
    let want = core.b.eval(lam.into());
    assert_eq!([b[0], b[1], b[2], b[3]].map(C::from), [want.a(), want.b(), want.c(), want.d()]);
    // F is SU(1,1)-valued on the circle: |a|² − |c|² = 1 for F = [[a, b], [c, d]].
    let mut f = [DpwComplex::default(); 4];
    let lam = DpwComplex { re: 0.6, im: 0.8 };
    assert_eq!(unsafe { dpw_factorization_eval(h, 0, lam, f.as_mut_ptr()) }, DpwStatus::Ok);
    let (a, c) = (C::from(f[0]), C::from(f[2]));
    assert!((a.norm_sqr() - c.norm_sqr() - 1.0).abs() < 1e-8);
    assert_eq!(unsafe { dpw_factorization_eval(h, 2, lam, f.as_mut_ptr()) }, DpwStatus::OutOfRange);
    assert_eq!(unsafe { dpw_factorization_eval(h, 0, DpwComplex::default(), f.as_mut_ptr()) }, DpwStatus::DomainError);
    unsafe { dpw_factorization_free(h) };
    unsafe { dpw_factorization_free(ptr::null_mut()) };
}

#[test]
fn factorization_errors_map_to_codes() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { dpw_factorize(-1.0, EULER_GAMMA, DpwMethod::Auto, 0, &mut h) }, DpwStatus::DomainError);
    assert!(h.is_null());
    assert!(last_error().starts_with('['));
    let s = unsafe { dpw_factorize(1.5, 2.0 * EULER_GAMMA, DpwMethod::Circle, 0, &mut h) };
    assert_eq!(s, DpwStatus::NotFactorizable);
    assert_eq!(unsafe { dpw_factorize(1.0, EULER_GAMMA, DpwMethod::Rh, 0, ptr::null_mut()) }, DpwStatus::NullPointer);
}

#[test]
fn surface_handle_round_trip() {
    let mut p = unsafe {
        let mut p = std::mem::MaybeUninit::uninit();
        assert_eq!(dpw_surface_params_default(p.as_mut_ptr()), DpwStatus::Ok);
        p.assume_init()
    };
    assert_eq!((p.nr, p.ntheta), (40, 40));
    p.nr = 3;
    p.ntheta = 4;
    p.r_min = 0.8;
    p.r_max = 1.2;
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { dpw_surface_new(&p, &mut h) }, DpwStatus::Ok);
    let nv = unsafe { dpw_surface_vertex_count(h) };
    let nf = unsafe { dpw_surface_face_count(h) };
    assert_eq!((nv, nf), (12, 6));
    let mut v = vec![0.0; 3 * nv];
    assert_eq!(unsafe { dpw_surface_vertices(h, v.as_mut_ptr(), v.len() - 1) }, DpwStatus::BufferTooSmall);
    assert_eq!(unsafe { dpw_surface_vertices(h, v.as_mut_ptr(), v.len()) }, DpwStatus::Ok);
    let mut f = vec![0u32; 4 * nf];
    assert_eq!(unsafe { dpw_surface_faces(h, f.as_mut_ptr(), f.len()) }, DpwStatus::Ok);
    assert!(f.iter().all(|&i| (i as usize) < nv));
    let core = dpw::geometry::surface_mesh(&(&p).into()).unwrap();
    assert_eq!(v, core.vertices.iter().flatten().copied().collect::<Vec<_>>());
    let mut st = DpwSurfaceStats::default();
    assert_eq!(unsafe { dpw_surface_stats(h, &mut st) }, DpwStatus::Ok);
    assert!(st.max_conformality < 1e-4 && st.max_imag < 1e-8);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.obj");
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { dpw_surface_write_obj(h, cpath.as_ptr()) }, DpwStatus::Ok);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), core.to_obj());
    let bad = CString::new("/nonexistent/dir/s.obj").unwrap();
    assert_eq!(unsafe { dpw_surface_write_obj(h, bad.as_ptr()) }, DpwStatus::Io);
    unsafe { dpw_surface_free(h) };
}

#[test]
fn surface_rejects_lambda0_off_the_circle() {
    let mut p: DpwSurfaceParams = dpw::geometry::SurfaceOptions::default().into();
    p.lambda0 = DpwComplex { re: 0.5, im: 0.0 };
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { dpw_surface_new(&p, &mut h) }, DpwStatus::Config);
    assert!(last_error().contains("unit circle"));
    assert!(h.is_null());
}

#[test]
fn profile_handle_round_trip() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { dpw_profile_new(0.5, 1.5, 7, EULER_GAMMA, &mut h) }, DpwStatus::Ok);
    assert_eq!(unsafe { dpw_profile_len(h) }, 7);
    let mut n = DpwProfileNode::default();
    assert_eq!(unsafe { dpw_profile_node(h, 3, &mut n) }, DpwStatus::Ok);
    assert!(n.ok && n.residual.is_finite());
    assert!((n.u - (2.0 * n.r.ln() + n.v)).abs() < 1e-14);
    assert_eq!(unsafe { dpw_profile_node(h, 0, &mut n) }, DpwStatus::Ok);
    assert!(n.residual.is_nan());
    assert_eq!(unsafe { dpw_profile_node(h, 7, &mut n) }, DpwStatus::OutOfRange);
    unsafe { dpw_profile_free(h) };
    assert_eq!(unsafe { dpw_profile_new(0.5, 1.5, 0, EULER_GAMMA, &mut h) }, DpwStatus::Config);
}

#[test]
fn failed_profile_nodes_are_flagged() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { dpw_profile_new(0.5, 2.0, 6, 2.0 * EULER_GAMMA, &mut h) }, DpwStatus::Ok);
    let failed = (0..6)
        .filter(|&i| {
            let mut n = DpwProfileNode::default();
            unsafe { dpw_profile_node(h, i, &mut n) };
            !n.ok && n.u.is_nan()
        })
        .count();
    assert!(failed >= 1);
    unsafe { dpw_profile_free(h) };
}
