//! C ABI over `dpw`.
//!
//! Every entry point returns a [`DpwStatus`]; on anything but `DPW_STATUS_OK`
//! the message is available from [`dpw_last_error`] on the same thread.
//! Results that own memory come back as opaque handles, each released by its
//! own `_free` function. Panics are caught at the boundary and reported as
//! `DPW_STATUS_PANIC`.

use dpw::bessel::{self, BranchPoint};
use dpw::geometry::{self, GeometryOptions, SinhGordonProfile, SurfaceMesh, SurfaceOptions};
use dpw::rhfactor::{self, FactorizeOptions, GlobalFactorization, Method};
use dpw::DpwError;
use num_complex::Complex64 as C;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpwStatus {
    Ok = 0,
    NullPointer = 1,
    Panic = 2,
    BufferTooSmall = 3,
    OutOfRange = 4,
    TwistViolation = 10,
    NonUnimodular = 11,
    TailTooFat = 12,
    NotFactorizable = 13,
    ComplexTheta = 14,
    SectorViolation = 15,
    DomainError = 16,
    TruncationError = 17,
    CutCrossing = 18,
    SingularSystem = 19,
    InconsistentSign = 20,
    DegenerateFrame = 21,
    Config = 22,
    Io = 23,
}

impl From<&DpwError> for DpwStatus {
    fn from(e: &DpwError) -> Self {
        match e {
            DpwError::TwistViolation(_) => DpwStatus::TwistViolation,
            DpwError::NonUnimodular(_) => DpwStatus::NonUnimodular,
            DpwError::TailTooFat(_) => DpwStatus::TailTooFat,
            DpwError::NotFactorizable(_) => DpwStatus::NotFactorizable,
            DpwError::ComplexTheta(_) => DpwStatus::ComplexTheta,
            DpwError::SectorViolation(_) => DpwStatus::SectorViolation,
            DpwError::DomainError(_) => DpwStatus::DomainError,
            DpwError::TruncationError(_) => DpwStatus::TruncationError,
            DpwError::CutCrossing(_) => DpwStatus::CutCrossing,
            DpwError::SingularSystem(_) => DpwStatus::SingularSystem,
            DpwError::InconsistentSign(_) => DpwStatus::InconsistentSign,
            DpwError::DegenerateFrame(_) => DpwStatus::DegenerateFrame,
            DpwError::Config(_) => DpwStatus::Config,
            DpwError::Io(_) => DpwStatus::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: DpwStatus, msg: impl Into<String>) -> DpwStatus {
    set_error(msg);
    status
}

/// Runs `f`, records its error for [`dpw_last_error`] and converts panics.
fn guard(f: impl FnOnce() -> Result<(), DpwStatus>) -> DpwStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DpwStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(DpwStatus::Panic, msg)
        }
    }
}

fn lift<T>(r: dpw::Result<T>) -> Result<T, DpwStatus> {
    r.map_err(|e| fail((&e).into(), format!("[{}] {e}", e.module())))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), DpwStatus> {
    if p.is_null() {
        Err(fail(DpwStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `dpw_*` call on this thread.
#[no_mangle]
pub extern "C" fn dpw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static, NUL-terminated crate version.
#[no_mangle]
pub extern "C" fn dpw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Euler's constant, the default dressing parameter.
#[no_mangle]
pub extern "C" fn dpw_euler_gamma() -> f64 {
    bessel::EULER_GAMMA
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DpwComplex {
    pub re: f64,
    pub im: f64,
}

impl From<C> for DpwComplex {
    fn from(z: C) -> Self {
        DpwComplex { re: z.re, im: z.im }
    }
}

impl From<DpwComplex> for C {
    fn from(z: DpwComplex) -> Self {
        C::new(z.re, z.im)
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DpwBesselPair {
    pub i0: DpwComplex,
    pub d_i0: DpwComplex,
    pub y0i: DpwComplex,
    pub d_y0i: DpwComplex,
}

/// I₀(x), Y₀(ix) and their x-derivatives at `x` on sheet `sheet` of the
/// logarithmic cover.
///
/// # Safety
/// `out` must point to writable memory for one `DpwBesselPair`.
#[no_mangle]
pub unsafe extern "C" fn dpw_bessel_y0i(x: DpwComplex, sheet: i64, out: *mut DpwBesselPair) -> DpwStatus {
    guard(|| {
        non_null(out, "out")?;
        let p = lift(BranchPoint::new(x.into(), sheet))?;
        let v = bessel::eval_y0i(p);
        let pair = DpwBesselPair { i0: v.i0.into(), d_i0: v.d_i0.into(), y0i: v.y0i.into(), d_y0i: v.d_y0i.into() };
        // SAFETY: checked non-null; the caller guarantees it is writable.
        unsafe { out.write(pair) };
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpwMethod {
    /// RH route for a = γ, circle route otherwise.
    Auto = 0,
    Rh = 1,
    Circle = 2,
}

/// Global factorization φ = F·w·B at one radius.
pub struct DpwFactorization {
    inner: GlobalFactorization,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DpwFactorizationInfo {
    pub r: f64,
    pub a: f64,
    /// Metric exponent: B(0) = diag(e^{v/2}, e^{−v/2}).
    pub v: f64,
    pub epsilon: i32,
    pub w_case: bool,
    /// True when the RH route produced the result.
    pub used_rh: bool,
    /// Circle samples of F and B.
    pub n: usize,
    pub reconstruction_defect: f64,
    pub unitarity_defect: f64,
}

/// Factorizes at z = r for parameter `a` with `n` circle samples (0 picks
/// the default).
///
/// # Safety
/// `out` must point to writable memory for one handle pointer. On success the
/// handle must be released with [`dpw_factorization_free`].
#[no_mangle]
pub unsafe extern "C" fn dpw_factorize(
    r: f64,
    a: f64,
    method: DpwMethod,
    n: usize,
    out: *mut *mut DpwFactorization,
) -> DpwStatus {
    guard(|| {
        non_null(out, "out")?;
        let mut opts = FactorizeOptions::default();
        if n != 0 {
            opts.n = n;
        }
        opts.method = match method {
            DpwMethod::Auto => None,
            DpwMethod::Rh => Some(Method::Rh),
            DpwMethod::Circle => Some(Method::Circle),
        };
        let inner = lift(rhfactor::global_factorize_with(r, a, &opts))?;
        let h = Box::into_raw(Box::new(DpwFactorization { inner }));
        // SAFETY: checked non-null; the caller guarantees it is writable.
        unsafe { out.write(h) };
        Ok(())
    })
}

/// # Safety
/// `h` must be a live handle from [`dpw_factorize`] and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dpw_factorization_info(h: *const DpwFactorization, out: *mut DpwFactorizationInfo) -> DpwStatus {
    guard(|| {
        non_null(h, "handle")?;
        non_null(out, "out")?;
        // SAFETY: the caller guarantees a live handle.
        let g = unsafe { &(*h).inner };
        let info = DpwFactorizationInfo {
            r: g.r,
            a: g.a,
            v: g.v,
            epsilon: g.epsilon,
            w_case: g.w_case,
            used_rh: g.method == Method::Rh,
            n: g.f.n(),
            reconstruction_defect: g.reconstruction_defect,
            unitarity_defect: g.unitarity_defect,
        };
        // SAFETY: checked non-null.
        unsafe { out.write(info) };
        Ok(())
    })
}

/// Evaluates F (`which` = 0) or B (`which` = 1) at λ from its Laurent
/// coefficients, writing the four entries row-major into `out`.
///
/// # Safety
/// `h` must be a live handle and `out` must have room for four `DpwComplex`.
#[no_mangle]
pub unsafe extern "C" fn dpw_factorization_eval(
    h: *const DpwFactorization,
    which: u32,
    lambda: DpwComplex,
    out: *mut DpwComplex,
) -> DpwStatus {
    guard(|| {
        non_null(h, "handle")?;
        non_null(out, "out")?;
        // SAFETY: the caller guarantees a live handle.
        let g = unsafe { &(*h).inner };
        let lam = C::from(lambda);
        if lam == C::new(0.0, 0.0) {
            return Err(fail(DpwStatus::DomainError, "lambda must be nonzero"));
        }
        let m = match which {
            0 => g.f.eval(lam),
            1 => g.b.eval(lam),
            _ => return Err(fail(DpwStatus::OutOfRange, format!("which must be 0 or 1, got {which}"))),
        };
        for (k, z) in [m.a(), m.b(), m.c(), m.d()].into_iter().enumerate() {
            // SAFETY: the caller guarantees four slots.
            unsafe { out.add(k).write(z.into()) };
        }
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from [`dpw_factorize`] not freed before.
#[no_mangle]
pub unsafe extern "C" fn dpw_factorization_free(h: *mut DpwFactorization) {
    if !h.is_null() {
        // SAFETY: the caller passes ownership of a Box-allocated handle.
        drop(unsafe { Box::from_raw(h) });
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DpwSurfaceParams {
    pub r_min: f64,
    pub r_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub nr: usize,
    pub ntheta: usize,
    /// Point of the associated family, on the unit circle.
    pub lambda0: DpwComplex,
    /// Mean curvature.
    pub h: f64,
    pub a: f64,
    /// Circle samples per frame.
    pub n: usize,
    pub dr: f64,
    pub dtheta: f64,
    /// Half-width of the difference stencil.
    pub stencil: usize,
}

impl From<SurfaceOptions> for DpwSurfaceParams {
    fn from(s: SurfaceOptions) -> Self {
        DpwSurfaceParams {
            r_min: s.r_range.0,
            r_max: s.r_range.1,
            theta_min: s.theta_range.0,
            theta_max: s.theta_range.1,
            nr: s.nr,
            ntheta: s.ntheta,
            lambda0: s.lambda0.into(),
            h: s.h,
            a: s.a,
            n: s.geometry.n,
            dr: s.geometry.dr,
            dtheta: s.geometry.dtheta,
            stencil: s.geometry.half_width,
        }
    }
}

impl From<&DpwSurfaceParams> for SurfaceOptions {
    fn from(p: &DpwSurfaceParams) -> Self {
        SurfaceOptions {
            r_range: (p.r_min, p.r_max),
            theta_range: (p.theta_min, p.theta_max),
            nr: p.nr,
            ntheta: p.ntheta,
            lambda0: p.lambda0.into(),
            h: p.h,
            a: p.a,
            geometry: GeometryOptions { n: p.n, dr: p.dr, dtheta: p.dtheta, half_width: p.stencil },
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DpwSurfaceStats {
    pub max_conformality: f64,
    pub max_mean_curvature_error: f64,
    pub max_metric_theta_variation: f64,
    pub max_lie_defect: f64,
    pub max_imag: f64,
}

pub struct DpwSurface {
    inner: SurfaceMesh,
}

/// Fills `out` with the default mesh parameters.
///
/// # Safety
/// `out` must point to writable memory for one `DpwSurfaceParams`.
#[no_mangle]
pub unsafe extern "C" fn dpw_surface_params_default(out: *mut DpwSurfaceParams) -> DpwStatus {
    guard(|| {
        non_null(out, "out")?;
        // SAFETY: checked non-null.
        unsafe { out.write(SurfaceOptions::default().into()) };
        Ok(())
    })
}

/// Builds the nr×ntheta mesh.
///
/// # Safety
/// `params` must be readable and `out` writable. On success the handle must
/// be released with [`dpw_surface_free`].
#[no_mangle]
pub unsafe extern "C" fn dpw_surface_new(params: *const DpwSurfaceParams, out: *mut *mut DpwSurface) -> DpwStatus {
    guard(|| {
        non_null(params, "params")?;
        non_null(out, "out")?;
        // SAFETY: checked non-null; the caller guarantees it is readable.
        let opts = SurfaceOptions::from(unsafe { &*params });
        if (opts.lambda0.norm() - 1.0).abs() > 1e-12 {
            return Err(fail(DpwStatus::Config, format!("lambda0 = {} is not on the unit circle", opts.lambda0)));
        }
        let inner = lift(geometry::surface_mesh(&opts))?;
        // SAFETY: checked non-null.
        unsafe { out.write(Box::into_raw(Box::new(DpwSurface { inner }))) };
        Ok(())
    })
}

/// # Safety
/// `h` must be a live handle from [`dpw_surface_new`].
#[no_mangle]
pub unsafe extern "C" fn dpw_surface_vertex_count(h: *const DpwSurface) -> usize {
    // SAFETY: the caller guarantees a live handle or null.
    unsafe { h.as_ref() }.map_or(0, |s| s.inner.vertices.len())
}

/// # Safety
/// `h` must be a live handle from [`dpw_surface_new`].
#[no_mangle]
pub unsafe extern "C" fn dpw_surface_face_count(h: *const DpwSurface) -> usize {
    // SAFETY: the caller guarantees a live handle or null.
    unsafe { h.as_ref() }.map_or(0, |s| s.inner.faces.len())
}

/// Copies the vertices as (x1, x2, x0) triples into `buf`, which holds `len`
/// doubles; `len` must be at least three times the vertex count.
///
/// # Safety
/// `h` must be a live handle and `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dpw_surface_vertices(h: *const DpwSurface, buf: *mut f64, len: usize) -> DpwStatus {
    guard(|| {
        non_null(h, "handle")?;
        non_null(buf, "buf")?;
        // SAFETY: the caller guarantees a live handle.
        let v = unsafe { &(*h).inner.vertices };
        if len < 3 * v.len() {
            return Err(fail(DpwStatus::BufferTooSmall, format!("need {} doubles, got {len}", 3 * v.len())));
        }
        let flat: Vec<f64> = v.iter().flatten().copied().collect();
        // SAFETY: room for flat.len() <= len values was checked above.
        unsafe { ptr::copy_nonoverlapping(flat.as_ptr(), buf, flat.len()) };
        Ok(())
    })
}

/// Copies the quads as 0-based vertex indices into `buf`, which holds `len`
/// entries; `len` must be at least four times the face count.
///
/// # Safety
/// `h` must be a live handle and `buf` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn dpw_surface_faces(h: *const DpwSurface, buf: *mut u32, len: usize) -> DpwStatus {
    guard(|| {
        non_null(h, "handle")?;
        non_null(buf, "buf")?;
        // SAFETY: the caller guarantees a live handle.
        let f = unsafe { &(*h).inner.faces };
        if len < 4 * f.len() {
            return Err(fail(DpwStatus::BufferTooSmall, format!("need {} indices, got {len}", 4 * f.len())));
        }
        let flat: Vec<u32> = f.iter().flatten().map(|&i| i as u32).collect();
        // SAFETY: room was checked above.
        unsafe { ptr::copy_nonoverlapping(flat.as_ptr(), buf, flat.len()) };
        Ok(())
    })
}

/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dpw_surface_stats(h: *const DpwSurface, out: *mut DpwSurfaceStats) -> DpwStatus {
    guard(|| {
        non_null(h, "handle")?;
        non_null(out, "out")?;
        // SAFETY: the caller guarantees a live handle.
        let s = unsafe { (*h).inner.stats };
        let stats = DpwSurfaceStats {
            max_conformality: s.max_conformality,
            max_mean_curvature_error: s.max_mean_curvature_error,
            max_metric_theta_variation: s.max_metric_theta_variation,
            max_lie_defect: s.max_lie_defect,
            max_imag: s.max_imag,
        };
        // SAFETY: checked non-null.
        unsafe { out.write(stats) };
        Ok(())
    })
}

/// Writes the mesh as Wavefront OBJ to the UTF-8 path `path`.
///
/// # Safety
/// `h` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn dpw_surface_write_obj(h: *const DpwSurface, path: *const c_char) -> DpwStatus {
    guard(|| {
        non_null(h, "handle")?;
        non_null(path, "path")?;
        // SAFETY: the caller guarantees a NUL-terminated string.
        let path = unsafe { CStr::from_ptr(path) }
            .to_str()
            .map_err(|_| fail(DpwStatus::Config, "path is not UTF-8"))?;
        // SAFETY: the caller guarantees a live handle.
        let obj = unsafe { (*h).inner.to_obj() };
        std::fs::write(path, obj).map_err(|e| fail(DpwStatus::Io, format!("{path}: {e}")))
    })
}

/// # Safety
/// `h` must be null or a handle from [`dpw_surface_new`] not freed before.
#[no_mangle]
pub unsafe extern "C" fn dpw_surface_free(h: *mut DpwSurface) {
    if !h.is_null() {
        // SAFETY: the caller passes ownership of a Box-allocated handle.
        drop(unsafe { Box::from_raw(h) });
    }
}

pub struct DpwProfile {
    inner: SinhGordonProfile,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DpwProfileNode {
    pub x: f64,
    pub r: f64,
    /// False when the factorization failed at this node; u and v are NaN.
    pub ok: bool,
    pub u: f64,
    pub v: f64,
    /// NaN at the stencil ends and next to failed nodes.
    pub residual: f64,
}

/// sinh-Gordon profile on `points` log-spaced radii in [r_min, r_max].
/// Node failures do not fail the call; inspect `ok` per node.
///
/// # Safety
/// `out` must be writable. On success the handle must be released with
/// [`dpw_profile_free`].
#[no_mangle]
pub unsafe extern "C" fn dpw_profile_new(
    r_min: f64,
    r_max: f64,
    points: usize,
    a: f64,
    out: *mut *mut DpwProfile,
) -> DpwStatus {
    guard(|| {
        non_null(out, "out")?;
        if points == 0 || !(r_min > 0.0 && r_max >= r_min && r_max.is_finite()) {
            return Err(fail(DpwStatus::Config, format!("bad profile grid: [{r_min}, {r_max}] with {points} points")));
        }
        let radii = geometry::log_spaced_r(0.5 * r_min * r_min, 0.5 * r_max * r_max, points);
        let inner = lift(geometry::sinh_profile(&radii, a))?;
        // SAFETY: checked non-null.
        unsafe { out.write(Box::into_raw(Box::new(DpwProfile { inner }))) };
        Ok(())
    })
}

/// # Safety
/// `h` must be a live handle from [`dpw_profile_new`].
#[no_mangle]
pub unsafe extern "C" fn dpw_profile_len(h: *const DpwProfile) -> usize {
    // SAFETY: the caller guarantees a live handle or null.
    unsafe { h.as_ref() }.map_or(0, |p| p.inner.nodes.len())
}

/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dpw_profile_node(h: *const DpwProfile, i: usize, out: *mut DpwProfileNode) -> DpwStatus {
    guard(|| {
        non_null(h, "handle")?;
        non_null(out, "out")?;
        // SAFETY: the caller guarantees a live handle.
        let nodes = unsafe { &(*h).inner.nodes };
        let n = nodes
            .get(i)
            .ok_or_else(|| fail(DpwStatus::OutOfRange, format!("node {i} of {}", nodes.len())))?;
        let node = DpwProfileNode {
            x: n.x,
            r: n.r,
            ok: n.error.is_none(),
            u: n.u.unwrap_or(f64::NAN),
            v: n.v.unwrap_or(f64::NAN),
            residual: n.residual.unwrap_or(f64::NAN),
        };
        // SAFETY: checked non-null.
        unsafe { out.write(node) };
        Ok(())
    })
}

/// # Safety
/// `h` must be null or a handle from [`dpw_profile_new`] not freed before.
#[no_mangle]
pub unsafe extern "C" fn dpw_profile_free(h: *mut DpwProfile) {
    if !h.is_null() {
        // SAFETY: the caller passes ownership of a Box-allocated handle.
        drop(unsafe { Box::from_raw(h) });
    }
}
