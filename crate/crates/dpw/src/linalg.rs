//! Thin wrapper over faer's LU for the dense complex systems of the
//! Toeplitz and collocation solvers.

use crate::error::{DpwError, Result};
use faer::linalg::solvers::{PartialPivLu, Solve, SolveLstsq};
use faer::Mat;
use num_complex::Complex64 as C;

pub(crate) struct DenseLu {
    lu: PartialPivLu<C>,
    /// min |U_ii| / max |U_ii|, a cheap singularity indicator.
    pub pivot_ratio: f64,
}

impl DenseLu {
    pub fn new(a: &Mat<C>, what: &str) -> Result<Self> {
        if !a.col_iter().all(|c| c.iter().all(|z| z.re.is_finite() && z.im.is_finite())) {
            return Err(DpwError::SingularSystem(format!("{what}: non-finite matrix entries")));
        }
        let lu = a.as_ref().partial_piv_lu();
        let u = lu.U();
        let n = u.nrows().min(u.ncols());
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let d = u[(i, i)].norm();
            lo = lo.min(d);
            hi = hi.max(d);
        }
        let pivot_ratio = if hi > 0.0 { lo / hi } else { 0.0 };
        Ok(DenseLu { lu, pivot_ratio })
    }

    pub fn solve(&self, rhs: &Mat<C>) -> Mat<C> {
        self.lu.solve(rhs)
    }
}

/// Least-squares solution of an overdetermined system by Householder QR,
/// with min |R_ii| / max |R_ii| as a conditioning indicator.
pub(crate) fn lstsq(a: &Mat<C>, rhs: &Mat<C>) -> (Mat<C>, f64) {
    let qr = a.as_ref().qr();
    let r = qr.R();
    let n = r.nrows().min(r.ncols());
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..n {
        let d = r[(i, i)].norm();
        lo = lo.min(d);
        hi = hi.max(d);
    }
    let ratio = if hi > 0.0 { lo / hi } else { 0.0 };
    (qr.solve_lstsq(rhs), ratio)
}

/// Row-major square matrix into faer storage.
pub(crate) fn from_fn(n: usize, m: usize, f: impl Fn(usize, usize) -> C) -> Mat<C> {
    Mat::from_fn(n, m, f)
}
