//! Global DPW construction for the Smyth potential in SU(1,1).
//!
//! The pipeline runs bottom-up: [`bessel`] supplies branch-aware special
//! functions, [`smythframe`] builds the holomorphic frame and its sector
//! splitting, [`rhfactor`] solves the real-axis Riemann–Hilbert problem that
//! makes the Iwasawa factorization global, [`loopcore`] provides the generic
//! circle-sampled Birkhoff/Iwasawa routines used as a cross-check, and
//! [`geometry`] turns the unitary frame into the sinh-Gordon profile and a
//! spacelike CMC surface in ℝ^{2,1}.

// `!(x > 0.0)` is used deliberately so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod cli;
pub mod dd;
pub mod error;
pub mod geometry;
mod linalg;
pub mod loopcore;
pub mod mat2;
pub mod rhfactor;
pub mod smythframe;

pub use error::{DpwError, Result};
pub use mat2::{Lift, Mat2};
