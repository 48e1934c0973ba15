//! Weighted low-rank approximation with column-block weights.
//!
//! The data matrix is split as `A = (A₁ A₂)` with `k` columns in `A₁`. The
//! crate provides
//!
//! * the constrained closed form that keeps `A₁` exactly ([`ghs`]),
//! * an alternating solver for large finite weights on `A₁` ([`wlr`]),
//! * EM and ALS baselines ([`baselines`]),
//! * synthetic generators and benchmark drivers ([`synth`], [`bench`]),
//! * on-demand invariant checks ([`selftest`]).
//!
//! Everything is generic over `f32`/`f64` through [`Scalar`]; the default
//! type parameter is `f64`.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod bench;
pub mod error;
pub mod ghs;
pub mod linalg;
pub mod matrix;
pub mod scalar;
pub mod selftest;
pub mod synth;
pub mod wlr;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::Scalar;

pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
pub type WlrProblem64 = wlr::WlrProblem<f64>;
pub type WlrProblem32 = wlr::WlrProblem<f32>;
pub type WlrState64 = wlr::WlrState<f64>;
pub type WlrState32 = wlr::WlrState<f32>;
pub type GhsSolution64 = ghs::GhsSolution<f64>;
pub type GhsSolution32 = ghs::GhsSolution<f32>;
