//! Spectral and least-squares kernels the solvers are built on.

pub mod lowrank;
pub mod qr;
pub mod solve;
pub mod subspace;
pub mod svd;

pub use lowrank::{hard_threshold, spectral_gap, truncate, Truncation};
pub use qr::{qr, QrFactors};
pub use solve::{cholesky, lstsq_min_norm, spd_solve};
pub use subspace::{
    canonical_angle_sines, project_onto_colspace, project_onto_complement, ColumnSpace,
};
pub use svd::{numerical_rank, singular_values, svd, SvdFactors};
