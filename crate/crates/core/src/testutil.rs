//! Helpers shared by the unit tests.

use crate::matrix::Matrix;
use crate::synth::GaussianRng;

pub fn gaussian(m: usize, n: usize, seed: u64) -> Matrix {
    GaussianRng::new(seed).normal_matrix(m, n)
}

/// `‖a − b‖_F / ‖b‖_F` (absolute when `b` is zero).
pub fn rel_err(a: &Matrix, b: &Matrix) -> f64 {
    let d = (a - b).frobenius_norm();
    let nb = b.frobenius_norm();
    if nb == 0.0 {
        d
    } else {
        d / nb
    }
}

/// Largest entry of `|QᵀQ − I|`.
pub fn orthonormality_error(q: &Matrix) -> f64 {
    let g = q.t_matmul(q);
    let n = g.rows();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (g[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max)
}
