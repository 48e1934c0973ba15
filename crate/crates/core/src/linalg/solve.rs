//! Small dense solvers used by the alternating updates.

use crate::error::{Error, Result};
use crate::linalg::svd::svd;
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
///
/// Returns `None` when a pivot falls below `pivot_tol · max(diag)`, which is
/// how callers detect a numerically singular Gram matrix.
pub fn cholesky<T: Scalar>(a: &Matrix<T>, pivot_tol: T) -> Option<Matrix<T>> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "cholesky needs a square matrix");
    let dmax = (0..n).fold(T::zero(), |acc, i| acc.max(a[(i, i)]));
    if n > 0 && dmax <= T::zero() {
        return None;
    }
    let floor = pivot_tol * dmax;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for p in 0..j {
            d -= l[(j, p)] * l[(j, p)];
        }
        if !(d > floor) {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for p in 0..j {
                s -= l[(i, p)] * l[(j, p)];
            }
            l[(i, j)] = s / d;
        }
    }
    Some(l)
}

/// Solves `L Lᵀ x = b` in place for a single right-hand side.
pub fn cholesky_solve_vec<T: Scalar>(l: &Matrix<T>, b: &mut [T]) {
    let n = l.rows();
    for i in 0..n {
        let mut s = b[i];
        for p in 0..i {
            s -= l[(i, p)] * b[p];
        }
        b[i] = s / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for p in i + 1..n {
            s -= l[(p, i)] * b[p];
        }
        b[i] = s / l[(i, i)];
    }
}

/// Solves `L Lᵀ X = B` column by column.
pub fn cholesky_solve<T: Scalar>(l: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let (n, q) = b.shape();
    let mut x = Matrix::zeros(n, q);
    let mut col = vec![T::zero(); n];
    for j in 0..q {
        for i in 0..n {
            col[i] = b[(i, j)];
        }
        cholesky_solve_vec(l, &mut col);
        for i in 0..n {
            x[(i, j)] = col[i];
        }
    }
    x
}

/// Default relative pivot floor for Gram-matrix factorisations.
pub fn gram_pivot_tolerance<T: Scalar>() -> T {
    T::epsilon() * T::of(1000.0)
}

/// Solves the SPD system `a x = b`; errors when `a` is numerically singular.
pub fn spd_solve<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    let l = cholesky(a, gram_pivot_tolerance()).ok_or(Error::Singular("spd_solve"))?;
    Ok(cholesky_solve(&l, b))
}

/// Minimum-norm least-squares solution of `a x ≈ b` via the SVD pseudo-inverse.
///
/// Singular values at or below the rank tolerance are treated as zero.
pub fn lstsq_min_norm<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if a.rows() != b.rows() {
        return Err(Error::ShapeMismatch {
            op: "lstsq_min_norm",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let f = svd(a)?;
    let rank = f.numerical_rank();
    let (n, q) = (a.cols(), b.cols());
    let utb = f.u.t_matmul(b);
    let mut x = Matrix::zeros(n, q);
    for l in 0..rank {
        let inv = T::one() / f.sigma[l];
        for j in 0..q {
            let c = utb[(l, j)] * inv;
            if c == T::zero() {
                continue;
            }
            for i in 0..n {
                x[(i, j)] += f.v[(i, l)] * c;
            }
        }
    }
    Ok(x)
}
