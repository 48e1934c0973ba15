//! Singular value decomposition by one-sided (Hestenes) Jacobi rotations.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Maximum number of full Jacobi sweeps before giving up.
pub const SVD_SWEEP_BUDGET: usize = 60;

/// Thin SVD `a = u · diag(sigma) · vᵀ` with `q = min(m, n)` singular triplets.
///
/// `sigma` is non-increasing; `u` (m×q) and `v` (n×q) have orthonormal
/// columns. Each left singular vector has its largest-magnitude entry
/// non-negative (first such row on ties), so the factors are reproducible.
#[derive(Clone, Debug, PartialEq)]
pub struct SvdFactors<T = f64> {
    pub u: Matrix<T>,
    pub sigma: Vec<T>,
    pub v: Matrix<T>,
}

impl<T: Scalar> SvdFactors<T> {
    /// `u · diag(sigma) · vᵀ`.
    pub fn reconstruct(&self) -> Matrix<T> {
        self.reconstruct_rank(self.sigma.len())
    }

    /// Product of the leading `r` triplets.
    pub fn reconstruct_rank(&self, r: usize) -> Matrix<T> {
        let r = r.min(self.sigma.len());
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut out = vec![T::zero(); m * n];
        for l in 0..r {
            let s = self.sigma[l];
            if s == T::zero() {
                continue;
            }
            for i in 0..m {
                let ui = self.u[(i, l)] * s;
                if ui == T::zero() {
                    continue;
                }
                let row = &mut out[i * n..(i + 1) * n];
                for (j, o) in row.iter_mut().enumerate() {
                    *o += ui * self.v[(j, l)];
                }
            }
        }
        Matrix::from_raw(m, n, out)
    }

    /// Number of singular values above `rank_tolerance · σ₁`.
    pub fn numerical_rank(&self) -> usize {
        numerical_rank(&self.sigma)
    }
}

/// Counts `σᵢ > tol · σ₁` with the scalar type's rank tolerance.
pub fn numerical_rank<T: Scalar>(sigma: &[T]) -> usize {
    let Some(&s1) = sigma.first() else { return 0 };
    if s1 == T::zero() {
        return 0;
    }
    let cut = T::rank_tolerance() * s1;
    sigma.iter().take_while(|&&s| s > cut).count()
}

/// Computes the thin SVD of `a`.
pub fn svd<T: Scalar>(a: &Matrix<T>) -> Result<SvdFactors<T>> {
    let (m, n) = a.shape();
    let mut f = if m >= n {
        jacobi_tall(a)?
    } else {
        let t = jacobi_tall(&a.transpose())?;
        SvdFactors {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        }
    };
    fix_signs(&mut f);
    Ok(f)
}

/// Singular values only.
pub fn singular_values<T: Scalar>(a: &Matrix<T>) -> Result<Vec<T>> {
    Ok(svd(a)?.sigma)
}

fn jacobi_tall<T: Scalar>(a: &Matrix<T>) -> Result<SvdFactors<T>> {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    // Column-major working copies so rotations touch contiguous memory.
    let mut cols: Vec<Vec<T>> = (0..n).map(|j| a.column(j)).collect();
    let mut vcols: Vec<Vec<T>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| if i == j { T::one() } else { T::zero() })
                .collect()
        })
        .collect();
    let tol = T::epsilon() * T::of_usize(m.max(1));

    let mut converged = n < 2;
    for _ in 0..SVD_SWEEP_BUDGET {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&cols[p], &cols[q]);
                    let mut alpha = T::zero();
                    let mut beta = T::zero();
                    let mut gamma = T::zero();
                    for (&x, &y) in cp.iter().zip(cq) {
                        alpha += x * x;
                        beta += y * y;
                        gamma += x * y;
                    }
                    (alpha, beta, gamma)
                };
                if gamma == T::zero() || gamma.abs() <= tol * alpha.sqrt() * beta.sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::of(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut vcols, p, q, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::SvdNoConvergence {
            sweeps: SVD_SWEEP_BUDGET,
        });
    }

    let norms: Vec<T> = cols
        .iter()
        .map(|c| c.iter().map(|&x| x * x).sum::<T>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        norms[j]
            .partial_cmp(&norms[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let smax = order.first().map_or(T::zero(), |&i| norms[i]);
    let zero_cut = smax * T::epsilon() * T::epsilon();
    let mut ucols: Vec<Option<Vec<T>>> = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    let mut v = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(s);
        if s > zero_cut && s > T::zero() {
            ucols.push(Some(cols[src].iter().map(|&x| x / s).collect()));
        } else {
            ucols.push(None);
        }
        for i in 0..n {
            v[(i, dst)] = vcols[src][i];
        }
    }
    let u = complete_orthonormal(m, ucols);
    Ok(SvdFactors { u, sigma, v })
}

fn rotate<T: Scalar>(cols: &mut [Vec<T>], p: usize, q: usize, c: T, s: T) {
    let (lo, hi) = cols.split_at_mut(q);
    for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

/// Fills the `None` columns with unit vectors orthogonal to everything else,
/// drawn deterministically from the standard basis.
fn complete_orthonormal<T: Scalar>(m: usize, cols: Vec<Option<Vec<T>>>) -> Matrix<T> {
    let q = cols.len();
    let mut done: Vec<Vec<T>> = Vec::with_capacity(q);
    let mut slots: Vec<Option<Vec<T>>> = cols;
    for c in slots.iter().flatten() {
        done.push(c.clone());
    }
    let mut next_basis = 0;
    for slot in slots.iter_mut() {
        if slot.is_some() {
            continue;
        }
        while next_basis < m {
            let mut e = vec![T::zero(); m];
            e[next_basis] = T::one();
            next_basis += 1;
            // Two passes of modified Gram-Schmidt.
            for _ in 0..2 {
                for d in &done {
                    let proj = crate::matrix::dot(&e, d);
                    for (x, &y) in e.iter_mut().zip(d) {
                        *x -= proj * y;
                    }
                }
            }
            let norm = e.iter().map(|&x| x * x).sum::<T>().sqrt();
            if norm > T::of(0.5) {
                let unit: Vec<T> = e.iter().map(|&x| x / norm).collect();
                done.push(unit.clone());
                *slot = Some(unit);
                break;
            }
        }
    }
    let mut u = Matrix::zeros(m, q);
    for (j, c) in slots.into_iter().enumerate() {
        let c = c.expect("orthonormal completion exhausted the standard basis");
        for i in 0..m {
            u[(i, j)] = c[i];
        }
    }
    u
}

fn fix_signs<T: Scalar>(f: &mut SvdFactors<T>) {
    let (m, q) = f.u.shape();
    for j in 0..q {
        let mut best = 0;
        let mut best_abs = T::zero();
        for i in 0..m {
            let a = f.u[(i, j)].abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if m > 0 && f.u[(best, j)] < T::zero() {
            for i in 0..m {
                f.u[(i, j)] = -f.u[(i, j)];
            }
            for i in 0..f.v.rows() {
                f.v[(i, j)] = -f.v[(i, j)];
            }
        }
    }
}
