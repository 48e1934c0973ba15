//! Best rank-r approximation by truncating the SVD.

use crate::error::{Error, Result};
use crate::linalg::svd::{svd, SvdFactors};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Relative gap below which two neighbouring singular values count as tied.
pub fn tie_tolerance<T: Scalar>() -> T {
    T::of(1e-10).max(T::epsilon() * T::of(64.0))
}

/// Result of keeping the `rank` leading singular triplets.
#[derive(Clone, Debug)]
pub struct Truncation<T = f64> {
    pub matrix: Matrix<T>,
    pub rank: usize,
    /// `σ_rank − σ_{rank+1}`, with `σ_0 = ∞` and trailing values taken as 0.
    pub gap: T,
    /// Set when `σ_rank = σ_{rank+1} > 0`: another equally good truncation exists.
    pub non_unique: bool,
}

/// Gap `σ_r − σ_{r+1}` using `σ_0 = +∞` and `σ_i = 0` past the end.
pub fn spectral_gap<T: Scalar>(sigma: &[T], r: usize) -> T {
    if r == 0 {
        return T::infinity();
    }
    let at = |i: usize| sigma.get(i - 1).copied().unwrap_or(T::zero());
    at(r) - at(r + 1)
}

/// Whether truncating `sigma` at `r` splits a tied pair of non-zero values.
pub fn truncation_is_ambiguous<T: Scalar>(sigma: &[T], r: usize) -> bool {
    if r == 0 || r >= sigma.len() {
        return false;
    }
    let s1 = sigma[0];
    let next = sigma[r];
    next > T::rank_tolerance() * s1 && spectral_gap(sigma, r) <= tie_tolerance::<T>() * s1
}

fn check_rank<T: Scalar>(a: &Matrix<T>, r: usize) -> Result<()> {
    let max = a.rows().min(a.cols());
    if r > max {
        return Err(Error::RankOutOfRange {
            rank: r,
            min: 0,
            max,
        });
    }
    Ok(())
}

/// Truncates precomputed factors.
pub fn truncate_factors<T: Scalar>(f: &SvdFactors<T>, r: usize) -> Truncation<T> {
    Truncation {
        matrix: f.reconstruct_rank(r),
        rank: r,
        gap: spectral_gap(&f.sigma, r),
        non_unique: truncation_is_ambiguous(&f.sigma, r),
    }
}

/// `H_r(a)` together with its uniqueness diagnostics.
pub fn truncate<T: Scalar>(a: &Matrix<T>, r: usize) -> Result<Truncation<T>> {
    check_rank(a, r)?;
    Ok(truncate_factors(&svd(a)?, r))
}

/// `H_r(a) = U Σ_r Vᵀ`, the best rank-`r` approximation in Frobenius norm.
///
/// On a tie `σ_r = σ_{r+1}` the first `r` triplets in SVD order are kept;
/// use [`truncate`] to see the `non_unique` flag.
pub fn hard_threshold<T: Scalar>(a: &Matrix<T>, r: usize) -> Result<Matrix<T>> {
    Ok(truncate(a, r)?.matrix)
}
