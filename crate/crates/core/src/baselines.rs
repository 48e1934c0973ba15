//! Reference competitors: EM-style imputation and plain alternating least
//! squares, plus the RMSE metric used to compare solvers.

use crate::error::{Error, Result};
use crate::linalg::hard_threshold;
use crate::linalg::lstsq_min_norm;
use crate::linalg::solve::{cholesky, cholesky_solve, gram_pivot_tolerance};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::synth::GaussianRng;
use crate::wlr::StopReason;

/// Settings for [`em_solve`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmConfig<T = f64> {
    pub max_iter: usize,
    pub tol: T,
    /// Start from zero instead of `A` when the smallest rescaled weight is at
    /// or below this value.
    pub weight_floor_eps: T,
}

impl<T: Scalar> Default for EmConfig<T> {
    fn default() -> Self {
        Self {
            max_iter: 5_000,
            tol: T::of(1e-10),
            weight_floor_eps: T::of(1e-3),
        }
    }
}

impl<T: Scalar> EmConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > T::zero()) {
            return Err(Error::invalid(format!(
                "tol > 0 required (tol = {})",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter >= 1 required"));
        }
        if !(self.weight_floor_eps >= T::zero()) {
            return Err(Error::invalid("weight_floor_eps >= 0 required"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct EmReport<T = f64> {
    pub x: Matrix<T>,
    /// `‖(A − X_t) ⊙ W_EM‖²` for every iterate `t ≥ 1`.
    pub objective_trace: Vec<T>,
    /// The same quantity at the starting point, which need not have rank `r`.
    pub initial_objective: T,
    pub iterations: usize,
    pub stop_reason: StopReason,
    /// `true` when the iteration started from the zero matrix.
    pub zero_start: bool,
}

/// `(W₁ 𝟙)` scaled so its largest entry is one.
///
/// When every weight in `W₁` is below one the all-ones block already holds
/// the maximum, so the divisor is `max(max W₁, 1)`; this keeps every
/// rescaled weight in `(0, 1]`, which the imputation step needs.
pub fn em_weights<T: Scalar>(w1: &Matrix<T>, n2: usize) -> Result<Matrix<T>> {
    if w1.as_slice().iter().any(|&w| !(w > T::zero())) {
        return Err(Error::invalid("all weights in w1 must be > 0"));
    }
    let top = w1.max_entry().unwrap_or(T::one()).max(T::one());
    let w = w1.hstack(&Matrix::ones(w1.rows(), n2))?;
    Ok(w.scale(T::one() / top))
}

/// Weighted low-rank approximation by repeated imputation,
/// `X ← H_r(W⊙W⊙A + (𝟙 − W⊙W)⊙X)` with `W = W_EM`.
///
/// `a` is the full matrix `(A₁ A₂)` and `w1` the weights on its first
/// `w1.cols()` columns.
pub fn em_solve<T: Scalar>(
    a: &Matrix<T>,
    w1: &Matrix<T>,
    r: usize,
    cfg: &EmConfig<T>,
) -> Result<EmReport<T>> {
    cfg.validate()?;
    let (m, n) = a.shape();
    if w1.rows() != m || w1.cols() > n {
        return Err(Error::ShapeMismatch {
            op: "em_solve (w1 vs a)",
            left: w1.shape(),
            right: a.shape(),
        });
    }
    if r > m.min(n) {
        return Err(Error::RankOutOfRange {
            rank: r,
            min: 0,
            max: m.min(n),
        });
    }
    let w = em_weights(w1, n - w1.cols())?;
    let w_sq = w.map(|x| x * x);
    let wa = a.hadamard(&w_sq)?;
    let weighted_obj = |x: &Matrix<T>| -> T {
        a.as_slice()
            .iter()
            .zip(x.as_slice())
            .zip(w_sq.as_slice())
            .map(|((&a, &x), &w2)| (a - x) * (a - x) * w2)
            .sum()
    };

    let zero_start = w.min_entry().is_none_or(|lo| lo <= cfg.weight_floor_eps);
    let mut x = if zero_start {
        Matrix::zeros(m, n)
    } else {
        a.clone()
    };
    let initial_objective = weighted_obj(&x);
    let mut trace = Vec::new();
    let mut stop_reason = StopReason::MaxIter;
    let mut iterations = 0;
    for t in 0..cfg.max_iter {
        let mut filled = wa.clone();
        for ((f, &xv), &w2) in filled
            .as_mut_slice()
            .iter_mut()
            .zip(x.as_slice())
            .zip(w_sq.as_slice())
        {
            *f += (T::one() - w2) * xv;
        }
        let next = hard_threshold(&filled, r)?;
        let change = (&next - &x).frobenius_norm();
        let scale = x.frobenius_norm();
        x = next;
        trace.push(weighted_obj(&x));
        iterations = t + 1;
        if change < cfg.tol {
            stop_reason = StopReason::AbsoluteChange;
            break;
        }
        if scale > T::zero() && change / scale < cfg.tol {
            stop_reason = StopReason::RelativeChange;
            break;
        }
    }
    Ok(EmReport {
        x,
        objective_trace: trace,
        initial_objective,
        iterations,
        stop_reason,
        zero_start,
    })
}

/// Settings for [`als_solve`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlsConfig<T = f64> {
    pub max_iter: usize,
    pub tol: T,
    /// Seed for the Gaussian starting `D`.
    pub seed: u64,
}

impl<T: Scalar> Default for AlsConfig<T> {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            tol: T::of(1e-10),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AlsReport<T = f64> {
    pub b: Matrix<T>,
    pub d: Matrix<T>,
    /// `‖A − B_t D_t‖²`, one entry per completed sweep.
    pub objective_trace: Vec<T>,
    pub iterations: usize,
    pub stop_reason: StopReason,
}

impl<T: Scalar> AlsReport<T> {
    /// The approximation `BD`.
    pub fn approximation(&self) -> Matrix<T> {
        &self.b * &self.d
    }
}

/// `argmin_X ‖rhs − a X‖`, normal equations with a min-norm fallback.
fn lstsq<T: Scalar>(a: &Matrix<T>, rhs: &Matrix<T>) -> Result<Matrix<T>> {
    let gram = a.t_matmul(a);
    match cholesky(&gram, gram_pivot_tolerance()) {
        Some(l) => Ok(cholesky_solve(&l, &a.t_matmul(rhs))),
        None => lstsq_min_norm(a, rhs),
    }
}

/// Unweighted rank-`r` factorisation `A ≈ BD` by alternating least squares.
pub fn als_solve<T: Scalar>(a: &Matrix<T>, r: usize, cfg: &AlsConfig<T>) -> Result<AlsReport<T>> {
    let (m, n) = a.shape();
    if r > m.min(n) {
        return Err(Error::RankOutOfRange {
            rank: r,
            min: 0,
            max: m.min(n),
        });
    }
    if !(cfg.tol > T::zero()) || cfg.max_iter == 0 {
        return Err(Error::invalid("tol > 0 and max_iter >= 1 required"));
    }
    if r == 0 {
        return Ok(AlsReport {
            b: Matrix::zeros(m, 0),
            d: Matrix::zeros(0, n),
            objective_trace: vec![a.frobenius_norm_sq()],
            iterations: 0,
            stop_reason: StopReason::AbsoluteChange,
        });
    }
    let mut d: Matrix<T> = GaussianRng::new(cfg.seed).normal_matrix(r, n);
    let mut b = Matrix::zeros(m, r);
    let mut prev = &b * &d;
    let mut trace = Vec::new();
    let mut stop_reason = StopReason::MaxIter;
    let mut iterations = 0;
    for t in 0..cfg.max_iter {
        b = lstsq(&d.transpose(), &a.transpose())?.transpose();
        d = lstsq(&b, a)?;
        let approx = &b * &d;
        trace.push((a - &approx).frobenius_norm_sq());
        let change = (&approx - &prev).frobenius_norm();
        let scale = prev.frobenius_norm();
        prev = approx;
        iterations = t + 1;
        if change < cfg.tol {
            stop_reason = StopReason::AbsoluteChange;
            break;
        }
        if scale > T::zero() && change / scale < cfg.tol {
            stop_reason = StopReason::RelativeChange;
            break;
        }
    }
    Ok(AlsReport {
        b,
        d,
        objective_trace: trace,
        iterations,
        stop_reason,
    })
}

/// `‖A − Â‖_F / √(mn)`.
pub fn rmse<T: Scalar>(a: &Matrix<T>, a_hat: &Matrix<T>) -> Result<T> {
    let diff = a.try_sub(a_hat)?;
    let count = a.rows() * a.cols();
    if count == 0 {
        return Ok(T::zero());
    }
    Ok(diff.frobenius_norm() / T::of_usize(count).sqrt())
}
