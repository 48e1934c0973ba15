//! The four exact block minimisations of one sweep.

use crate::error::{Error, Result};
use crate::linalg::lstsq_min_norm;
use crate::linalg::solve::{cholesky, cholesky_solve, cholesky_solve_vec, gram_pivot_tolerance};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

use super::{WlrProblem, WlrState};

/// New value of a factor block, flagged when its Gram matrix was too
/// ill-conditioned for the normal equations and the minimum-norm
/// least-squares solution was used instead.
#[derive(Clone, Debug)]
pub struct BlockUpdate<T = f64> {
    pub value: Matrix<T>,
    pub min_norm_fallback: bool,
}

/// `argmin_X ‖rhs − a X‖_F`.
fn left_lstsq<T: Scalar>(a: &Matrix<T>, rhs: &Matrix<T>) -> Result<BlockUpdate<T>> {
    if a.cols() == 0 || rhs.cols() == 0 {
        return Ok(BlockUpdate {
            value: Matrix::zeros(a.cols(), rhs.cols()),
            min_norm_fallback: false,
        });
    }
    let gram = a.t_matmul(a);
    match cholesky(&gram, gram_pivot_tolerance()) {
        Some(l) => Ok(BlockUpdate {
            value: cholesky_solve(&l, &a.t_matmul(rhs)),
            min_norm_fallback: false,
        }),
        None => Ok(BlockUpdate {
            value: lstsq_min_norm(a, rhs)?,
            min_norm_fallback: true,
        }),
    }
}

/// Row-wise weighted least squares for `X₁` at fixed `(C, B, D)`.
///
/// Row `i` solves `(diag(W₁²(i,:)) + CCᵀ) xᵢᵀ = eᵢᵀ` with
/// `E = A₁ ⊙ W₁ ⊙ W₁ + (A₂ − BD)Cᵀ`. Each system is symmetric positive
/// definite because every weight is positive.
pub fn update_x1<T: Scalar>(prob: &WlrProblem<T>, st: &WlrState<T>) -> Result<Matrix<T>> {
    st.check_shapes(prob)?;
    let (m, k) = (prob.m(), prob.k());
    if k == 0 {
        return Ok(Matrix::zeros(m, 0));
    }
    let r2 = prob.a2() - &(&st.b * &st.d);
    let mut e = r2.matmul_t(&st.c);
    for ((ev, &a), &w2) in e
        .as_mut_slice()
        .iter_mut()
        .zip(prob.a1().as_slice())
        .zip(prob.w1_sq().as_slice())
    {
        *ev += a * w2;
    }
    let cct = st.c.matmul_t(&st.c);
    let mut x1 = e;
    let mut sys = cct.clone();
    for i in 0..m {
        let w2 = prob.w1_sq().row(i);
        for j in 0..k {
            sys[(j, j)] = cct[(j, j)] + w2[j];
        }
        let l = cholesky(&sys, T::zero()).ok_or(Error::Singular("update_x1 row system"))?;
        cholesky_solve_vec(&l, x1.row_mut(i));
    }
    Ok(x1)
}

/// `C = argmin ‖A₂ − X₁C − BD‖` using the current (already updated) `X₁`.
pub fn update_c<T: Scalar>(prob: &WlrProblem<T>, st: &WlrState<T>) -> Result<BlockUpdate<T>> {
    st.check_shapes(prob)?;
    let rhs = prob.a2() - &(&st.b * &st.d);
    left_lstsq(&st.x1, &rhs)
}

/// `B = argmin ‖A₂ − X₁C − BD‖` at fixed `D`.
pub fn update_b<T: Scalar>(prob: &WlrProblem<T>, st: &WlrState<T>) -> Result<BlockUpdate<T>> {
    st.check_shapes(prob)?;
    let rhs = prob.a2() - &(&st.x1 * &st.c);
    let upd = left_lstsq(&st.d.transpose(), &rhs.transpose())?;
    Ok(BlockUpdate {
        value: upd.value.transpose(),
        min_norm_fallback: upd.min_norm_fallback,
    })
}

/// `D = argmin ‖A₂ − X₁C − BD‖` at fixed `B`.
pub fn update_d<T: Scalar>(prob: &WlrProblem<T>, st: &WlrState<T>) -> Result<BlockUpdate<T>> {
    st.check_shapes(prob)?;
    let rhs = prob.a2() - &(&st.x1 * &st.c);
    left_lstsq(&st.b, &rhs)
}

/// Which block updates fell back to the minimum-norm solution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SweepOutcome {
    pub c_fallback: bool,
    pub b_fallback: bool,
    pub d_fallback: bool,
}

/// One full sweep `X₁ → C → B → D`, incrementing `p`.
pub fn sweep<T: Scalar>(
    prob: &WlrProblem<T>,
    st: &WlrState<T>,
) -> Result<(WlrState<T>, SweepOutcome)> {
    let mut next = st.clone();
    next.x1 = update_x1(prob, &next)?;
    let c = update_c(prob, &next)?;
    next.c = c.value;
    let mut outcome = SweepOutcome {
        c_fallback: c.min_norm_fallback,
        ..Default::default()
    };
    if prob.r() > prob.k() {
        let b = update_b(prob, &next)?;
        next.b = b.value;
        outcome.b_fallback = b.min_norm_fallback;
        let d = update_d(prob, &next)?;
        next.d = d.value;
        outcome.d_fallback = d.min_norm_fallback;
    }
    next.p = st.p + 1;
    Ok((next, outcome))
}
