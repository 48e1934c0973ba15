//! Alternating minimisation for column-block weighted low-rank approximation.
//!
//! With `W₂ = 𝟙`, any `X₂` with `rank(X₁ X₂) ≤ r` can be written
//! `X₂ = X₁C + BD`, so the weighted problem becomes
//!
//! ```text
//! F(X₁, C, B, D) = ‖(A₁ − X₁) ⊙ W₁‖²_F + ‖A₂ − X₁C − BD‖²_F
//! ```
//!
//! which is convex in each block separately. One sweep updates `X₁` (row by
//! row), then `C`, `B` and `D`, each by an exact block minimisation, so the
//! objective never increases and the decrease splits into four
//! non-negative terms (see [`descent_decomposition`]).

mod diagnostics;
mod solver;
mod updates;

pub use diagnostics::{descent_decomposition, report_csv, DescentDecomposition};
pub use solver::{
    solve, solve_observed, FallbackEvent, IterationDiagnostics, SolveOptions, StopReason,
    StoppingCriteria, WlrReport,
};
pub use updates::{sweep, update_b, update_c, update_d, update_x1, BlockUpdate, SweepOutcome};

use crate::error::{Error, Result};
use crate::linalg::{lstsq_min_norm, svd};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::synth::GaussianRng;

/// Problem data `(A₁, A₂, W₁, r)`; `k` is the column count of `A₁`.
///
/// Weights above roughly `1e6` are outside the supported range in double
/// precision (`W₁²` then swamps the unweighted block).
#[derive(Clone, Debug)]
pub struct WlrProblem<T = f64> {
    a1: Matrix<T>,
    a2: Matrix<T>,
    w1: Matrix<T>,
    w1_sq: Matrix<T>,
    r: usize,
}

impl<T: Scalar> WlrProblem<T> {
    pub fn new(a1: Matrix<T>, a2: Matrix<T>, w1: Matrix<T>, r: usize) -> Result<Self> {
        let (m, k) = a1.shape();
        if a2.rows() != m {
            return Err(Error::ShapeMismatch {
                op: "WlrProblem (a1 vs a2 rows)",
                left: a1.shape(),
                right: a2.shape(),
            });
        }
        if w1.shape() != a1.shape() {
            return Err(Error::ShapeMismatch {
                op: "WlrProblem (w1 vs a1)",
                left: w1.shape(),
                right: a1.shape(),
            });
        }
        if w1.as_slice().iter().any(|&w| !(w > T::zero())) {
            return Err(Error::invalid("all weights in w1 must be > 0"));
        }
        let n = k + a2.cols();
        if r < k {
            return Err(Error::invalid(format!(
                "r >= k required (r = {r}, k = {k})"
            )));
        }
        if r > m.min(n) {
            return Err(Error::RankOutOfRange {
                rank: r,
                min: k,
                max: m.min(n),
            });
        }
        if k > 0 {
            let f = svd(&a1)?;
            if f.numerical_rank() < k {
                return Err(Error::RankDeficient {
                    what: "a1",
                    sigma_min: f.sigma[k - 1].to_f64_lossy(),
                    sigma_max: f.sigma[0].to_f64_lossy(),
                });
            }
        }
        let w1_sq = w1.map(|w| w * w);
        Ok(Self {
            a1,
            a2,
            w1,
            w1_sq,
            r,
        })
    }

    /// Problem with every entry of `W₁` equal to `lambda`.
    pub fn uniform(a1: Matrix<T>, a2: Matrix<T>, lambda: T, r: usize) -> Result<Self> {
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(Error::invalid(format!(
                "lambda > 0 required (lambda = {lambda})"
            )));
        }
        let w1 = Matrix::filled(a1.rows(), a1.cols(), lambda);
        Self::new(a1, a2, w1, r)
    }

    pub fn a1(&self) -> &Matrix<T> {
        &self.a1
    }

    pub fn a2(&self) -> &Matrix<T> {
        &self.a2
    }

    pub fn w1(&self) -> &Matrix<T> {
        &self.w1
    }

    pub(crate) fn w1_sq(&self) -> &Matrix<T> {
        &self.w1_sq
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn k(&self) -> usize {
        self.a1.cols()
    }

    pub fn m(&self) -> usize {
        self.a1.rows()
    }

    /// Total column count `n`.
    pub fn n(&self) -> usize {
        self.a1.cols() + self.a2.cols()
    }

    /// `(A₁ A₂)`.
    pub fn data(&self) -> Matrix<T> {
        self.a1
            .hstack(&self.a2)
            .expect("rows checked at construction")
    }

    /// `(min, max)` of `W₁`; `None` when `k = 0`.
    pub fn weight_range(&self) -> Option<(T, T)> {
        Some((self.w1.min_entry()?, self.w1.max_entry()?))
    }

    /// The common weight when `W₁` is constant.
    pub fn uniform_weight(&self) -> Option<T> {
        let (lo, hi) = self.weight_range()?;
        (lo == hi).then_some(lo)
    }
}

/// Iterate `(X₁, C, B, D)` and its sweep counter `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct WlrState<T = f64> {
    pub x1: Matrix<T>,
    pub c: Matrix<T>,
    pub b: Matrix<T>,
    pub d: Matrix<T>,
    pub p: usize,
}

/// Redraws allowed when a random start is numerically rank deficient.
pub const INIT_RETRIES: u64 = 5;

impl<T: Scalar> WlrState<T> {
    /// Builds a state after checking block shapes against `prob`.
    pub fn new(
        prob: &WlrProblem<T>,
        x1: Matrix<T>,
        c: Matrix<T>,
        b: Matrix<T>,
        d: Matrix<T>,
    ) -> Result<Self> {
        let st = Self { x1, c, b, d, p: 0 };
        st.check_shapes(prob)?;
        Ok(st)
    }

    /// All blocks zero.
    pub fn zeros(prob: &WlrProblem<T>) -> Self {
        let (m, k, r, nk) = (prob.m(), prob.k(), prob.r(), prob.a2.cols());
        Self {
            x1: Matrix::zeros(m, k),
            c: Matrix::zeros(k, nk),
            b: Matrix::zeros(m, r - k),
            d: Matrix::zeros(r - k, nk),
            p: 0,
        }
    }

    /// `X₁`, `D` standard normal and `B`, `C` zero.
    ///
    /// A draw whose `X₁` or `D` is numerically rank deficient is redrawn with
    /// the seed incremented, at most [`INIT_RETRIES`] times.
    pub fn random_init(prob: &WlrProblem<T>, seed: u64) -> Result<Self> {
        let (m, k, r, nk) = (prob.m(), prob.k(), prob.r(), prob.a2.cols());
        let mut last_err = None;
        for attempt in 0..=INIT_RETRIES {
            let mut rng = GaussianRng::new(seed.wrapping_add(attempt));
            let x1: Matrix<T> = rng.normal_matrix(m, k);
            let d: Matrix<T> = rng.normal_matrix(r - k, nk);
            let x1_ok = k == 0 || svd(&x1)?.numerical_rank() == k;
            let d_ok = r == k || nk == 0 || svd(&d)?.numerical_rank() == (r - k).min(nk);
            if x1_ok && d_ok {
                return Ok(Self {
                    x1,
                    c: Matrix::zeros(k, nk),
                    b: Matrix::zeros(m, r - k),
                    d,
                    p: 0,
                });
            }
            last_err = Some(Error::RankDeficient {
                what: "random initial factors",
                sigma_min: 0.0,
                sigma_max: 1.0,
            });
        }
        Err(last_err.expect("at least one attempt"))
    }

    /// Factors `(X₁, X₂)` as `X₂ = X₁C + BD` with `C` the least-squares
    /// coefficient and `BD` the best rank-`(r−k)` fit of what is left.
    ///
    /// Exact whenever `X₁` has full column rank and `rank(X₁ X₂) ≤ r`.
    pub fn from_blocks(prob: &WlrProblem<T>, x1: &Matrix<T>, x2: &Matrix<T>) -> Result<Self> {
        let (m, k, r, nk) = (prob.m(), prob.k(), prob.r(), prob.a2.cols());
        if x1.shape() != (m, k) || x2.shape() != (m, nk) {
            return Err(Error::ShapeMismatch {
                op: "from_blocks",
                left: x1.shape(),
                right: x2.shape(),
            });
        }
        let c = if k == 0 {
            Matrix::zeros(0, nk)
        } else {
            lstsq_min_norm(x1, x2)?
        };
        let rest = x2 - &(x1 * &c);
        let f = svd(&rest)?;
        let s = r - k;
        let b = Matrix::from_fn(m, s, |i, j| f.u[(i, j)] * f.sigma[j]);
        let d = Matrix::from_fn(s, nk, |i, j| f.v[(j, i)]);
        Ok(Self {
            x1: x1.clone(),
            c,
            b,
            d,
            p: 0,
        })
    }

    pub fn check_shapes(&self, prob: &WlrProblem<T>) -> Result<()> {
        let (m, k, r, nk) = (prob.m(), prob.k(), prob.r(), prob.a2.cols());
        let expect = [
            ("x1", self.x1.shape(), (m, k)),
            ("c", self.c.shape(), (k, nk)),
            ("b", self.b.shape(), (m, r - k)),
            ("d", self.d.shape(), (r - k, nk)),
        ];
        for (name, got, want) in expect {
            if got != want {
                return Err(Error::ShapeMismatch {
                    op: name,
                    left: got,
                    right: want,
                });
            }
        }
        Ok(())
    }

    /// `X₂ = X₁C + BD`.
    pub fn x2(&self) -> Matrix<T> {
        &(&self.x1 * &self.c) + &(&self.b * &self.d)
    }

    /// The current approximation `(X₁ X₁C + BD)`.
    pub fn approximation(&self) -> Matrix<T> {
        self.x1.hstack(&self.x2()).expect("row counts agree")
    }
}

/// Exact value of `F(X₁, C, B, D)`.
pub fn objective<T: Scalar>(prob: &WlrProblem<T>, st: &WlrState<T>) -> Result<T> {
    st.check_shapes(prob)?;
    Ok(objective_unchecked(prob, st))
}

pub(crate) fn objective_unchecked<T: Scalar>(prob: &WlrProblem<T>, st: &WlrState<T>) -> T {
    let weighted: T = prob
        .a1
        .as_slice()
        .iter()
        .zip(st.x1.as_slice())
        .zip(prob.w1.as_slice())
        .map(|((&a, &x), &w)| {
            let e = (a - x) * w;
            e * e
        })
        .sum();
    weighted + residual(prob, st).frobenius_norm_sq()
}

/// `A₂ − X₁C − BD`.
pub(crate) fn residual<T: Scalar>(prob: &WlrProblem<T>, st: &WlrState<T>) -> Matrix<T> {
    &prob.a2 - &st.x2()
}

/// Gradients of `F` with respect to each block.
#[derive(Clone, Debug)]
pub struct Gradients<T = f64> {
    pub x1: Matrix<T>,
    pub c: Matrix<T>,
    pub b: Matrix<T>,
    pub d: Matrix<T>,
}

/// Analytic gradients of `F` (including the factor 2 from the squares).
pub fn gradients<T: Scalar>(prob: &WlrProblem<T>, st: &WlrState<T>) -> Result<Gradients<T>> {
    st.check_shapes(prob)?;
    let two = T::of(2.0);
    let res = residual(prob, st);
    let weighted = Matrix::from_raw(
        prob.m(),
        prob.k(),
        st.x1
            .as_slice()
            .iter()
            .zip(prob.a1.as_slice())
            .zip(prob.w1_sq.as_slice())
            .map(|((&x, &a), &w2)| (x - a) * w2)
            .collect(),
    );
    let gx = (&weighted - &res.matmul_t(&st.c)).scale(two);
    let gc = st.x1.t_matmul(&res).scale(-two);
    let gb = res.matmul_t(&st.d).scale(-two);
    let gd = st.b.t_matmul(&res).scale(-two);
    Ok(Gradients {
        x1: gx,
        c: gc,
        b: gb,
        d: gd,
    })
}

/// Frobenius norms of the four block gradients, in the order `X₁, C, B, D`.
pub fn stationarity_residuals<T: Scalar>(prob: &WlrProblem<T>, st: &WlrState<T>) -> Result<[T; 4]> {
    let g = gradients(prob, st)?;
    Ok([
        g.x1.frobenius_norm(),
        g.c.frobenius_norm(),
        g.b.frobenius_norm(),
        g.d.frobenius_norm(),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::gaussian;

    fn problem(m: usize, n: usize, k: usize, r: usize, seed: u64) -> WlrProblem {
        let a = gaussian(m, n, seed);
        let (a1, a2) = a.split_cols(k).unwrap();
        let w1 = GaussianRng::new(seed + 1).uniform_matrix(m, k, 1.0, 10.0);
        WlrProblem::new(a1, a2, w1, r).unwrap()
    }

    #[test]
    fn problem_validation() {
        let a = gaussian(6, 5, 1);
        let (a1, a2) = a.split_cols(2).unwrap();
        let w = Matrix::ones(6, 2);
        assert!(WlrProblem::new(a1.clone(), a2.clone(), w.clone(), 1).is_err());
        assert!(WlrProblem::new(a1.clone(), a2.clone(), w.clone(), 6).is_err());
        assert!(WlrProblem::new(a1.clone(), a2.clone(), Matrix::zeros(6, 2), 3).is_err());
        assert!(WlrProblem::new(a1.clone(), a2.clone(), Matrix::ones(6, 3), 3).is_err());
        let dup = a1.columns(0, 1).hstack(&a1.columns(0, 1)).unwrap();
        assert!(matches!(
            WlrProblem::new(dup, a2.clone(), w.clone(), 3),
            Err(Error::RankDeficient { .. })
        ));
        let p = WlrProblem::new(a1, a2, w, 3).unwrap();
        assert_eq!((p.m(), p.n(), p.k(), p.r()), (6, 5, 2, 3));
        assert_eq!(p.uniform_weight(), Some(1.0));
    }

    #[test]
    fn objective_exact_fit_is_zero() {
        let a1 = gaussian(5, 2, 3);
        let c = gaussian(2, 3, 4);
        let b = gaussian(5, 1, 5);
        let d = gaussian(1, 3, 6);
        let a2 = &(&a1 * &c) + &(&b * &d);
        let prob = WlrProblem::new(a1.clone(), a2, Matrix::ones(5, 2), 3).unwrap();
        let st = WlrState::new(&prob, a1, c, b, d).unwrap();
        assert!(objective(&prob, &st).unwrap() < 1e-20);
        for r in stationarity_residuals(&prob, &st).unwrap() {
            assert!(r < 1e-12);
        }
    }

    #[test]
    fn objective_at_zero_state() {
        let prob = problem(6, 5, 2, 3, 7);
        let st = WlrState::zeros(&prob);
        let want = prob.a1().hadamard(prob.w1()).unwrap().frobenius_norm_sq()
            + prob.a2().frobenius_norm_sq();
        assert!((objective(&prob, &st).unwrap() - want).abs() < 1e-12 * want);
    }

    #[test]
    fn objective_matches_double_loop() {
        let prob = problem(7, 6, 2, 4, 8);
        let st = WlrState::random_init(&prob, 3).unwrap();
        let st = WlrState {
            c: gaussian(2, 4, 9),
            b: gaussian(7, 2, 10),
            ..st
        };
        let mut naive = 0.0;
        for i in 0..7 {
            for j in 0..2 {
                let e = (prob.a1()[(i, j)] - st.x1[(i, j)]) * prob.w1()[(i, j)];
                naive += e * e;
            }
            for j in 0..4 {
                let mut x2 = 0.0;
                for l in 0..2 {
                    x2 += st.x1[(i, l)] * st.c[(l, j)] + st.b[(i, l)] * st.d[(l, j)];
                }
                let e = prob.a2()[(i, j)] - x2;
                naive += e * e;
            }
        }
        let got = objective(&prob, &st).unwrap();
        assert!((got - naive).abs() <= 1e-12 * naive);
    }

    #[test]
    fn from_blocks_round_trips_feasible_points() {
        let prob = problem(9, 8, 2, 4, 12);
        let x1 = gaussian(9, 2, 1);
        let x2 = &(&x1 * &gaussian(2, 6, 2)) + &(&gaussian(9, 2, 3) * &gaussian(2, 6, 4));
        let st = WlrState::from_blocks(&prob, &x1, &x2).unwrap();
        assert!(crate::testutil::rel_err(&st.x2(), &x2) < 1e-12);
        assert!(WlrState::from_blocks(&prob, &x2, &x1).is_err());
    }

    #[test]
    fn random_init_shapes_and_determinism() {
        let prob = problem(8, 7, 2, 4, 11);
        let a = WlrState::random_init(&prob, 5).unwrap();
        let b = WlrState::random_init(&prob, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.c, Matrix::zeros(2, 5));
        assert_eq!(a.b, Matrix::zeros(8, 2));
        assert!(a.check_shapes(&prob).is_ok());
        let bad = WlrState {
            c: Matrix::zeros(3, 5),
            ..a
        };
        assert!(objective(&prob, &bad).is_err());
    }
}
