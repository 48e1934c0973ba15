//! Closed-form solvers for column-constrained low-rank approximation.
//!
//! Given `A = (A₁ A₂)` with `A₁` of full column rank `k`, the best
//! approximation of rank at most `r` that keeps `A₁` fixed replaces `A₂` by
//! `P_{A₁}(A₂) + H_{r−k}(P⊥_{A₁}(A₂))`. The same projected block drives the
//! uniform-weight penalised problem (in the large-weight limit) and the
//! rank-penalised limit, whose rank is picked from the threshold `τ`.

use crate::error::{Error, Result};
use crate::linalg::lowrank::{spectral_gap, truncate, truncation_is_ambiguous};
use crate::linalg::subspace::ColumnSpace;
use crate::linalg::svd::{svd, SvdFactors};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Constrained approximation `(x1 x2)` with `x1 = A₁`.
#[derive(Clone, Debug)]
pub struct GhsSolution<T = f64> {
    pub x1: Matrix<T>,
    pub x2: Matrix<T>,
    /// `σ_{r−k} − σ_{r−k+1}` of `P⊥_{A₁}(A₂)` (`+∞` when `r = k`).
    pub spectral_gap: T,
    /// False only when the truncation splits tied non-zero singular values.
    pub unique: bool,
    /// Singular values of `P⊥_{A₁}(A₂)`, non-increasing.
    pub projected_sigma: Vec<T>,
    /// `‖A₂ − x2‖_F²`.
    pub objective: T,
}

impl<T: Scalar> GhsSolution<T> {
    /// The full approximation `(x1 x2)`.
    pub fn assembled(&self) -> Matrix<T> {
        self.x1.hstack(&self.x2).expect("blocks share row count")
    }
}

/// Projection of `A₂` onto `span(A₁)` and the SVD of the remainder.
struct ProjectedBlock<T> {
    in_span: Matrix<T>,
    perp: SvdFactors<T>,
}

fn project_block<T: Scalar>(a1: &Matrix<T>, a2: &Matrix<T>) -> Result<ProjectedBlock<T>> {
    if a1.rows() != a2.rows() {
        return Err(Error::ShapeMismatch {
            op: "constrained solve (a1 vs a2 rows)",
            left: a1.shape(),
            right: a2.shape(),
        });
    }
    let space = ColumnSpace::named(a1, "a1")?;
    let in_span = space.project(a2)?;
    let perp = svd(&(a2 - &in_span))?;
    Ok(ProjectedBlock { in_span, perp })
}

fn assemble<T: Scalar>(
    a1: &Matrix<T>,
    a2: &Matrix<T>,
    block: &ProjectedBlock<T>,
    keep: usize,
) -> GhsSolution<T> {
    let sigma = &block.perp.sigma;
    let x2 = &block.in_span + &block.perp.reconstruct_rank(keep);
    let objective = (a2 - &x2).frobenius_norm_sq();
    GhsSolution {
        x1: a1.clone(),
        x2,
        spectral_gap: spectral_gap(sigma, keep),
        unique: !truncation_is_ambiguous(sigma, keep),
        projected_sigma: sigma.clone(),
        objective,
    }
}

/// Best rank-`r` approximation of `(a1 a2)` that reproduces `a1` exactly.
///
/// `k` is `a1.cols()`; requires `k ≤ r ≤ min(m, n)` and `a1` of full column
/// rank. On tied singular values the SVD-ordered member of the solution set
/// is returned with `unique = false`.
pub fn solve_ghs<T: Scalar>(a1: &Matrix<T>, a2: &Matrix<T>, r: usize) -> Result<GhsSolution<T>> {
    let (m, k) = a1.shape();
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
    let block = project_block(a1, a2)?;
    Ok(assemble(a1, a2, &block, r - k))
}

/// Minimiser of `λ²‖A₁ − X₁‖² + ‖A₂ − X₂‖²` over rank-`r` `(X₁ X₂)`:
/// truncate `(λA₁ A₂)` and scale the first block back by `1/λ`.
pub fn solve_uniform_penalized<T: Scalar>(
    a1: &Matrix<T>,
    a2: &Matrix<T>,
    lambda: T,
    r: usize,
) -> Result<(Matrix<T>, Matrix<T>)> {
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(Error::invalid(format!(
            "lambda > 0 required (lambda = {lambda})"
        )));
    }
    let k = a1.cols();
    let scaled = a1.scale(lambda).hstack(a2)?;
    let h = truncate(&scaled, r)?.matrix;
    let (x1, x2) = h.split_cols(k)?;
    Ok((x1.scale(T::one() / lambda), x2))
}

/// Objective `λ²‖A₁ − X₁‖² + ‖A₂ − X₂‖²`.
pub fn uniform_penalized_objective<T: Scalar>(
    a1: &Matrix<T>,
    a2: &Matrix<T>,
    lambda: T,
    x1: &Matrix<T>,
    x2: &Matrix<T>,
) -> T {
    lambda * lambda * (a1 - x1).frobenius_norm_sq() + (a2 - x2).frobenius_norm_sq()
}

/// Rank picked by the threshold rule `σ_{r+1}² ≤ τ < σ_r²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankSelection {
    pub rank: usize,
    /// `τ` coincides with some `σᵢ²` to within `1e-12` relative; the rule
    /// still applies and attaches the boundary to the smaller rank.
    pub boundary_tie: bool,
}

/// Chooses `r*` with `σ_{r*+1}² ≤ τ < σ_{r*}²`, taking `σ₀ = ∞` and
/// `σ_{s+1} = 0`. Returns 0 when `τ ≥ σ₁²`.
pub fn select_rank_from_tau<T: Scalar>(sigmas: &[T], tau: T) -> Result<RankSelection> {
    if !(tau > T::zero()) || !tau.is_finite() {
        return Err(Error::invalid(format!("tau > 0 required (tau = {tau})")));
    }
    if sigmas.iter().any(|&s| !(s >= T::zero())) {
        return Err(Error::invalid("singular values must be non-negative"));
    }
    if sigmas.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::invalid("singular values must be non-increasing"));
    }
    let rank = sigmas.iter().take_while(|&&s| s * s > tau).count();
    let tol = T::of(1e-12) * tau;
    let boundary_tie = sigmas.iter().any(|&s| (s * s - tau).abs() <= tol);
    Ok(RankSelection { rank, boundary_tie })
}

/// Large-weight limit of the rank-penalised problem for threshold `τ`.
#[derive(Clone, Debug)]
pub struct PenalizedSolution<T = f64> {
    pub r_star: usize,
    pub solution: GhsSolution<T>,
    pub tau: T,
    pub boundary_tie: bool,
}

/// `(A₁, P_{A₁}(A₂) + H_{r*}(P⊥_{A₁}(A₂)))` with `r*` from [`select_rank_from_tau`].
pub fn solve_rank_penalized_limit<T: Scalar>(
    a1: &Matrix<T>,
    a2: &Matrix<T>,
    tau: T,
) -> Result<PenalizedSolution<T>> {
    if !(tau > T::zero()) || !tau.is_finite() {
        return Err(Error::invalid(format!("tau > 0 required (tau = {tau})")));
    }
    let block = project_block(a1, a2)?;
    let sel = select_rank_from_tau(&block.perp.sigma, tau)?;
    Ok(PenalizedSolution {
        r_star: sel.rank,
        solution: assemble(a1, a2, &block, sel.rank),
        tau,
        boundary_tie: sel.boundary_tie,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hard_threshold;
    use crate::synth::GaussianRng;
    use crate::testutil::{gaussian, rel_err};

    #[test]
    fn small_worked_example() {
        let a1 = Matrix::from_rows(&[[1.0], [0.0], [0.0]]).unwrap();
        let a2 = Matrix::from_rows(&[[0.0, 0.0], [3.0, 0.0], [0.0, 2.0]]).unwrap();
        let s = solve_ghs(&a1, &a2, 2).unwrap();
        let want = Matrix::from_rows(&[[0.0, 0.0], [3.0, 0.0], [0.0, 0.0]]).unwrap();
        assert!(rel_err(&s.x2, &want) < 1e-14);
        assert_eq!(s.x1, a1);
        assert!(s.unique);
        assert!((s.spectral_gap - 1.0).abs() < 1e-14);
        assert!((s.objective - 4.0).abs() < 1e-12);
    }

    #[test]
    fn full_rank_keeps_a2() {
        let a = gaussian(6, 5, 1);
        let (a1, a2) = a.split_cols(2).unwrap();
        let s = solve_ghs(&a1, &a2, 5).unwrap();
        assert!(rel_err(&s.x2, &a2) < 1e-12);
        assert!(s.unique);
    }

    #[test]
    fn validation_errors() {
        let a = gaussian(5, 4, 2);
        let (a1, a2) = a.split_cols(2).unwrap();
        let err = solve_ghs(&a1, &a2, 1).unwrap_err();
        assert!(err.to_string().contains("r >= k"));
        assert!(matches!(
            solve_ghs(&a1, &a2, 5),
            Err(Error::RankOutOfRange { .. })
        ));
        let dup = a1.columns(0, 1).hstack(&a1.columns(0, 1)).unwrap();
        assert!(matches!(
            solve_ghs(&dup, &a2, 3),
            Err(Error::RankDeficient { what: "a1", .. })
        ));
        let short = gaussian(4, 2, 3);
        assert!(matches!(
            solve_ghs(&a1, &short, 3),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn zero_k_reduces_to_hard_threshold() {
        let a = gaussian(7, 5, 4);
        let s = solve_ghs(&Matrix::zeros(7, 0), &a, 2).unwrap();
        assert!(rel_err(&s.x2, &hard_threshold(&a, 2).unwrap()) < 1e-12);
    }

    #[test]
    fn residual_equals_projected_tail() {
        for seed in 0..10 {
            let a = gaussian(10, 8, 10 + seed);
            let (a1, a2) = a.split_cols(3).unwrap();
            let s = solve_ghs(&a1, &a2, 5).unwrap();
            let tail: f64 = s.projected_sigma[2..].iter().map(|x| x * x).sum();
            assert!((s.objective - tail).abs() <= 1e-8 * tail);
            let full = s.assembled();
            assert!(crate::linalg::svd(&full).unwrap().numerical_rank() <= 5);
        }
    }

    #[test]
    fn beats_random_feasible_candidates() {
        let mut rng = GaussianRng::new(99);
        let a = gaussian(10, 8, 5);
        let (a1, a2) = a.split_cols(3).unwrap();
        let s = solve_ghs(&a1, &a2, 5).unwrap();
        for i in 0..1000 {
            // X₂ = A₁C + BD, scaled around the optimum every other draw.
            let c: Matrix = rng.normal_matrix(3, 5);
            let b: Matrix = rng.normal_matrix(10, 2);
            let d: Matrix = rng.normal_matrix(2, 5);
            let cand = &(&a1 * &c) + &(&b * &d);
            let cand = if i % 2 == 0 {
                &s.x2 + &cand.scale(1e-3)
            } else {
                cand
            };
            let rank = crate::linalg::svd(&a1.hstack(&cand).unwrap())
                .unwrap()
                .numerical_rank();
            assert!(rank <= 5 || i % 2 == 0);
            if rank <= 5 {
                assert!(s.objective <= (&a2 - &cand).frobenius_norm_sq() + 1e-12);
            }
        }
    }

    #[test]
    fn tie_is_flagged_non_unique() {
        let a1 = Matrix::from_rows(&[[1.0], [0.0], [0.0]]).unwrap();
        let a2 = Matrix::from_rows(&[[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]).unwrap();
        let s = solve_ghs(&a1, &a2, 2).unwrap();
        assert!(!s.unique);
        assert_eq!(s.spectral_gap, 0.0);
    }

    #[test]
    fn uniform_penalized_examples() {
        let a = gaussian(8, 6, 6);
        let (a1, a2) = a.split_cols(2).unwrap();
        let (x1, x2) = solve_uniform_penalized(&a1, &a2, 1.0, 3).unwrap();
        let h = hard_threshold(&a, 3).unwrap();
        assert!(rel_err(&x1.hstack(&x2).unwrap(), &h) < 1e-12);
        let (y1, y2) = solve_uniform_penalized(&a1, &a2, 7.5, 6).unwrap();
        assert!(rel_err(&y1, &a1) < 1e-12 && rel_err(&y2, &a2) < 1e-12);
        assert!(solve_uniform_penalized(&a1, &a2, 0.0, 3).is_err());
        assert!(solve_uniform_penalized(&a1, &a2, -1.0, 3).is_err());
    }

    #[test]
    fn uniform_penalized_beats_random_candidates() {
        let mut rng = GaussianRng::new(5);
        let a = gaussian(9, 7, 7);
        let (a1, a2) = a.split_cols(3).unwrap();
        let lambda = 4.0;
        let (x1, x2) = solve_uniform_penalized(&a1, &a2, lambda, 4).unwrap();
        let best = uniform_penalized_objective(&a1, &a2, lambda, &x1, &x2);
        let opt = x1.hstack(&x2).unwrap();
        for i in 0..1000 {
            let l: Matrix = rng.normal_matrix(9, 4);
            let r: Matrix = rng.normal_matrix(4, 7);
            let y = &l * &r;
            // Half the candidates are rank-4 perturbations of the optimum.
            let y = if i % 2 == 0 {
                let f = crate::linalg::svd(&(&opt + &y.scale(1e-3))).unwrap();
                f.reconstruct_rank(4)
            } else {
                y
            };
            let (y1, y2) = y.split_cols(3).unwrap();
            assert!(best <= uniform_penalized_objective(&a1, &a2, lambda, &y1, &y2) + 1e-10);
        }
    }

    #[test]
    fn large_lambda_approaches_constrained_solution() {
        let a = gaussian(12, 10, 8);
        let (a1, a2) = a.split_cols(3).unwrap();
        let g = solve_ghs(&a1, &a2, 5).unwrap().assembled();
        let (x1, x2) = solve_uniform_penalized(&a1, &a2, 1e4, 5).unwrap();
        assert!((&x1.hstack(&x2).unwrap() - &g).frobenius_norm() < 1e-2);
    }

    #[test]
    fn closed_form_limit_rate() {
        // The gap to the constrained solution shrinks at least like 1/λ
        // (in fact like 1/λ²).
        for seed in 0..5 {
            let a = gaussian(12, 10, 30 + seed);
            let (a1, a2) = a.split_cols(3).unwrap();
            let s = solve_ghs(&a1, &a2, 5).unwrap();
            assert!(s.spectral_gap > 0.0);
            let g = s.assembled();
            let dist: Vec<f64> = [1e2, 1e3, 1e4]
                .iter()
                .map(|&lam| {
                    let (x1, x2) = solve_uniform_penalized(&a1, &a2, lam, 5).unwrap();
                    (&x1.hstack(&x2).unwrap() - &g).frobenius_norm()
                })
                .collect();
            let scaled: Vec<f64> = dist
                .iter()
                .zip([1e2, 1e3, 1e4])
                .map(|(d, l)| d * l)
                .collect();
            assert!(scaled.windows(2).all(|w| w[1] <= w[0] * 1.01), "{scaled:?}");
            let squared: Vec<f64> = dist
                .iter()
                .zip([1e2, 1e3, 1e4])
                .map(|(d, l)| d * l * l)
                .collect();
            let (lo, hi) = squared
                .iter()
                .fold((f64::MAX, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
            assert!(hi / lo < 10.0, "{squared:?}");
        }
    }

    #[test]
    fn rank_rule_examples() {
        let s = [3.0, 2.0, 1.0];
        assert_eq!(select_rank_from_tau(&s, 5.0).unwrap().rank, 1);
        assert_eq!(select_rank_from_tau(&s, 9.0).unwrap().rank, 0);
        assert_eq!(select_rank_from_tau(&s, 100.0).unwrap().rank, 0);
        assert_eq!(select_rank_from_tau(&s, 0.5).unwrap().rank, 3);
        let tie = select_rank_from_tau(&s, 4.0).unwrap();
        assert_eq!(
            tie,
            RankSelection {
                rank: 1,
                boundary_tie: true
            }
        );
        assert!(select_rank_from_tau(&s, 0.0).is_err());
        assert!(select_rank_from_tau(&[1.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn rank_rule_matches_brute_force() {
        let mut rng = GaussianRng::new(17);
        for _ in 0..500 {
            let len = 1 + (rng.uniform() * 8.0) as usize;
            let mut s: Vec<f64> = (0..len).map(|_| rng.uniform_in(0.0, 5.0)).collect();
            s.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let tau = rng.uniform_in(0.01, 30.0);
            let brute = (0..=len)
                .min_by(|&a, &b| {
                    let f = |r: usize| s[r..].iter().map(|x| x * x).sum::<f64>() + tau * r as f64;
                    f(a).partial_cmp(&f(b)).unwrap()
                })
                .unwrap();
            let sel = select_rank_from_tau(&s, tau).unwrap();
            if !sel.boundary_tie {
                assert_eq!(sel.rank, brute);
            }
        }
    }

    #[test]
    fn penalized_limit_extremes() {
        let a = gaussian(8, 6, 9);
        let (a1, a2) = a.split_cols(2).unwrap();
        let big = solve_rank_penalized_limit(&a1, &a2, 1e6).unwrap();
        assert_eq!(big.r_star, 0);
        let proj = crate::linalg::project_onto_colspace(&a1, &a2).unwrap();
        assert!(rel_err(&big.solution.x2, &proj) < 1e-12);
        let tiny = solve_rank_penalized_limit(&a1, &a2, 1e-8).unwrap();
        assert_eq!(tiny.r_star, 4);
        assert!((&tiny.solution.x2 - &a2).frobenius_norm() < 1e-10);
    }

    #[test]
    fn penalized_limit_matches_rank_enumeration() {
        let a = gaussian(9, 7, 12);
        let (a1, a2) = a.split_cols(2).unwrap();
        let sigma = solve_ghs(&a1, &a2, 2).unwrap().projected_sigma;
        let s = sigma.len();
        // One tau inside each interval (σ_{i+1}², σ_i²), plus both ends.
        let mut taus = vec![sigma[0] * sigma[0] * 2.0, sigma[s - 1] * sigma[s - 1] * 0.5];
        for w in sigma.windows(2) {
            taus.push(0.5 * (w[0] * w[0] + w[1] * w[1]));
            taus.push(0.1 * w[0] * w[0] + 0.9 * w[1] * w[1]);
        }
        for tau in taus {
            let p = solve_rank_penalized_limit(&a1, &a2, tau).unwrap();
            let score = |x2: &Matrix, r: usize| (&a2 - x2).frobenius_norm_sq() + tau * r as f64;
            let got = score(&p.solution.x2, p.r_star);
            for r in 0..=s {
                let cand = solve_ghs(&a1, &a2, 2 + r).unwrap();
                assert!(got <= score(&cand.x2, r) + 1e-10, "tau {tau}, r {r}");
            }
            // Constant within the interval.
            let q = solve_rank_penalized_limit(&a1, &a2, tau * (1.0 + 1e-9)).unwrap();
            assert_eq!(q.r_star, p.r_star);
        }
    }
}
