//! The alternating-minimisation driver.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::diagnostics::{descent_decomposition, DescentDecomposition};
use super::updates::sweep;
use super::{objective_unchecked, stationarity_residuals, WlrProblem, WlrState};

/// Stop when `Error_p < epsilon`, when `Error_p / ‖A_p‖ < epsilon`, or after
/// `max_iter` sweeps, where `Error_p = ‖A_{p+1} − A_p‖_F` is the change of the
/// assembled approximation over one sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StoppingCriteria<T = f64> {
    pub epsilon: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for StoppingCriteria<T> {
    fn default() -> Self {
        Self {
            epsilon: T::of(1e-10),
            max_iter: 10_000,
        }
    }
}

impl<T: Scalar> StoppingCriteria<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > T::zero()) || !self.epsilon.is_finite() {
            return Err(Error::invalid(format!(
                "epsilon > 0 required (epsilon = {})",
                self.epsilon
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter >= 1 required"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions<T = f64> {
    pub stop: StoppingCriteria<T>,
    /// Record the descent decomposition and stationarity residuals every sweep.
    pub diagnostics: bool,
}

impl<T: Scalar> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            stop: StoppingCriteria::default(),
            diagnostics: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    AbsoluteChange,
    RelativeChange,
    MaxIter,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::AbsoluteChange => "absolute-change",
            StopReason::RelativeChange => "relative-change",
            StopReason::MaxIter => "max-iter",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationDiagnostics<T = f64> {
    pub descent: DescentDecomposition<T>,
    /// Gradient norms after the sweep, order `X₁, C, B, D`.
    pub residuals: [T; 4],
}

/// A sweep in which a factor Gram matrix was numerically singular.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FallbackEvent {
    /// Zero-based sweep index.
    pub sweep: usize,
    pub block: &'static str,
}

#[derive(Clone, Debug)]
pub struct WlrReport<T = f64> {
    pub state: WlrState<T>,
    /// `m_0, m_1, …, m_iterations`.
    pub objective_trace: Vec<T>,
    /// `Error_p` for each sweep.
    pub error_trace: Vec<T>,
    /// Empty unless diagnostics were requested.
    pub diagnostics: Vec<IterationDiagnostics<T>>,
    pub fallbacks: Vec<FallbackEvent>,
    pub stop_reason: StopReason,
    pub iterations: usize,
    /// Gradient norms at the returned state.
    pub stationarity: [T; 4],
    /// `Σ_p √max(m_p − m_{p+1}, 0)`.
    pub sqrt_decrease_sum: T,
    /// Sweeps where `m_{p+1} > m_p` by more than rounding.
    pub monotonicity_violations: usize,
}

impl<T: Scalar> WlrReport<T> {
    pub fn objective(&self) -> T {
        *self
            .objective_trace
            .last()
            .expect("trace holds the initial value")
    }

    pub fn converged(&self) -> bool {
        self.stop_reason != StopReason::MaxIter
    }
}

/// Runs sweeps from `init` until a stopping rule fires.
pub fn solve<T: Scalar>(
    prob: &WlrProblem<T>,
    init: WlrState<T>,
    opts: &SolveOptions<T>,
) -> Result<WlrReport<T>> {
    solve_observed(prob, init, opts, |_, _| {})
}

/// As [`solve`], calling `observer(state, objective)` after every sweep.
pub fn solve_observed<T: Scalar>(
    prob: &WlrProblem<T>,
    init: WlrState<T>,
    opts: &SolveOptions<T>,
    mut observer: impl FnMut(&WlrState<T>, T),
) -> Result<WlrReport<T>> {
    opts.stop.validate()?;
    init.check_shapes(prob)?;
    let eps = opts.stop.epsilon;
    let slack = T::epsilon() * T::of(64.0);

    let mut state = init;
    let mut approx = state.approximation();
    let mut m = objective_unchecked(prob, &state);
    let mut report = WlrReport {
        state: state.clone(),
        objective_trace: vec![m],
        error_trace: Vec::new(),
        diagnostics: Vec::new(),
        fallbacks: Vec::new(),
        stop_reason: StopReason::MaxIter,
        iterations: 0,
        stationarity: [T::zero(); 4],
        sqrt_decrease_sum: T::zero(),
        monotonicity_violations: 0,
    };

    for p in 0..opts.stop.max_iter {
        let (next, outcome) = sweep(prob, &state)?;
        for (hit, block) in [
            (outcome.c_fallback, "c"),
            (outcome.b_fallback, "b"),
            (outcome.d_fallback, "d"),
        ] {
            if hit {
                report.fallbacks.push(FallbackEvent { sweep: p, block });
            }
        }
        let m_next = objective_unchecked(prob, &next);
        if !m_next.is_finite() {
            return Err(Error::NonFinite {
                row: 0,
                col: 0,
                value: m_next.to_f64_lossy(),
            });
        }
        if m_next > m + slack * m.max(T::one()) {
            report.monotonicity_violations += 1;
        }
        report.sqrt_decrease_sum += (m - m_next).max(T::zero()).sqrt();
        if opts.diagnostics {
            report.diagnostics.push(IterationDiagnostics {
                descent: descent_decomposition(prob, &state, &next)?,
                residuals: stationarity_residuals(prob, &next)?,
            });
        }
        let next_approx = next.approximation();
        let change = (&next_approx - &approx).frobenius_norm();
        let scale = approx.frobenius_norm();
        report.error_trace.push(change);
        report.objective_trace.push(m_next);
        observer(&next, m_next);

        state = next;
        approx = next_approx;
        m = m_next;
        report.iterations = p + 1;

        if change < eps {
            report.stop_reason = StopReason::AbsoluteChange;
            break;
        }
        if scale > T::zero() && change / scale < eps {
            report.stop_reason = StopReason::RelativeChange;
            break;
        }
    }

    report.stationarity = stationarity_residuals(prob, &state)?;
    report.state = state;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ghs::{solve_ghs, solve_uniform_penalized};
    use crate::linalg::{hard_threshold, svd};
    use crate::matrix::Matrix;
    use crate::synth::GaussianRng;
    use crate::testutil::{gaussian, rel_err};
    use crate::wlr::{gradients, objective, report_csv};

    fn opts(eps: f64, max_iter: usize, diagnostics: bool) -> SolveOptions {
        SolveOptions {
            stop: StoppingCriteria {
                epsilon: eps,
                max_iter,
            },
            diagnostics,
        }
    }

    fn weighted(m: usize, n: usize, k: usize, r: usize, seed: u64) -> WlrProblem {
        let a = gaussian(m, n, seed);
        let (a1, a2) = a.split_cols(k).unwrap();
        let w1 = GaussianRng::new(seed ^ 0x55).uniform_matrix(m, k, 0.5, 5.0);
        WlrProblem::new(a1, a2, w1, r).unwrap()
    }

    #[test]
    fn descent_identity_and_monotonicity() {
        for seed in 0..5 {
            let prob = weighted(12, 10, 3, 5, seed);
            let init = WlrState::random_init(&prob, seed).unwrap();
            let rep = solve(&prob, init, &opts(1e-14, 50, true)).unwrap();
            assert_eq!(rep.monotonicity_violations, 0);
            for d in &rep.diagnostics {
                assert!(d.descent.d1 >= 0.0 && d.descent.d2 >= 0.0);
                assert!(d.descent.d3 >= 0.0 && d.descent.d4 >= 0.0);
                assert!(d.descent.relative_identity_gap() < 1e-9, "{:?}", d.descent);
            }
            assert!(rep
                .objective_trace
                .windows(2)
                .all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
        }
    }

    #[test]
    fn per_sweep_corollaries_and_summability() {
        let prob = weighted(10, 9, 2, 4, 3);
        let init = WlrState::random_init(&prob, 1).unwrap();
        let mut states = vec![init.clone()];
        let rep = solve_observed(&prob, init, &opts(1e-14, 200, false), |s, _| {
            states.push(s.clone())
        })
        .unwrap();
        let m = &rep.objective_trace;
        let mut bd_sum = 0.0;
        for p in 0..rep.iterations {
            let (s0, s1) = (&states[p], &states[p + 1]);
            let dbd = (&(&s1.b * &s1.d) - &(&s0.b * &s0.d)).frobenius_norm_sq();
            let dxw = (&s1.x1 - &s0.x1)
                .hadamard(prob.w1())
                .unwrap()
                .frobenius_norm_sq();
            let dec = m[p] - m[p + 1];
            let tol = 1e-10 * m[p];
            assert!(dec + tol >= 0.5 * dbd, "p {p}: {dec} < {}", 0.5 * dbd);
            assert!(dec + tol >= dxw, "p {p}: {dec} < {dxw}");
            if p >= 1 {
                bd_sum += dbd;
            }
        }
        assert!(bd_sum <= 2.0 * m[1] * (1.0 + 1e-10));
    }

    #[test]
    fn k_zero_matches_truncated_svd() {
        let a = gaussian(9, 7, 4);
        let prob = WlrProblem::new(Matrix::zeros(9, 0), a.clone(), Matrix::zeros(9, 0), 3).unwrap();
        let init = WlrState::random_init(&prob, 2).unwrap();
        let rep = solve(&prob, init, &opts(1e-13, 5000, false)).unwrap();
        let s = svd(&a).unwrap().sigma;
        let tail: f64 = s[3..].iter().map(|x| x * x).sum();
        assert!((rep.objective() - tail).abs() < 1e-8 * tail);
        let best = hard_threshold(&a, 3).unwrap();
        assert!(rel_err(&rep.state.x2(), &best) < 1e-5);
    }

    #[test]
    fn uniform_weights_match_closed_form() {
        let a = gaussian(10, 8, 5);
        let (a1, a2) = a.split_cols(2).unwrap();
        let lambda = 3.0;
        let prob = WlrProblem::uniform(a1.clone(), a2.clone(), lambda, 4).unwrap();
        let init = WlrState::random_init(&prob, 9).unwrap();
        let rep = solve(&prob, init, &opts(1e-14, 20000, false)).unwrap();
        let (x1, x2) = solve_uniform_penalized(&a1, &a2, lambda, 4).unwrap();
        let want = x1.hstack(&x2).unwrap();
        assert!(rel_err(&rep.state.approximation(), &want) < 1e-6);
    }

    #[test]
    fn large_weights_approach_constrained_solution() {
        let a = gaussian(12, 9, 6);
        let (a1, a2) = a.split_cols(2).unwrap();
        let prob = WlrProblem::uniform(a1.clone(), a2.clone(), 1e3, 4).unwrap();
        let init = WlrState::random_init(&prob, 4).unwrap();
        let rep = solve(&prob, init, &opts(1e-14, 20000, false)).unwrap();
        let g = solve_ghs(&a1, &a2, 4).unwrap().assembled();
        assert!((&rep.state.approximation() - &g).frobenius_norm() < 1e-2);
    }

    #[test]
    fn k_equals_r_leaves_b_d_untouched() {
        let prob = weighted(8, 6, 3, 3, 7);
        let init = WlrState::random_init(&prob, 3).unwrap();
        let rep = solve(&prob, init, &opts(1e-12, 500, false)).unwrap();
        assert_eq!(rep.state.b.shape(), (8, 0));
        assert!(rep.converged());
        for r in rep.stationarity {
            assert!(r < 1e-6, "{:?}", rep.stationarity);
        }
    }

    #[test]
    fn stopping_rules() {
        let prob = weighted(8, 6, 2, 3, 8);
        let init = WlrState::random_init(&prob, 1).unwrap();
        let rep = solve(&prob, init.clone(), &opts(1e-300, 3, false)).unwrap();
        assert_eq!(rep.stop_reason, StopReason::MaxIter);
        assert_eq!(rep.iterations, 3);
        assert_eq!(rep.objective_trace.len(), 4);
        assert_eq!(rep.error_trace.len(), 3);
        assert!(!rep.converged());
        let rep = solve(&prob, init.clone(), &opts(1e10, 100, false)).unwrap();
        assert_eq!(rep.stop_reason, StopReason::AbsoluteChange);
        assert_eq!(rep.iterations, 1);
        assert!(solve(&prob, init.clone(), &opts(0.0, 10, false)).is_err());
        assert!(solve(&prob, init, &opts(1e-3, 0, false)).is_err());
    }

    #[test]
    fn converged_point_is_stationary() {
        let prob = weighted(10, 8, 2, 4, 9);
        let init = WlrState::random_init(&prob, 5).unwrap();
        let rep = solve(&prob, init, &opts(1e-13, 50000, false)).unwrap();
        assert!(rep.converged());
        let g = gradients(&prob, &rep.state).unwrap();
        let scale = prob.data().frobenius_norm();
        for n in [&g.x1, &g.c, &g.b, &g.d] {
            assert!(n.frobenius_norm() < 1e-5 * scale);
        }
        // Another sweep barely moves.
        let again = solve(&prob, rep.state.clone(), &opts(1e-300, 1, false)).unwrap();
        assert!((again.objective() - rep.objective()).abs() < 1e-10 * rep.objective());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let prob = weighted(6, 5, 2, 3, 10);
        let st = WlrState {
            c: gaussian(2, 3, 1),
            b: gaussian(6, 1, 2),
            ..WlrState::random_init(&prob, 3).unwrap()
        };
        let g = gradients(&prob, &st).unwrap();
        let h = 1e-6;
        let check = |get: &dyn Fn(&mut WlrState) -> &mut Matrix, grad: &Matrix| {
            let (rows, cols) = grad.shape();
            for i in 0..rows {
                for j in 0..cols {
                    let mut plus = st.clone();
                    get(&mut plus)[(i, j)] += h;
                    let mut minus = st.clone();
                    get(&mut minus)[(i, j)] -= h;
                    let fd = (objective(&prob, &plus).unwrap() - objective(&prob, &minus).unwrap())
                        / (2.0 * h);
                    assert!(
                        (fd - grad[(i, j)]).abs() < 1e-5 * (1.0 + fd.abs()),
                        "({i},{j}) fd {fd} analytic {}",
                        grad[(i, j)]
                    );
                }
            }
        };
        check(&|s| &mut s.x1, &g.x1);
        check(&|s| &mut s.c, &g.c);
        check(&|s| &mut s.b, &g.b);
        check(&|s| &mut s.d, &g.d);
    }

    #[test]
    fn observer_sees_every_sweep_and_csv_has_one_row_each() {
        let prob = weighted(7, 6, 2, 3, 11);
        let init = WlrState::random_init(&prob, 2).unwrap();
        let mut seen = Vec::new();
        let rep = solve_observed(&prob, init, &opts(1e-300, 6, true), |s, m| {
            seen.push((s.p, m))
        })
        .unwrap();
        assert_eq!(seen.len(), 6);
        assert_eq!(seen.last().unwrap().0, 6);
        let csv = report_csv(&rep);
        assert_eq!(csv.lines().count(), 7);
        assert!(csv.starts_with("p,m_p,error_p,d1,d2,d3,d4,"));
        assert_eq!(csv.lines().nth(1).unwrap().split(',').count(), 11);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let prob = weighted(9, 7, 2, 4, 12);
        let a = solve(
            &prob,
            WlrState::random_init(&prob, 8).unwrap(),
            &opts(1e-10, 300, false),
        )
        .unwrap();
        let b = solve(
            &prob,
            WlrState::random_init(&prob, 8).unwrap(),
            &opts(1e-10, 300, false),
        )
        .unwrap();
        assert_eq!(a.state, b.state);
        assert_eq!(a.objective_trace, b.objective_trace);
    }
}
