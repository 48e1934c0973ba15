//! Benchmark experiments: weight sweeps, solver comparisons and
//! per-iteration traces, each producing rows that serialise to CSV.
//!
//! Rows are sorted by `(sweep_parameter, solver, metric)` before emission and
//! wall times are left out of the CSV unless asked for, so a seeded run
//! always produces the same bytes.

use std::fmt::Write as _;
use std::time::Instant;

use crate::baselines::{als_solve, em_solve, rmse, AlsConfig, EmConfig};
use crate::error::{Error, Result};
use crate::ghs::{solve_ghs, solve_uniform_penalized};
use crate::matrix::{format_float, Matrix};
use crate::scalar::Scalar;
use crate::synth::GaussianRng;
use crate::wlr::{solve, solve_observed, SolveOptions, StoppingCriteria, WlrProblem, WlrState};

/// One measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow<T = f64> {
    pub sweep_parameter: T,
    pub solver: &'static str,
    pub metric_name: &'static str,
    pub metric: T,
    pub iterations: usize,
    pub wall_time_seconds: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepResult<T = f64> {
    pub rows: Vec<SweepRow<T>>,
}

impl<T: Scalar> SweepResult<T> {
    fn push(&mut self, row: SweepRow<T>) -> Result<()> {
        if !row.metric.is_finite() || row.metric < T::zero() {
            return Err(Error::invalid(format!(
                "metric {} for solver {} is not finite and non-negative: {}",
                row.metric_name, row.solver, row.metric
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Rows sorted by `(sweep_parameter, solver, metric_name)`.
    pub fn sorted(&self) -> Vec<&SweepRow<T>> {
        let mut rows: Vec<_> = self.rows.iter().collect();
        rows.sort_by(|a, b| {
            a.sweep_parameter
                .partial_cmp(&b.sweep_parameter)
                .expect("metrics are finite")
                .then_with(|| a.solver.cmp(b.solver))
                .then_with(|| a.metric_name.cmp(b.metric_name))
        });
        rows
    }

    /// Rows matching `solver` and `metric_name`, in sweep order.
    pub fn series(&self, solver: &str, metric_name: &str) -> Vec<(T, T)> {
        self.sorted()
            .into_iter()
            .filter(|r| r.solver == solver && r.metric_name == metric_name)
            .map(|r| (r.sweep_parameter, r.metric))
            .collect()
    }

    /// CSV with header `sweep_parameter,solver,metric_name,metric,iterations`
    /// and a trailing `wall_time_seconds` column when `timings` is set.
    pub fn to_csv(&self, timings: bool) -> String {
        let mut out = String::from("sweep_parameter,solver,metric_name,metric,iterations");
        if timings {
            out.push_str(",wall_time_seconds");
        }
        out.push('\n');
        for row in self.sorted() {
            let _ = write!(
                out,
                "{},{},{},{},{}",
                format_float(row.sweep_parameter),
                row.solver,
                row.metric_name,
                format_float(row.metric),
                row.iterations
            );
            if timings {
                out.push(',');
                if let Some(t) = row.wall_time_seconds {
                    out.push_str(&format_float(t));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// How `W₁` is built at each sweep value `λ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightMode {
    /// `W₁ = λ𝟙`.
    Uniform,
    /// Entries drawn uniformly from `[λ, λ + 20]`.
    Interval,
}

/// Width of the weight band used by [`WeightMode::Interval`].
pub const INTERVAL_WIDTH: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepConfig<T = f64> {
    pub trials: usize,
    pub mode: WeightMode,
    pub stop: StoppingCriteria<T>,
    pub seed: u64,
}

impl<T: Scalar> Default for SweepConfig<T> {
    fn default() -> Self {
        Self {
            trials: 10,
            mode: WeightMode::Uniform,
            stop: StoppingCriteria {
                epsilon: T::of(1e-7),
                max_iter: 10_000,
            },
            seed: 0,
        }
    }
}

/// Sub-seed offsets so independent draws never share a stream.
const WEIGHT_SEED_OFFSET: u64 = 0x5745_4947;
const INIT_SEED_OFFSET: u64 = 0x494e_4954;

fn check_sweep_values<T: Scalar>(values: &[T], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid(format!("{what} list is empty")));
    }
    if values.iter().any(|&v| !(v > T::zero()) || !v.is_finite()) {
        return Err(Error::invalid(format!(
            "{what} values must be positive and finite"
        )));
    }
    if values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid(format!(
            "{what} values must be strictly increasing"
        )));
    }
    Ok(())
}

/// For each `λ`, the distance between the WLR solution and the constrained
/// closed form `A_G`, averaged over trials.
///
/// Metrics: `distance` = `‖A_G − A_WLR‖_F` and `scaled_distance` = `λ·distance`.
pub fn sweep_lambda<T: Scalar>(
    a1: &Matrix<T>,
    a2: &Matrix<T>,
    r: usize,
    lambdas: &[T],
    cfg: &SweepConfig<T>,
) -> Result<SweepResult<T>> {
    check_sweep_values(lambdas, "lambda")?;
    if cfg.trials == 0 {
        return Err(Error::invalid("trials >= 1 required"));
    }
    cfg.stop.validate()?;
    let ag = solve_ghs(a1, a2, r)?.assembled();
    let opts = SolveOptions {
        stop: cfg.stop,
        diagnostics: false,
    };
    let (m, k) = a1.shape();
    let mut out = SweepResult::default();
    for (li, &lambda) in lambdas.iter().enumerate() {
        let mut dist = T::zero();
        let mut iters = 0;
        let start = Instant::now();
        for t in 0..cfg.trials {
            let stream = (li * cfg.trials + t) as u64;
            let w1 = match cfg.mode {
                WeightMode::Uniform => Matrix::filled(m, k, lambda),
                WeightMode::Interval => {
                    let lo = lambda.to_f64_lossy();
                    GaussianRng::new(
                        cfg.seed
                            .wrapping_add(WEIGHT_SEED_OFFSET)
                            .wrapping_add(stream),
                    )
                    .uniform_matrix(m, k, lo, lo + INTERVAL_WIDTH)
                }
            };
            let prob = WlrProblem::new(a1.clone(), a2.clone(), w1, r)?;
            let init = WlrState::random_init(
                &prob,
                cfg.seed.wrapping_add(INIT_SEED_OFFSET).wrapping_add(stream),
            )?;
            let rep = solve(&prob, init, &opts)?;
            dist += (&ag - &rep.state.approximation()).frobenius_norm();
            iters += rep.iterations;
        }
        let wall = start.elapsed().as_secs_f64();
        let dist = dist / T::of_usize(cfg.trials);
        let iters = iters / cfg.trials;
        for (name, value) in [("distance", dist), ("scaled_distance", dist * lambda)] {
            out.push(SweepRow {
                sweep_parameter: lambda,
                solver: "wlr",
                metric_name: name,
                metric: value,
                iterations: iters,
                wall_time_seconds: Some(wall),
            })?;
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompareConfig<T = f64> {
    /// `W₁` entries are drawn uniformly from `[w_lo, w_hi]`.
    pub w_lo: T,
    pub w_hi: T,
    pub stop: StoppingCriteria<T>,
    pub em: EmConfig<T>,
    pub seed: u64,
}

impl<T: Scalar> Default for CompareConfig<T> {
    fn default() -> Self {
        Self {
            w_lo: T::of(50.0),
            w_hi: T::of(1000.0),
            stop: StoppingCriteria {
                epsilon: T::of(1e-10),
                max_iter: 2500,
            },
            em: EmConfig {
                max_iter: 2500,
                ..EmConfig::default()
            },
            seed: 0,
        }
    }
}

/// Runs WLR, EM, ALS (only when `k = 0`) and the constrained closed form
/// `ghs` for every rank in `r_list`.
///
/// Metrics: `rmse_a` against the data and `rmse_ag` against `A_G`. One `W₁`
/// draw is shared by every rank; with `k = 0` there are no weights.
pub fn compare_solvers<T: Scalar>(
    a: &Matrix<T>,
    k: usize,
    r_list: &[usize],
    cfg: &CompareConfig<T>,
) -> Result<SweepResult<T>> {
    let (m, n) = a.shape();
    if r_list.is_empty() {
        return Err(Error::invalid("rank list is empty"));
    }
    if let Some(&bad) = r_list.iter().find(|&&r| r < k || r > m.min(n)) {
        return Err(Error::RankOutOfRange {
            rank: bad,
            min: k,
            max: m.min(n),
        });
    }
    if !(cfg.w_lo > T::zero()) || cfg.w_hi < cfg.w_lo {
        return Err(Error::invalid("0 < w_lo <= w_hi required"));
    }
    cfg.stop.validate()?;
    let (a1, a2) = a.split_cols(k)?;
    let w1: Matrix<T> = GaussianRng::new(cfg.seed.wrapping_add(WEIGHT_SEED_OFFSET)).uniform_matrix(
        m,
        k,
        cfg.w_lo.to_f64_lossy(),
        cfg.w_hi.to_f64_lossy(),
    );
    let opts = SolveOptions {
        stop: cfg.stop,
        diagnostics: false,
    };
    let mut out = SweepResult::default();
    for &r in r_list {
        let param = T::of_usize(r);
        let mut record = |solver: &'static str, x: &Matrix<T>, ag: &Matrix<T>, iters, wall| {
            for (name, value) in [("rmse_a", rmse(a, x)), ("rmse_ag", rmse(ag, x))] {
                out.push(SweepRow {
                    sweep_parameter: param,
                    solver,
                    metric_name: name,
                    metric: value?,
                    iterations: iters,
                    wall_time_seconds: Some(wall),
                })?;
            }
            Ok::<_, Error>(())
        };

        let t = Instant::now();
        let ag = solve_ghs(&a1, &a2, r)?.assembled();
        record("ghs", &ag.clone(), &ag, 0, t.elapsed().as_secs_f64())?;

        let t = Instant::now();
        let prob = WlrProblem::new(a1.clone(), a2.clone(), w1.clone(), r)?;
        let init = WlrState::random_init(&prob, cfg.seed.wrapping_add(INIT_SEED_OFFSET))?;
        let wlr = solve(&prob, init, &opts)?;
        record(
            "wlr",
            &wlr.state.approximation(),
            &ag,
            wlr.iterations,
            t.elapsed().as_secs_f64(),
        )?;

        let t = Instant::now();
        let em = em_solve(a, &w1, r, &cfg.em)?;
        record("em", &em.x, &ag, em.iterations, t.elapsed().as_secs_f64())?;

        if k == 0 {
            let t = Instant::now();
            let als_cfg = AlsConfig {
                max_iter: cfg.stop.max_iter,
                tol: cfg.stop.epsilon,
                seed: cfg.seed.wrapping_add(INIT_SEED_OFFSET),
            };
            let als = als_solve(a, r, &als_cfg)?;
            record(
                "als",
                &als.approximation(),
                &ag,
                als.iterations,
                t.elapsed().as_secs_f64(),
            )?;
        }
    }
    Ok(out)
}

/// Per-sweep convergence of one WLR run.
///
/// Metrics per iteration `p`: `relative_change` = `Error_p / ‖A_p‖_F` and,
/// when `W₁` is constant, `distance_to_closed_form` =
/// `‖A_{p+1} − X_SVD‖_F / ‖X_SVD‖_F`.
pub fn convergence_trace<T: Scalar>(
    prob: &WlrProblem<T>,
    init: WlrState<T>,
    stop: &StoppingCriteria<T>,
) -> Result<SweepResult<T>> {
    let reference = match prob.uniform_weight() {
        Some(lambda) => {
            let (x1, x2) = solve_uniform_penalized(prob.a1(), prob.a2(), lambda, prob.r())?;
            Some(x1.hstack(&x2)?)
        }
        None if prob.k() == 0 => Some(crate::linalg::hard_threshold(prob.a2(), prob.r())?),
        None => None,
    };
    let ref_norm = reference.as_ref().map(|x| x.frobenius_norm());
    let mut prev_norm = init.approximation().frobenius_norm();
    let mut distances = Vec::new();
    let mut norms = Vec::new();
    let opts = SolveOptions {
        stop: *stop,
        diagnostics: false,
    };
    let rep = solve_observed(prob, init, &opts, |s, _| {
        let approx = s.approximation();
        norms.push(prev_norm);
        prev_norm = approx.frobenius_norm();
        if let (Some(x), Some(nx)) = (&reference, ref_norm) {
            let d = (&approx - x).frobenius_norm();
            distances.push(if nx > T::zero() { d / nx } else { d });
        }
    })?;
    let mut out = SweepResult::default();
    for (p, (&change, &norm)) in rep.error_trace.iter().zip(&norms).enumerate() {
        let rel = if norm > T::zero() {
            change / norm
        } else {
            change
        };
        out.push(SweepRow {
            sweep_parameter: T::of_usize(p),
            solver: "wlr",
            metric_name: "relative_change",
            metric: rel,
            iterations: p + 1,
            wall_time_seconds: None,
        })?;
        if let Some(&d) = distances.get(p) {
            out.push(SweepRow {
                sweep_parameter: T::of_usize(p),
                solver: "wlr",
                metric_name: "distance_to_closed_form",
                metric: d,
                iterations: p + 1,
                wall_time_seconds: None,
            })?;
        }
    }
    Ok(out)
}
