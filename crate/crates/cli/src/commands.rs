use wlra::baselines::{als_solve, em_solve, AlsConfig, EmConfig};
use wlra::bench::{
    compare_solvers, convergence_trace, sweep_lambda, CompareConfig, SweepConfig, WeightMode,
};
use wlra::ghs::{solve_ghs, solve_rank_penalized_limit, solve_uniform_penalized};
use wlra::matrix::format_float;
use wlra::selftest::{run_suites, SelftestConfig, Suite};
use wlra::synth::{gen_conditioned, gen_low_rank_plus_noise, SpectrumSpec, SynthSpec};
use wlra::wlr::{report_csv, solve, SolveOptions, StoppingCriteria, WlrProblem, WlrState};
use wlra::Matrix;

use crate::args::*;
use crate::io::*;

fn split(a: &Matrix, k: usize) -> CliResult<(Matrix, Matrix)> {
    if k > a.cols() {
        return Err(CliError::invalid(format!(
            "k <= n required (k = {k}, n = {})",
            a.cols()
        )));
    }
    Ok(a.split_cols(k)?)
}

fn load_weights(w: &WeightArgs, m: usize, k: usize) -> CliResult<Matrix> {
    match (&w.weights, w.lambda) {
        (Some(path), _) => {
            let w1 = read_matrix(path)?;
            if w1.shape() != (m, k) {
                return Err(CliError::invalid(format!(
                    "weights must be {m}x{k}, got {}x{}",
                    w1.rows(),
                    w1.cols()
                )));
            }
            Ok(w1)
        }
        (None, Some(l)) if l > 0.0 && l.is_finite() => Ok(Matrix::filled(m, k, l)),
        (None, Some(l)) => Err(CliError::invalid(format!(
            "lambda > 0 required (lambda = {l})"
        ))),
        (None, None) => Err(CliError::invalid(
            "either --weights or --lambda is required",
        )),
    }
}

fn ghs_summary(objective: f64, gap: f64, unique: bool) -> String {
    format!(
        "objective={} spectral_gap={} unique={}",
        format_float(objective),
        format_float(gap),
        unique
    )
}

pub fn ghs(args: &GhsArgs) -> CliResult<()> {
    let a = read_matrix(&args.input.input)?;
    let (a1, a2) = split(&a, args.input.k)?;
    let sol = solve_ghs(&a1, &a2, args.r)?;
    emit_matrix(args.output.output.as_deref(), &sol.assembled())?;
    println!(
        "{}",
        ghs_summary(sol.objective, sol.spectral_gap, sol.unique)
    );
    Ok(())
}

pub fn ghs_penalized(args: &GhsPenalizedArgs) -> CliResult<()> {
    let a = read_matrix(&args.input.input)?;
    let (a1, a2) = split(&a, args.input.k)?;
    let sol = solve_rank_penalized_limit(&a1, &a2, args.tau)?;
    emit_matrix(args.output.output.as_deref(), &sol.solution.assembled())?;
    println!(
        "{} r_star={} boundary_tie={}",
        ghs_summary(
            sol.solution.objective,
            sol.solution.spectral_gap,
            sol.solution.unique
        ),
        sol.r_star,
        sol.boundary_tie
    );
    Ok(())
}

pub fn wlr(args: &WlrArgs) -> CliResult<()> {
    let a = read_matrix(&args.input.input)?;
    let (a1, a2) = split(&a, args.input.k)?;
    let w1 = load_weights(&args.weights, a.rows(), args.input.k)?;
    let stop = StoppingCriteria {
        epsilon: args.epsilon,
        max_iter: args.max_iter,
    };
    stop.validate()?;
    let prob = WlrProblem::new(a1, a2, w1, args.r)?;
    println!(
        "# wlr m={} n={} k={} r={} epsilon={:e} max_iter={} seed={}",
        prob.m(),
        prob.n(),
        prob.k(),
        prob.r(),
        args.epsilon,
        args.max_iter,
        args.seed
    );
    let init = WlrState::random_init(&prob, args.seed)?;
    let opts = SolveOptions {
        stop,
        diagnostics: args.diagnostics,
    };
    let rep = solve(&prob, init, &opts)?;
    if let Some(path) = &args.trace {
        write_atomic(path, &report_csv(&rep))?;
    }
    emit_matrix(args.output.output.as_deref(), &rep.state.approximation())?;
    let s = rep.stationarity;
    println!(
        "objective={} iterations={} stop={} stationarity={},{},{},{} fallbacks={}",
        format_float(rep.objective()),
        rep.iterations,
        rep.stop_reason,
        format_float(s[0]),
        format_float(s[1]),
        format_float(s[2]),
        format_float(s[3]),
        rep.fallbacks.len()
    );
    Ok(())
}

pub fn em(args: &EmArgs) -> CliResult<()> {
    let a = read_matrix(&args.input.input)?;
    if args.input.k > a.cols() {
        return Err(CliError::invalid(format!(
            "k <= n required (k = {}, n = {})",
            args.input.k,
            a.cols()
        )));
    }
    let w1 = load_weights(&args.weights, a.rows(), args.input.k)?;
    let cfg = EmConfig {
        max_iter: args.max_iter,
        tol: args.tol,
        weight_floor_eps: args.weight_floor_eps,
    };
    let rep = em_solve(&a, &w1, args.r, &cfg)?;
    emit_matrix(args.output.output.as_deref(), &rep.x)?;
    println!(
        "weighted_objective={} iterations={} stop={} zero_start={}",
        format_float(
            rep.objective_trace
                .last()
                .copied()
                .unwrap_or(rep.initial_objective)
        ),
        rep.iterations,
        rep.stop_reason,
        rep.zero_start
    );
    Ok(())
}

pub fn als(args: &AlsArgs) -> CliResult<()> {
    let a = read_matrix(&args.input)?;
    let cfg = AlsConfig {
        max_iter: args.max_iter,
        tol: args.tol,
        seed: args.seed,
    };
    let rep = als_solve(&a, args.r, &cfg)?;
    emit_matrix(args.output.output.as_deref(), &rep.approximation())?;
    println!(
        "objective={} iterations={} stop={}",
        format_float(rep.objective_trace.last().copied().unwrap_or(0.0)),
        rep.iterations,
        rep.stop_reason
    );
    Ok(())
}

pub fn uniform_svd(args: &UniformSvdArgs) -> CliResult<()> {
    let a = read_matrix(&args.input.input)?;
    let (a1, a2) = split(&a, args.input.k)?;
    if args.r < args.input.k {
        return Err(CliError::invalid(format!(
            "r >= k required (r = {}, k = {})",
            args.r, args.input.k
        )));
    }
    let (x1, x2) = solve_uniform_penalized(&a1, &a2, args.lambda, args.r)?;
    let obj = wlra::ghs::uniform_penalized_objective(&a1, &a2, args.lambda, &x1, &x2);
    emit_matrix(args.output.output.as_deref(), &x1.hstack(&x2)?)?;
    println!("objective={}", format_float(obj));
    Ok(())
}

fn bench_data(d: &DataArgs, default_rank: usize) -> CliResult<Matrix> {
    if let Some(path) = &d.input {
        return read_matrix(path);
    }
    if let Some(kappa) = d.kappa {
        let spec = SpectrumSpec::geometric(d.m, d.n, 20, 10, kappa, d.seed)?;
        return Ok(gen_conditioned(&spec)?);
    }
    let spec = SynthSpec {
        m: d.m,
        n: d.n,
        true_rank: d.true_rank.unwrap_or(default_rank),
        noise_factor: d.noise,
        seed: d.seed,
    };
    Ok(gen_low_rank_plus_noise(&spec)?)
}

pub fn sweep(args: &SweepLambdaArgs) -> CliResult<()> {
    let lambdas = parse_range(&args.lambdas)?;
    if lambdas.is_empty() {
        return Err(CliError::invalid("lambda list is empty"));
    }
    let mut data = args.data.clone();
    let (mut k, mut r) = (args.k, args.r);
    if args.full {
        (data.m, data.n, k, r) = (500, 500, 50, 70);
    }
    let a = bench_data(&data, r)?;
    let (a1, a2) = split(&a, k)?;
    let cfg = SweepConfig {
        trials: args.trials,
        mode: match args.mode {
            ModeArg::Uniform => WeightMode::Uniform,
            ModeArg::Interval => WeightMode::Interval,
        },
        stop: StoppingCriteria {
            epsilon: args.epsilon,
            max_iter: args.max_iter,
        },
        seed: data.seed,
    };
    let res = sweep_lambda(&a1, &a2, r, &lambdas, &cfg)?;
    emit_text(args.output.as_deref(), &res.to_csv(args.timings))
}

pub fn compare(args: &CompareArgs) -> CliResult<()> {
    let ranks = parse_rank_range(&args.r)?;
    if ranks.is_empty() {
        return Err(CliError::invalid("rank list is empty"));
    }
    let a = bench_data(&args.data, *ranks.iter().max().expect("non-empty"))?;
    let cfg = CompareConfig {
        w_lo: args.w_lo,
        w_hi: args.w_hi,
        stop: StoppingCriteria {
            epsilon: args.epsilon,
            max_iter: args.max_iter,
        },
        em: EmConfig {
            max_iter: args.em_max_iter,
            ..EmConfig::default()
        },
        seed: args.data.seed,
    };
    let res = compare_solvers(&a, args.k, &ranks, &cfg)?;
    emit_text(args.output.as_deref(), &res.to_csv(args.timings))
}

pub fn trace(args: &TraceArgs) -> CliResult<()> {
    let a = bench_data(&args.data, args.r)?;
    let (a1, a2) = split(&a, args.k)?;
    let prob = WlrProblem::uniform(a1, a2, args.lambda, args.r)?;
    let init = WlrState::random_init(&prob, args.data.seed)?;
    let stop = StoppingCriteria {
        epsilon: args.epsilon,
        max_iter: args.max_iter,
    };
    let res = convergence_trace(&prob, init, &stop)?;
    emit_text(args.output.as_deref(), &res.to_csv(false))
}

pub fn selftest(args: &SelftestArgs) -> CliResult<()> {
    let suites = if args.suite.is_empty() {
        Suite::ALL.to_vec()
    } else {
        args.suite
            .iter()
            .map(|s| s.parse::<Suite>())
            .collect::<Result<Vec<_>, _>>()?
    };
    let cfg = SelftestConfig {
        trials: args.trials,
        seed: args.seed,
        inject_fault: args.inject_fault,
    };
    let reports = run_suites(&suites, &cfg)?;
    for rep in &reports {
        println!("{rep}");
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    if failed > 0 {
        return Err(CliError::Numerical(format!("{failed} suite(s) failed")));
    }
    Ok(())
}

pub fn convert(args: &ConvertArgs) -> CliResult<()> {
    let m = read_matrix(&args.input)?;
    let csv = match args.to {
        Some(FormatArg::Csv) => true,
        Some(FormatArg::Text) => false,
        None => output_is_csv(&args.output),
    };
    write_atomic(&args.output, &matrix_bytes(&m, csv))
}
