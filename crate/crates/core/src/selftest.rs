//! Invariant suites that can be run on demand against fresh random instances.
//!
//! Each suite draws `trials` problems from the seeded generator, checks one
//! identity or inequality per trial and reports the worst violation relative
//! to its tolerance. `inject_fault` corrupts the quantity under test so a
//! caller can confirm that the checks are able to fail.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ghs::{select_rank_from_tau, solve_ghs};
use crate::linalg::{hard_threshold, singular_values, svd, ColumnSpace};
use crate::matrix::Matrix;
use crate::synth::GaussianRng;
use crate::wlr::{
    gradients, objective, solve, SolveOptions, StoppingCriteria, WlrProblem, WlrState,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Descent,
    EckartYoung,
    Projection,
    Gradient,
    RankRule,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Descent,
        Suite::EckartYoung,
        Suite::Projection,
        Suite::Gradient,
        Suite::RankRule,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Descent => "descent",
            Suite::EckartYoung => "eckart-young",
            Suite::Projection => "projection",
            Suite::Gradient => "gradient",
            Suite::RankRule => "rank-rule",
        }
    }

    /// Tolerance the suite's normalised violation is compared against.
    pub fn tolerance(self) -> f64 {
        match self {
            Suite::Descent => 1e-8,
            Suite::EckartYoung => 1e-8,
            Suite::Projection => 1e-10,
            Suite::Gradient => 1e-5,
            Suite::RankRule => 0.5,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SelftestConfig {
    pub trials: usize,
    pub seed: u64,
    pub inject_fault: bool,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self {
            trials: 20,
            seed: 0,
            inject_fault: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub trials: usize,
    pub failures: usize,
    /// Largest measured violation; compare with `suite.tolerance()`.
    pub worst: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {}/{} trials ok, worst {:.3e} (tol {:.0e})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite,
            self.trials - self.failures,
            self.trials,
            self.worst,
            self.suite.tolerance()
        )
    }
}

fn pick(rng: &mut GaussianRng, lo: usize, hi: usize) -> usize {
    let span = (hi - lo + 1) as f64;
    lo + ((rng.uniform() * span) as usize).min(hi - lo)
}

pub fn run_suite(suite: Suite, cfg: &SelftestConfig) -> Result<SuiteReport> {
    if cfg.trials == 0 {
        return Err(Error::invalid("trials >= 1 required"));
    }
    let mut rng = GaussianRng::new(cfg.seed ^ (suite as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.trials {
        let v = match suite {
            Suite::Descent => descent_trial(&mut rng, cfg.inject_fault)?,
            Suite::EckartYoung => eckart_young_trial(&mut rng, cfg.inject_fault)?,
            Suite::Projection => projection_trial(&mut rng, cfg.inject_fault)?,
            Suite::Gradient => gradient_trial(&mut rng, cfg.inject_fault)?,
            Suite::RankRule => rank_rule_trial(&mut rng, cfg.inject_fault)?,
        };
        if !(v <= suite.tolerance()) {
            failures += 1;
        }
        worst = if v.is_nan() { f64::NAN } else { worst.max(v) };
    }
    Ok(SuiteReport {
        suite,
        trials: cfg.trials,
        failures,
        worst,
    })
}

pub fn run_suites(suites: &[Suite], cfg: &SelftestConfig) -> Result<Vec<SuiteReport>> {
    suites.iter().map(|&s| run_suite(s, cfg)).collect()
}

fn random_problem(rng: &mut GaussianRng, max_dim: usize, w_hi: f64) -> Result<WlrProblem> {
    let m = pick(rng, 4, max_dim);
    let n = pick(rng, 3, max_dim);
    let k = pick(rng, 1, (n - 1).min(m - 1).min(5));
    let r = pick(rng, k, m.min(n).min(k + 6));
    let a: Matrix = rng.normal_matrix(m, n);
    let (a1, a2) = a.split_cols(k)?;
    let w1 = rng.uniform_matrix(m, k, 1.0, w_hi);
    WlrProblem::new(a1, a2, w1, r)
}

/// Worst `|Σdᵢ − (m_p − m_{p+1})| / max(1, m_p)` over one run, plus any
/// monotonicity breach.
fn descent_trial(rng: &mut GaussianRng, fault: bool) -> Result<f64> {
    let prob = random_problem(rng, 30, 1000.0)?;
    let init = WlrState::random_init(&prob, rng.uniform().to_bits())?;
    let opts = SolveOptions {
        stop: StoppingCriteria {
            epsilon: 1e-12,
            max_iter: 100,
        },
        diagnostics: true,
    };
    let rep = solve(&prob, init, &opts)?;
    let mut worst: f64 = 0.0;
    for d in &rep.diagnostics {
        let mut total = d.descent.total();
        if fault {
            total += 1e-3 * d.descent.m_p.max(1.0);
        }
        let gap = (d.descent.decrease() - total).abs() / d.descent.m_p.max(1.0);
        let rise = (d.descent.m_next - d.descent.m_p - 1e-10).max(0.0);
        worst = worst.max(gap).max(rise);
    }
    Ok(worst)
}

/// Truncation error against the SVD tail, and the constrained residual
/// against the tail of the projected block.
fn eckart_young_trial(rng: &mut GaussianRng, fault: bool) -> Result<f64> {
    let m = pick(rng, 3, 20);
    let n = pick(rng, 3, 20);
    let a: Matrix = rng.normal_matrix(m, n);
    let r = pick(rng, 0, m.min(n));
    let s = singular_values(&a)?;
    let tail: f64 = s[r..].iter().map(|x| x * x).sum();
    let mut err = (&a - &hard_threshold(&a, r)?).frobenius_norm_sq();
    if fault {
        err = err * 1.01 + 1e-3;
    }
    let scale = a.frobenius_norm_sq();
    let mut worst = (err - tail).abs() / scale;

    let k = pick(rng, 0, (n - 1).min(3));
    let rr = pick(rng, k, m.min(n));
    let (a1, a2) = a.split_cols(k)?;
    let sol = solve_ghs(&a1, &a2, rr)?;
    let ptail: f64 = sol.projected_sigma[rr - k..].iter().map(|x| x * x).sum();
    worst = worst.max((sol.objective - ptail).abs() / scale);
    Ok(worst)
}

/// `‖P_B − P_B̃‖_F ≤ 2‖B − B̃‖_F / σ_min(B̃)`; returns the relative excess
/// of the left side over the bound (zero when the bound holds).
fn projection_trial(rng: &mut GaussianRng, fault: bool) -> Result<f64> {
    let m = pick(rng, 3, 20);
    let p = pick(rng, 1, m - 1);
    let b: Matrix = rng.normal_matrix(m, p);
    let e: Matrix = rng.normal_matrix(m, p);
    let size = 10f64.powf(rng.uniform_in(-6.0, -1.0));
    let e = e.scale(size / e.frobenius_norm());
    let bt = &b + &e;
    let lhs =
        (&ColumnSpace::new(&b)?.projector() - &ColumnSpace::new(&bt)?.projector()).frobenius_norm();
    let eta = *svd(&bt)?.sigma.last().expect("p >= 1");
    let mut bound = 2.0 * e.frobenius_norm() / eta;
    if fault {
        bound *= 1e-3;
    }
    Ok(((lhs - bound) / bound).max(0.0))
}

/// Largest relative difference between analytic and central-difference
/// gradients across the four blocks.
fn gradient_trial(rng: &mut GaussianRng, fault: bool) -> Result<f64> {
    let a: Matrix = rng.normal_matrix(5, 5);
    let k = pick(rng, 1, 3);
    let r = pick(rng, k, 4);
    let (a1, a2) = a.split_cols(k)?;
    let w1 = rng.uniform_matrix(5, k, 1.0, 10.0);
    let prob = WlrProblem::new(a1, a2, w1, r)?;
    let mut st = WlrState::random_init(&prob, rng.uniform().to_bits())?;
    st.c = rng.normal_matrix(k, 5 - k);
    st.b = rng.normal_matrix(5, r - k);
    let mut g = gradients(&prob, &st)?;
    if fault {
        g.x1 = g.x1.scale(1.01);
    }
    let mut worst: f64 = 0.0;
    for block in 0..4 {
        let analytic = [&g.x1, &g.c, &g.b, &g.d][block];
        let (rows, cols) = analytic.shape();
        let mut fd = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let probe = |delta: f64| -> Result<f64> {
                    let mut s = st.clone();
                    block_mut(&mut s, block)[(i, j)] += delta;
                    objective(&prob, &s)
                };
                let base = block_mut(&mut st.clone(), block)[(i, j)];
                let h = 1e-5 * base.abs().max(1.0);
                fd[(i, j)] = (probe(h)? - probe(-h)?) / (2.0 * h);
            }
        }
        let norm = analytic.frobenius_norm().max(fd.frobenius_norm());
        if norm > 0.0 {
            worst = worst.max((analytic - &fd).frobenius_norm() / norm);
        }
    }
    Ok(worst)
}

fn block_mut(s: &mut WlrState, block: usize) -> &mut Matrix {
    match block {
        0 => &mut s.x1,
        1 => &mut s.c,
        2 => &mut s.b,
        _ => &mut s.d,
    }
}

/// 0 when the threshold rule matches the brute-force minimiser of
/// `Σ_{i>r} σᵢ² + τr` (ties at a boundary are skipped), 1 otherwise.
fn rank_rule_trial(rng: &mut GaussianRng, fault: bool) -> Result<f64> {
    let len = pick(rng, 1, 15);
    let mut s: Vec<f64> = (0..len).map(|_| rng.normal().exp()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    let tau = rng.uniform_in(1e-3, 1.2) * s[0] * s[0];
    let sel = select_rank_from_tau(&s, tau)?;
    if sel.boundary_tie {
        return Ok(0.0);
    }
    let cost = |r: usize| s[r..].iter().map(|x| x * x).sum::<f64>() + tau * r as f64;
    let brute = (0..=len)
        .min_by(|&a, &b| cost(a).total_cmp(&cost(b)))
        .expect("non-empty range");
    let got = if fault { sel.rank + 1 } else { sel.rank };
    Ok(if got == brute { 0.0 } else { 1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes_on_fresh_seeds() {
        for seed in [1, 2] {
            let cfg = SelftestConfig {
                trials: 8,
                seed,
                inject_fault: false,
            };
            for rep in run_suites(&Suite::ALL, &cfg).unwrap() {
                assert!(rep.passed(), "{rep}");
            }
        }
    }

    #[test]
    fn injected_fault_is_caught_by_every_suite() {
        let cfg = SelftestConfig {
            trials: 8,
            seed: 3,
            inject_fault: true,
        };
        for rep in run_suites(&Suite::ALL, &cfg).unwrap() {
            assert!(!rep.passed(), "{rep}");
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
        let cfg = SelftestConfig {
            trials: 0,
            ..SelftestConfig::default()
        };
        assert!(run_suite(Suite::Descent, &cfg).is_err());
    }
}
