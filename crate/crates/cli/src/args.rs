use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

const AFTER_HELP: &str = "\
Matrix files use the plain text format (first line `rows cols`, then one
whitespace-separated row per line) unless the path ends in .csv.

Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 numerical failure.";

#[derive(Parser, Debug)]
#[command(name = "wlra", version, about, long_about = None, after_help = AFTER_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Best rank-r approximation that keeps the first k columns exactly
    Ghs(GhsArgs),
    /// Constrained solution with the rank chosen by a threshold tau
    GhsPenalized(GhsPenalizedArgs),
    /// Alternating solver for weights on the first k columns
    Wlr(WlrArgs),
    /// EM imputation baseline
    Em(EmArgs),
    /// Unweighted rank-r factorisation by alternating least squares
    Als(AlsArgs),
    /// Closed form for a constant weight lambda on the first k columns
    UniformSvd(UniformSvdArgs),
    /// Benchmark experiments, one CSV per run
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Run invariant suites on fresh random instances
    Selftest(SelftestArgs),
    /// Convert a matrix file between text and CSV
    Convert(ConvertArgs),
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Input matrix file
    #[arg(short, long)]
    pub input: PathBuf,
    /// Number of leading columns in the weighted block
    #[arg(short, long)]
    pub k: usize,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArg {
    /// Where to write the solution matrix (stdout when omitted)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GhsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Target rank, k <= r <= min(m, n)
    #[arg(short, long)]
    pub r: usize,
    #[command(flatten)]
    pub output: OutputArg,
}

#[derive(Args, Debug)]
pub struct GhsPenalizedArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Rank penalty; keeps singular values with sigma^2 > tau
    #[arg(long)]
    pub tau: f64,
    #[command(flatten)]
    pub output: OutputArg,
}

#[derive(Args, Debug, Clone)]
pub struct WeightArgs {
    /// Weight matrix for the first k columns (m x k, all entries > 0)
    #[arg(
        short,
        long,
        conflicts_with = "lambda",
        required_unless_present = "lambda"
    )]
    pub weights: Option<PathBuf>,
    /// Constant weight on the first k columns
    #[arg(short, long)]
    pub lambda: Option<f64>,
}

#[derive(Args, Debug)]
pub struct WlrArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Target rank, k <= r <= min(m, n)
    #[arg(short, long)]
    pub r: usize,
    #[command(flatten)]
    pub weights: WeightArgs,
    /// Stop when the change of the approximation (absolute or relative) drops below this
    #[arg(long, default_value = "1e-10")]
    pub epsilon: f64,
    /// Sweep limit
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Seed for the random starting factors
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Record the descent decomposition and gradient norms each sweep
    #[arg(long)]
    pub diagnostics: bool,
    /// Per-sweep trace CSV (needs --diagnostics for the descent columns)
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArg,
}

#[derive(Args, Debug)]
pub struct EmArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Target rank, r <= min(m, n)
    #[arg(short, long)]
    pub r: usize,
    #[command(flatten)]
    pub weights: WeightArgs,
    /// Stop when the iterate changes by less than this
    #[arg(long, default_value = "1e-10")]
    pub tol: f64,
    /// Iteration limit
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    /// Start from zero when the smallest rescaled weight is at or below this
    #[arg(long, default_value = "1e-3")]
    pub weight_floor_eps: f64,
    #[command(flatten)]
    pub output: OutputArg,
}

#[derive(Args, Debug)]
pub struct AlsArgs {
    /// Input matrix file
    #[arg(short, long)]
    pub input: PathBuf,
    /// Target rank, r <= min(m, n)
    #[arg(short, long)]
    pub r: usize,
    /// Stop when the approximation changes by less than this
    #[arg(long, default_value = "1e-10")]
    pub tol: f64,
    /// Iteration limit
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Seed for all random draws
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArg,
}

#[derive(Args, Debug)]
pub struct UniformSvdArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Target rank, k <= r <= min(m, n)
    #[arg(short, long)]
    pub r: usize,
    /// Constant weight on the first k columns
    #[arg(short, long)]
    pub lambda: f64,
    #[command(flatten)]
    pub output: OutputArg,
}

#[derive(Subcommand, Debug)]
pub enum BenchCommand {
    /// Distance to the constrained solution as the weight grows
    SweepLambda(SweepLambdaArgs),
    /// RMSE of WLR, EM, ALS and the closed form over a rank range
    Compare(CompareArgs),
    /// Per-sweep convergence of one WLR run
    Trace(TraceArgs),
}

#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    /// Use this matrix instead of generating one
    #[arg(short, long)]
    pub input: Option<PathBuf>,
    /// Rows of the generated matrix
    #[arg(long, default_value_t = 50)]
    pub m: usize,
    /// Columns of the generated matrix
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    /// Rank of the noiseless part (defaults to r, or the largest r in a list)
    #[arg(long)]
    pub true_rank: Option<usize>,
    /// Noise level relative to the largest noiseless entry
    #[arg(long, default_value_t = 0.2)]
    pub noise: f64,
    /// Instead of low rank plus noise, use 20 geometric then 10 repeated
    /// singular values with this condition number
    #[arg(long)]
    pub kappa: Option<f64>,
    /// All randomness derives from this seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// W1 = lambda everywhere
    Uniform,
    /// W1 entries drawn from [lambda, lambda + 20]
    Interval,
}

#[derive(Args, Debug)]
pub struct SweepLambdaArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Weight values as a:step:b (inclusive) or a comma list
    #[arg(long, default_value = "1:50:1000")]
    pub lambdas: String,
    /// Number of leading columns in the weighted block
    #[arg(short, long, default_value_t = 3)]
    pub k: usize,
    /// Target rank
    #[arg(short, long, default_value_t = 6)]
    pub r: usize,
    /// How W1 is built from each weight value
    #[arg(long, value_enum, default_value_t = ModeArg::Uniform)]
    pub mode: ModeArg,
    /// Runs averaged per weight value
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// WLR stopping threshold on the change per sweep
    #[arg(long, default_value = "1e-7")]
    pub epsilon: f64,
    /// Iteration limit
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// Large instance: 500 x 500 with r = 70, k = 50
    #[arg(long)]
    pub full: bool,
    /// Add a wall_time_seconds column (breaks byte-for-byte reproducibility)
    #[arg(long)]
    pub timings: bool,
    /// CSV destination (stdout when omitted)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Number of leading columns in the weighted block
    #[arg(short, long, default_value_t = 10)]
    pub k: usize,
    /// Ranks as a:step:b (inclusive) or a comma list
    #[arg(short, long, default_value = "20:1:30")]
    pub r: String,
    /// Lower end of the W1 entry range
    #[arg(long, default_value_t = 50.0)]
    pub w_lo: f64,
    /// Upper end of the W1 entry range
    #[arg(long, default_value_t = 1000.0)]
    pub w_hi: f64,
    /// WLR stopping threshold on the change per sweep
    #[arg(long, default_value = "1e-10")]
    pub epsilon: f64,
    /// Iteration limit
    #[arg(long, default_value_t = 2500)]
    pub max_iter: usize,
    /// Iteration limit for EM
    #[arg(long, default_value_t = 2500)]
    pub em_max_iter: usize,
    /// Add a wall_time_seconds column (breaks byte-for-byte reproducibility)
    #[arg(long)]
    pub timings: bool,
    /// CSV destination (stdout when omitted)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TraceArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Number of leading columns in the weighted block
    #[arg(short, long, default_value_t = 3)]
    pub k: usize,
    /// Target rank
    #[arg(short, long, default_value_t = 6)]
    pub r: usize,
    /// Constant weight; enables the distance-to-closed-form column
    #[arg(short, long, default_value_t = 50.0)]
    pub lambda: f64,
    /// WLR stopping threshold on the change per sweep
    #[arg(long, default_value = "1e-12")]
    pub epsilon: f64,
    /// Iteration limit
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    /// CSV destination (stdout when omitted)
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SelftestArgs {
    /// Run only this suite (repeatable): descent, eckart-young, projection,
    /// gradient, rank-rule
    #[arg(long)]
    pub suite: Vec<String>,
    /// Random instances per suite
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Seed for all random draws
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Corrupt every checked quantity (negative control)
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Csv,
}

#[derive(Args, Debug)]
pub struct ConvertArgs {
    /// Input matrix file
    #[arg(short, long)]
    pub input: PathBuf,
    /// Output matrix file
    #[arg(short, long)]
    pub output: PathBuf,
    /// Output format (inferred from the output extension when omitted)
    #[arg(long, value_enum)]
    pub to: Option<FormatArg>,
}
