use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "robustfit", version, about = "Sparse polynomial recovery from dependent data with sparse outliers")]
pub struct Cli {
    /// Worker threads for sweeps and NSP certification [default: all cores].
    #[arg(long, global = true, env = "ROBUSTFIT_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a corrupted dataset and write it as CSV.
    Generate(GenerateArgs),
    /// Fit a sparse polynomial to a dataset CSV and write the solution as JSON.
    Solve(SolveArgs),
    /// Run a parameter sweep from a JSON config and write the report CSV and plot data.
    Experiment(ExperimentArgs),
    /// Evaluate the concentration condition and sample-size bounds; writes JSON.
    Bounds(BoundsArgs),
    /// Certify the null space property of a dense matrix CSV; writes JSON.
    Nsp(NspArgs),
    /// Run a reference experiment (1-4) into a fresh timestamped directory.
    Reproduce(ReproduceArgs),
}

/// Overrides of solver parameters. Unset flags keep the config value.
#[derive(Debug, Default, Args)]
pub struct SolverArgs {
    /// Weight of the corruption term in the objective.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Radius of the residual ball.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Douglas-Rachford step size.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Relative fixed-point residual at which iteration stops.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Magnitude at or below which an entry is outside the reported support.
    #[arg(long)]
    pub support_threshold: Option<f64>,
}

/// Overrides of trial configuration fields. Unset flags keep the config value.
#[derive(Debug, Default, Args)]
pub struct TrialArgs {
    /// Number of samples.
    #[arg(long)]
    pub m: Option<usize>,
    /// Number of corrupted rows.
    #[arg(long)]
    pub s_theta: Option<usize>,
    /// Corruption entries are uniform on [-H, H].
    #[arg(long)]
    pub magnitude: Option<f64>,
    /// Where corruption is applied.
    #[arg(long, value_enum)]
    pub corrupt: Option<TargetArg>,
    /// Amplitude of the sin(2 pi x1) model mismatch.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Law of the clean inputs.
    #[arg(long, value_enum)]
    pub generator: Option<GeneratorArg>,
    /// Entry bound for `--generator iid`.
    #[arg(long, default_value_t = 1.0)]
    pub bound: f64,
    /// Number of states for `--generator markov`.
    #[arg(long, default_value_t = 8)]
    pub states: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TargetArg {
    Inputs,
    Outputs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum GeneratorArg {
    Iid,
    AlphaMixing,
    Markov,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Trial configuration JSON (fields of a single trial; see README).
    #[arg(long, conflicts_with = "example")]
    pub config: Option<PathBuf>,
    /// Start from the base configuration of reference experiment N (default 1).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=4))]
    pub example: Option<u32>,
    #[command(flatten)]
    pub trial: TrialArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path [default: standard output].
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Dataset CSV as written by `generate`.
    #[arg(long)]
    pub data: PathBuf,
    /// Problem JSON: `{"p": 5, "normalize": true, "solver": {...}}`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dictionary degree.
    #[arg(long)]
    pub p: Option<u32>,
    /// Scale dictionary columns to unit norm before solving.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub normalize: Option<bool>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Output JSON path [default: standard output].
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Sweep JSON: `{"label", "base", "axis", "n_trials", "master_seed", "metric"}`.
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for `<label>.csv` and `<label>.dat`.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Trials per axis value.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fill the `wall_ms` column with measured times.
    #[arg(long)]
    pub timing: bool,
    /// Scale dictionary columns to unit norm before solving.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub normalize: Option<bool>,
    /// Dictionary degree.
    #[arg(long)]
    pub p: Option<u32>,
    #[command(flatten)]
    pub trial: TrialArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RegimeArg {
    Iid,
    AlphaMixing,
    CMixing,
    UniformlyErgodic,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Dependence regime of the concentration inequality.
    #[arg(long, value_enum, conflicts_with = "kappa_config")]
    pub regime: Option<RegimeArg>,
    /// KappaSpec JSON, e.g. `{"regime": "iid", "c2": 1, "c3": 1}`.
    #[arg(long)]
    pub kappa_config: Option<PathBuf>,
    /// Exponent delta in zeta = m^-delta.
    #[arg(long)]
    pub delta: f64,
    /// Dictionary size r.
    #[arg(long)]
    pub r: usize,
    /// Also evaluate the condition at this sample size.
    #[arg(long)]
    pub m: Option<u64>,

    /// Variance constant C2 (iid, alpha-mixing).
    #[arg(long, default_value_t = 1.0)]
    pub c2: f64,
    /// Range constant C3 (iid).
    #[arg(long, default_value_t = 1.0)]
    pub c3: f64,
    /// Mixing-rate prefactor (alpha-mixing).
    #[arg(long, default_value_t = 1.0)]
    pub alpha_bar: f64,
    /// Mixing-rate exponent (alpha-mixing, C-mixing).
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Mixing-rate constant (alpha-mixing).
    #[arg(long, default_value_t = 1.0)]
    pub c_alpha: f64,
    /// Range constant C0 (alpha-mixing).
    #[arg(long, default_value_t = 1.0)]
    pub c0: f64,
    /// Variance bound (C-mixing).
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Sup-norm bound (C-mixing, uniformly ergodic).
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Doeblin minorization constant in (0, 1] (uniformly ergodic).
    #[arg(long, default_value_t = 1.0)]
    pub lambda_doeblin: f64,
    /// Minorization step count (uniformly ergodic).
    #[arg(long, default_value_t = 1.0)]
    pub k0: f64,

    /// Constant D of the sample bounds; enables `m_nsp` and the related fields.
    #[arg(long)]
    pub d_const: Option<f64>,
    /// Bound on |x| for the sample bounds.
    #[arg(long, default_value_t = 1.0)]
    pub b_x: f64,
    /// Bound on |theta| for the sample bounds.
    #[arg(long, default_value_t = 0.0)]
    pub b_theta: f64,
    /// Sparsity s for the sample bounds.
    #[arg(long, default_value_t = 1)]
    pub s: usize,
    /// Dictionary degree for the sample bounds.
    #[arg(long, default_value_t = 1)]
    pub p: u32,
    /// Stability constant in (0, 1); adds `m_stable_nsp`.
    #[arg(long)]
    pub rho: Option<f64>,
}

#[derive(Debug, Args)]
pub struct NspArgs {
    /// Dense matrix CSV: one row per line, no header.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Sparsity order.
    #[arg(long)]
    pub s: usize,
    /// Output JSON path [default: standard output].
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Reference experiment number.
    #[arg(value_parser = clap::value_parser!(u32).range(1..=4))]
    pub n: u32,
    /// Trials per cell.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Experiment 3 only: sample 17.5% of the dictionary size instead of 50%.
    #[arg(long)]
    pub low_rate: bool,
    /// Fill the `wall_ms` column with measured times.
    #[arg(long)]
    pub timing: bool,
    /// Parent of the timestamped run directory.
    #[arg(long, default_value = "runs")]
    pub out_dir: PathBuf,
}
