mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Certified finite-stage constructions for `T_{n,λ}(f)(z) = λ^n f^(n)(λz)`.
#[derive(Parser, Debug)]
#[command(name = "hypercyc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Closed-form f with T_{m0,λ0}(f) = p.
    Solve(SolveArgs),
    /// Plan, build and verify one stage.
    Stage(StageArgs),
    /// Several stages, each on top of the previous f.
    Pipeline(PipelineArgs),
    /// CSV of certified and sampled errors over a λ grid.
    Sweep(SweepArgs),
    /// Equidistribution statistics of {θ k_n}.
    Weyl(WeylArgs),
    /// Transfer a positive-dilation witness to λ0 e^{2πiθ0}.
    Rotate(RotateArgs),
    /// Whether the coverage condition can be met for a sequence.
    Dichotomy(DichotomyArgs),
    /// Re-check a certificate against an f file.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// JSON artifact path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SolveArgs {
    #[arg(long)]
    pub m0: u64,
    /// Rational or decimal, e.g. `2`, `3/2`, `1.25`.
    #[arg(long)]
    pub lambda0: String,
    /// Target polynomial, e.g. `z`, `1+z`, `(1/2-3i)z^2`.
    #[arg(long)]
    pub p: String,
    /// Floating mode instead of exact rationals.
    #[arg(long)]
    pub float: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Optimized,
    Faithful,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct StageSpec {
    /// Radius index: the disk is |z| <= n0.
    #[arg(long, default_value_t = 1)]
    pub n0: u64,
    #[arg(long, default_value = "1.05")]
    pub rho: String,
    /// Target polynomial; overrides --target-index.
    #[arg(long)]
    pub p: Option<String>,
    /// Index j of the target in the fixed enumeration.
    #[arg(long, default_value_t = 49)]
    pub target_index: u64,
    #[arg(long, default_value_t = 10)]
    pub s0: u64,
    #[arg(long, default_value = "0.25")]
    pub eps1: String,
    #[arg(long, default_value = "n")]
    pub seq: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Optimized)]
    pub mode: ModeArg,
    /// Largest N0 the planner may reach.
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: u64,
    /// Override the default δ0.
    #[arg(long)]
    pub delta0: Option<String>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct StageArgs {
    #[command(flatten)]
    pub stage: StageSpec,
    /// Log-spaced verification points, on top of anchors and midpoints.
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
    /// Extra uniformly random verification points.
    #[arg(long, default_value_t = 0)]
    pub random: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write f as JSON.
    #[arg(long)]
    #[serde(skip)]
    pub f_out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PipelineArgs {
    #[arg(long, default_value_t = 1)]
    pub n0: u64,
    #[arg(long, default_value = "1.01")]
    pub rho: String,
    /// Comma-separated target indices, one stage each.
    #[arg(long, default_value = "1,49,57")]
    pub targets: String,
    #[arg(long, default_value_t = 10)]
    pub s0: u64,
    /// Explicit stages `n0:rho:j:s0`, separated by `;`. Overrides the above.
    #[arg(long)]
    pub schedule: Option<String>,
    #[arg(long, default_value = "n")]
    pub seq: String,
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: u64,
    #[arg(long, default_value_t = hypercyc::constructor::PIPELINE_OFFSET)]
    pub offset: u64,
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
    #[arg(long)]
    #[serde(skip)]
    pub f_out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SweepArgs {
    /// Certificate JSON from `stage`; built from the stage flags if absent.
    #[arg(long, requires = "f")]
    #[serde(skip)]
    pub cert: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub f: Option<PathBuf>,
    #[command(flatten)]
    pub stage: StageSpec,
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    /// Circle points for the sampled error.
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    /// CSV path; stdout if absent.
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct WeylArgs {
    /// `sqrt(D)±q`, `(sqrt(D)±q)/b`, a rational or a decimal.
    #[arg(long)]
    pub theta: String,
    #[arg(long, default_value = "n")]
    pub seq: String,
    #[arg(long = "N", default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub bins: usize,
    #[arg(long, default_value = "0.01")]
    pub tol: String,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RotateArgs {
    #[command(flatten)]
    pub stage: StageSpec,
    #[arg(long, default_value = "sqrt(2)-1")]
    pub theta: String,
    #[arg(long, default_value = "0.3")]
    pub eps0: String,
    #[arg(long, default_value = "1")]
    pub lambda0: String,
    /// Blocks added at λ0.
    #[arg(long, default_value_t = hypercyc::constructor::DEFAULT_LADDER_LEN)]
    pub ladder: usize,
    #[arg(long, default_value_t = hypercyc::constructor::DEFAULT_PERSISTENCE_OFFSET)]
    pub offset: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub search_cap: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct DichotomyArgs {
    #[arg(long)]
    pub seq: String,
    #[arg(long, default_value = "1.5")]
    pub rho: String,
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: u64,
    #[arg(long, default_value_t = 10)]
    pub s0: u64,
    #[arg(long, default_value = "0.25")]
    pub eps1: String,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    #[serde(skip)]
    pub cert: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub f: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
    #[arg(long, default_value_t = 0)]
    pub random: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("HC_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| commands::usage(format!("HC_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = init_threads().and_then(|_| commands::run(&cli.command));
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
