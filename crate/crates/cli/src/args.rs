use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "erline", version, about = "Entropy and ensemble equivalence near the Erdős–Rényi line")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Bernoulli entropy, its derivatives and the quotient function.
    Entropy(EntropyArgs),
    /// Scaled entropy curves against their asymptotic predictions.
    Curve(CurveArgs),
    /// Optimal two-step perturbation for an (edge, triangle) target.
    Solve(SolveArgs),
    /// Exact enumeration for small n.
    Exact(ExactArgs),
    /// Metropolis sampling of the edge-triangle exponential random graph.
    Mcmc(McmcArgs),
    /// Multipliers matching target densities.
    Calibrate(CalibrateArgs),
    /// Equivalence classification of constraint pairs.
    Classify(ClassifyArgs),
    /// Run a list of commands from a TOML file.
    Batch(BatchArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output if absent.
    #[arg(long, short)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EntropyArgs {
    /// Arguments of I and its derivatives.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub u: Vec<f64>,
    /// Derivative orders for `--u`; 0 is I itself.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub k: Vec<u32>,
    /// Edge densities for the quotient function.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub t1: Vec<f64>,
    /// Offsets x for the quotient function at each `--t1`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Vec<f64>,
    /// Minimise the quotient over x for each `--t1`.
    #[arg(long)]
    pub fmin: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SideArg {
    Below,
    Above,
}

impl From<SideArg> for erline::Side {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::Below => erline::Side::Below,
            SideArg::Above => erline::Side::Above,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CurveArgs {
    #[arg(long, value_enum, default_value_t = SideArg::Below)]
    pub side: SideArg,
    /// Edge densities; defaults to 0.5,0.6,0.7,0.8 below and 0.55,0.6,0.7,0.8 above.
    #[arg(long, value_delimiter = ',')]
    pub t1: Vec<f64>,
    /// Perturbation sizes, each in (0, 0.1]; defaults to 7 log-spaced points on [1e-6, 1e-3].
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    /// Reduced below the line, exact constraints elsewhere.
    Auto,
    Exact,
    Reduced,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolveArgs {
    #[arg(long)]
    pub t1: f64,
    /// Target triangle density.
    #[arg(long)]
    pub t2: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExactArgs {
    #[arg(long)]
    pub n: usize,
    /// Edge count constraint; needs `--triangles`.
    #[arg(long, requires = "triangles", conflicts_with_all = ["theta1", "theta2"])]
    pub edges: Option<u64>,
    #[arg(long, requires = "edges")]
    pub triangles: Option<u64>,
    /// Canonical multipliers; prints the partition function and means.
    #[arg(long, requires = "theta2", allow_negative_numbers = true)]
    pub theta1: Option<f64>,
    #[arg(long, requires = "theta1", allow_negative_numbers = true)]
    pub theta2: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Accepts plain integers and integral floats such as `1e6`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v >= 0.0 && v.fract() == 0.0 && v < 1.8e19 {
        Ok(v as u64)
    } else {
        Err(format!("{s:?} is not a non-negative integer"))
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct McmcArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub theta1: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub theta2: f64,
    /// Proposals per chain after burn-in.
    #[arg(long, value_parser = parse_count)]
    pub steps: u64,
    #[arg(long)]
    pub seed: u64,
    /// Defaults to 10·n² proposals.
    #[arg(long, value_parser = parse_count)]
    pub burn_in: Option<u64>,
    #[arg(long, default_value_t = 32)]
    pub batches: usize,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    /// Exact for n ≤ 7, sampling otherwise.
    Auto,
    Exact,
    Mcmc,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub n: usize,
    /// Target edge homomorphism density.
    #[arg(long, requires = "t3", conflicts_with_all = ["edges", "triangles"])]
    pub t1: Option<f64>,
    /// Target triangle homomorphism density.
    #[arg(long, requires = "t1")]
    pub t3: Option<f64>,
    /// Target as an edge count; needs `--triangles`.
    #[arg(long, requires = "triangles")]
    pub edges: Option<u64>,
    #[arg(long, requires = "edges")]
    pub triangles: Option<u64>,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    /// Required for sampling-based calibration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Robbins–Monro iterations.
    #[arg(long, default_value_t = 400)]
    pub iterations: usize,
    /// Proposals per Robbins–Monro sweep; defaults to max(n(n−1), 2000).
    #[arg(long, value_parser = parse_count)]
    pub sweep_steps: Option<u64>,
    /// Proposals in each verification run.
    #[arg(long, value_parser = parse_count)]
    pub final_steps: Option<u64>,
    /// Acceptance tolerance on the sampled mean residuals.
    #[arg(long, default_value_t = 5e-3)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClassifyArgs {
    /// Edge densities, paired element-wise with `--t2`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub t1: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub t2: Vec<f64>,
    /// Classify the (g+1)×(g+1) grid on the unit square instead.
    #[arg(long, conflicts_with_all = ["t1", "t2"])]
    pub grid: Option<usize>,
    /// Tolerance for membership of the line and the boundaries.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BatchArgs {
    /// TOML file with an optional `output_dir` and `[[run]]` tables holding `name` and `args`.
    #[arg(long)]
    pub config: PathBuf,
}
