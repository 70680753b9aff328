use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "dhinf",
    version,
    about = "Robust H-infinity analysis and state-feedback synthesis for descriptor systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify admissibility and an H-infinity bound for every admissible uncertainty.
    Analyze(AnalyzeArgs),
    /// Compute a robust state-feedback gain and check it on sampled uncertainties.
    Synthesize(SynthArgs),
    /// Sample the uncertainty set and report admissibility and norms.
    Verify(VerifyArgs),
    /// Optimal gamma for a list of alpha values.
    SweepAlpha(SweepArgs),
    /// Synthesis on the built-in third-order benchmark plant.
    Demo(DemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Plant description in JSON.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Use the built-in benchmark plant.
    #[arg(long)]
    pub example: bool,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// JSON config file; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "solver.margin")]
    pub solver_margin: Option<f64>,
    #[arg(long = "solver.tol")]
    pub solver_tol: Option<f64>,
    /// Points of the uncertainty grid when s = 1.
    #[arg(long)]
    pub delta_grid: Option<usize>,
    /// Random uncertainty samples when s > 1.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GammaArgs {
    /// Fixed performance level.
    #[arg(long, conflicts_with = "minimize")]
    pub gamma: Option<f64>,
    /// Minimize gamma instead of fixing it.
    #[arg(long)]
    pub minimize: bool,
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub gamma: f64,
    /// Close the loop with this gain first (JSON matrix or a synthesis report).
    #[arg(long)]
    pub gain: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub gamma: GammaArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: Source,
    /// Close the loop with this gain first (JSON matrix or a synthesis report).
    #[arg(long)]
    pub gain: Option<PathBuf>,
    /// Fail when the sampled worst-case norm reaches this level.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: Source,
    /// Comma-separated alpha values.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub alphas: Vec<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[command(flatten)]
    pub gamma: GammaArgs,
    /// Also write the benchmark plant as JSON to this path.
    #[arg(long)]
    pub export_plant: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}
