use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qmeas", version, about = "Error and disturbance of linear measurement interactions")]
pub struct Cli {
    /// Plain-text `key=value` file supplying defaults for any flag.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify an interaction into its standard form.
    Classify(ClassifyArgs),
    /// Legacy and gain-referred error/disturbance with bound checks.
    Report(ReportArgs),
    /// Normalized error-disturbance trajectory over a balance grid.
    Trajectory(TrajectoryArgs),
    /// Output distributions of Gaussian object and probe states.
    Simulate(SimulateArgs),
    /// Brute-force wavefunction run compared against the distribution laws.
    Oracle(OracleArgs),
    /// Run every invariant suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct Coefficients {
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub c: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    pub d: f64,
}

#[derive(Debug, Args)]
pub struct States {
    #[arg(long, default_value_t = 1.0)]
    pub hbar: f64,
    /// Object position spread σ(q).
    #[arg(long = "sigma-q", default_value_t = 1.0)]
    pub sigma_q: f64,
    /// Object momentum spread σ(p); defaults to ħ/2σ(q).
    #[arg(long = "sigma-p")]
    pub sigma_p: Option<f64>,
    /// Probe position spread σ(Q).
    #[arg(long = "sigma-Q", default_value_t = 1.0)]
    pub sigma_big_q: f64,
    /// Probe momentum spread σ(P); defaults to ħ/2σ(Q).
    #[arg(long = "sigma-P")]
    pub sigma_big_p: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TextFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DataFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub coefficients: Coefficients,
    #[arg(long, value_enum, default_value_t = TextFormat::Text)]
    pub format: TextFormat,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub coefficients: Coefficients,
    #[command(flatten)]
    pub states: States,
}

#[derive(Debug, Args)]
pub struct TrajectoryArgs {
    /// Position-noise gain a.
    #[arg(long, default_value_t = 0.5)]
    pub a: f64,
    /// Signal gain b.
    #[arg(long, default_value_t = 0.5)]
    pub b: f64,
    /// Determinant Δ = ad − bc.
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Evaluate at this single balance value instead of a grid.
    #[arg(long, conflicts_with_all = ["w_min", "w_max", "n"])]
    pub w: Option<f64>,
    #[arg(long = "w-min", default_value_t = 1e-2)]
    pub w_min: f64,
    #[arg(long = "w-max", default_value_t = 1e2)]
    pub w_max: f64,
    /// Number of log-spaced balance values.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Write the eleven curves `a ∈ {0.01, 0.1, …, 0.9, 0.99}`, `a + b = 1`,
    /// `Δ = 1` into the directory given by `--out`.
    #[arg(long, requires = "out")]
    pub fig1: bool,
    /// Output file (directory with `--fig1`); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = DataFormat::Csv)]
    pub format: DataFormat,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub coefficients: Coefficients,
    #[command(flatten)]
    pub states: States,
    /// Samples per input density; a power of two, at least 16.
    #[arg(long = "grid-points", default_value_t = 4096)]
    pub grid_points: usize,
    /// Half-width of each input grid in standard deviations.
    #[arg(long, default_value_t = 10.0)]
    pub span: f64,
    /// Directory receiving the CSV files and `report.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub coefficients: Coefficients,
    #[command(flatten)]
    pub states: States,
    /// Mean probe momentum ⟨P⟩.
    #[arg(long = "mean-P", allow_hyphen_values = true, default_value_t = 0.0)]
    pub mean_big_p: f64,
    /// Joint grid points per axis.
    #[arg(long = "grid-points", default_value_t = 1024)]
    pub grid_points: usize,
    /// Directory receiving `joint.qmo` and the oracle marginals.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Quick,
    Full,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = LevelArg::Full)]
    pub level: LevelArg,
    /// Write the JSON summary here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flip the sign of the Fourier kernel to check that the suites notice.
    #[arg(long, hide = true)]
    pub inject_kernel_fault: bool,
}
