use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "geyor",
    version,
    about = "Value function, kernels, bounds, simulation and pricing for the Geman-Yor operator"
)]
pub struct Cli {
    /// Worker threads (the GEYOR_THREADS environment variable takes precedence).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Write the run manifest here instead of stderr.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Value function between a point and a pole.
    Psi(PsiArgs),
    /// Fundamental-solution kernels.
    Kernel(KernelArgs),
    /// Two-sided bounds: calibrate constants and count violations.
    Bounds(BoundsArgs),
    /// Simulate terminal samples or a density surface.
    Simulate(SimulateArgs),
    /// Price an Asian option.
    Price(PriceArgs),
    /// Harnack chain along an admissible path.
    Harnack(HarnackArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct PsiArgs {
    /// Start point `x,y,t`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "grid")]
    pub point: Option<String>,
    /// End point `x0,y0,t0`.
    #[arg(long, allow_hyphen_values = true)]
    pub pole: Option<String>,
    /// CSV with columns x,y,t,x0,y0,t0.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// Also sample the optimal trajectory at this many points.
    #[arg(long, conflicts_with = "grid")]
    pub traj: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelType {
    Gamma0,
    Kolmo,
    KolmoMu,
    GammaMu,
}

#[derive(Debug, Args, Serialize)]
pub struct KernelArgs {
    #[arg(long = "type", value_enum)]
    pub kind: KernelType,
    /// Diffusion constant for `kolmo-mu` and `gamma-mu`.
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true, conflicts_with = "grid")]
    pub point: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub pole: Option<String>,
    /// CSV with columns x,y,t,x0,y0,t0.
    #[arg(long)]
    pub grid: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    /// CSV with columns x,y,t.
    #[arg(long, conflicts_with = "box")]
    pub grid: Option<PathBuf>,
    /// Tensor grid `x0:x1:nx,y0:y1:ny,t0:t1:nt`.
    #[arg(long = "box", allow_hyphen_values = true)]
    pub r#box: Option<String>,
    #[arg(long, allow_hyphen_values = true, default_value = "1,0,0")]
    pub pole: String,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Fit c-_eps and C+_eps on the grid before checking.
    #[arg(long)]
    pub calibrate: bool,
    /// Check on this CSV grid instead of the calibration grid.
    #[arg(long, conflicts_with = "check_box")]
    pub check_grid: Option<PathBuf>,
    /// Check on this tensor grid instead of the calibration grid.
    #[arg(long, allow_hyphen_values = true)]
    pub check_box: Option<String>,
    /// Loosen calibrated constants by this factor before checking.
    #[arg(long, default_value_t = 1.0)]
    pub relax: f64,
    #[arg(long = "C-minus", default_value_t = 1.0)]
    pub big_c_minus: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c_minus_eps: f64,
    #[arg(long, default_value_t = 1.0 / 16.0)]
    pub c_plus: f64,
    #[arg(long = "C-plus-eps", default_value_t = 1.0)]
    pub big_c_plus_eps: f64,
    #[arg(long = "T", default_value_t = 10.0)]
    pub horizon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    L0,
    Yor,
    Sine,
    Gbm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    ExactLognormal,
    Euler,
    Milstein,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = ModelName::L0)]
    pub model: ModelName,
    /// Drift for `gbm`.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub mu: f64,
    /// Volatility for `gbm`.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub x0: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub y0: f64,
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SchemeName::ExactLognormal)]
    pub scheme: SchemeName,
    /// Emit a KDE surface on `x0:x1:nx,y0:y1:ny` instead of samples.
    #[arg(long, allow_hyphen_values = true)]
    pub density: Option<String>,
    /// Smooth in `(log x, log(y − y0))`.
    #[arg(long)]
    pub log_kde: bool,
    /// Emit sample means and standard errors as JSON.
    #[arg(long, conflicts_with = "density")]
    pub summary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Auto,
    Quadrature,
    ClosedForm,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    K0,
}

#[derive(Debug, Args, Serialize)]
pub struct PriceArgs {
    /// JSON document `{"option": {...}, "market": {...}}`.
    #[arg(long, conflicts_with = "json")]
    pub input: Option<PathBuf>,
    /// The same document inline.
    #[arg(long)]
    pub json: Option<String>,
    #[arg(long, value_enum, default_value_t = MethodName::Auto)]
    pub method: MethodName,
    #[arg(long, default_value_t = 200_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run an analytic check instead of pricing the input.
    #[arg(long, value_enum)]
    pub benchmark: Option<Benchmark>,
}

#[derive(Debug, Args, Serialize)]
pub struct HarnackArgs {
    /// `zero`, `const:<value>` or `pw:<v1>;<v2>;...` on `[t, t0]`.
    #[arg(long, default_value = "zero", allow_hyphen_values = true)]
    pub omega: String,
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    #[arg(long = "M", default_value_t = 10.0)]
    pub m: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t0: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long = "T0", allow_hyphen_values = true)]
    pub t_boundary: f64,
    /// Path start `x,y` at time `t0`.
    #[arg(long, allow_hyphen_values = true, default_value = "1,0")]
    pub start: String,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
}
