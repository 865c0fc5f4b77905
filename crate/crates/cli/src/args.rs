use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "leewave", version, about = "Exact trapped lee waves on the beta-plane")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplingMode {
    Uniform,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Affine,
    Exponential,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// JSON configuration file.
    #[arg(long, global = true, env = "LEEWAVE_CONFIG")]
    pub config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized grids; implies random sampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Grid, e.g. "q=0:1e4:10,s=-1e4:1e4:10,xi=-3:-0.05:10,tau=0:1:1".
    #[arg(long, global = true)]
    pub grid: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub sampling: Option<SamplingMode>,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// Flags that replace config values.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub latitude_deg: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub k: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub c0: Option<f64>,
    /// Wave speed, bypassing the dispersion relation.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub c: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub z0: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub s0: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub r0: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub r1: Option<f64>,
    #[arg(long, global = true)]
    pub xi_guard: Option<f64>,
    /// Density family; needs --a/--b or --rho-ref/--lambda.
    #[arg(long, global = true, value_enum)]
    pub profile: Option<Family>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, global = true)]
    pub rho_ref: Option<f64>,
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true)]
    pub surface_pressure: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub integration_constant: Option<f64>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Solve the dispersion relation for c.
    Dispersion,
    /// Evaluate the governing-equation residuals on a grid.
    Verify,
    /// Export the fields on a grid as CSV.
    Field,
    /// Check the vorticity closed forms and the growth of |gamma| with height.
    Vorticity,
    /// Curve data for Psi' and Psi.
    Figure1(Figure1Args),
    /// Advect a particle with RK4 and compare with the closed-form path.
    Trajectory(TrajectoryArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Figure1Args {
    /// Trough slope m_s (default: the config's slope at s = 0).
    #[arg(long = "m-s", allow_negative_numbers = true)]
    pub m_s: Option<f64>,
    /// Upper end of the X range (default: 4·X1).
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long, default_value_t = 401)]
    pub points: usize,
    /// Also write a two-panel SVG plot.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TrajectoryArgs {
    #[arg(long, default_value_t = 2000.0, allow_negative_numbers = true)]
    pub q: f64,
    #[arg(long = "label-s", default_value_t = 500.0, allow_negative_numbers = true)]
    pub label_s: f64,
    /// Vertical phase of the particle; ignored when --label-r is given.
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub xi: f64,
    #[arg(long = "label-r", allow_negative_numbers = true)]
    pub label_r: Option<f64>,
    /// Seconds (default: one wave period).
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long, default_value_t = 256)]
    pub steps: usize,
}
