use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "qpbbm", version, about = "Spectral Picard solver and verification suite for generalized BBM with quasi-periodic data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the Picard solver and write solution CSV, diagnostics JSON and a run manifest.
    Solve(SolveArgs),
    /// Check tree identities, weighted tree sums and the tree expansion against Picard iterates.
    VerifyTree(VerifyTreeArgs),
    /// Check the analytic lattice-sum bounds and the inequality probes.
    #[command(alias = "bounds")]
    VerifyBounds(VerifyBoundsArgs),
    /// Print the guaranteed horizon and the constant bounding the iterates.
    Horizon(HorizonArgs),
    /// Compare the Picard solution with an independent RK4 integration.
    CompareOracle(CompareArgs),
    /// Sample u(t, x) from a solution CSV on a uniform x grid.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Exp,
    Poly,
}

/// Solver flags; every field left unset falls back to the config file, then
/// to the built-in default.
#[derive(Debug, Clone, Default, Args)]
pub struct RunFlags {
    /// JSON config file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Nonlinearity degree.
    #[arg(long)]
    pub p: Option<u32>,
    /// Number of frequencies.
    #[arg(long)]
    pub nu: Option<usize>,
    /// Lattice truncation radius N (|n|_1 <= N).
    #[arg(long)]
    pub radius: Option<u32>,
    /// Comma-separated wave vector; tokens may be numbers, sqrtK, piOverK or pi.
    #[arg(long)]
    pub omega: Option<String>,
    #[arg(long, value_enum)]
    pub profile: Option<ProfileKind>,
    /// Decay amplitude.
    #[arg(long)]
    pub amp: Option<f64>,
    /// Decay rate (rho for exp, r for poly).
    #[arg(long)]
    pub rate: Option<f64>,
    /// Final time; defaults to the guaranteed horizon.
    #[arg(long = "T")]
    pub t: Option<f64>,
    /// Number of time steps M.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<u32>,
    /// trapezoid or simpson.
    #[arg(long)]
    pub quad: Option<String>,
    /// Fixed-point tolerance on the sup-difference of consecutive iterates.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Allow T beyond the guaranteed horizon.
    #[arg(long)]
    pub override_horizon: bool,
    /// Initial coefficients as CSV (n_1..n_nu,re,im) instead of generated data.
    #[arg(long)]
    pub init: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub run: RunFlags,
    /// Solution CSV path; diagnostics and manifest are written next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyTreeArgs {
    /// Tree depth.
    #[arg(long)]
    pub k: u32,
    #[arg(long, default_value_t = 2)]
    pub p: u32,
    /// Weight for the weighted tree sum; defaults to the critical weight.
    #[arg(long)]
    pub flat: Option<f64>,
    /// Largest tree set that may be enumerated.
    #[arg(long, default_value_t = 1_000_000)]
    pub budget: u64,
    /// Skip the comparison against Picard iterates.
    #[arg(long)]
    pub skip_picard: bool,
    /// Lattice dimension for the Picard comparison.
    #[arg(long, default_value_t = 1)]
    pub nu: usize,
    /// Truncation radius for the Picard comparison.
    #[arg(long, default_value_t = 3)]
    pub radius: u32,
    /// Time steps for the Picard comparison.
    #[arg(long, default_value_t = 512)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyBoundsArgs {
    /// Number of random samples per inequality probe.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 20240601)]
    pub seed: u64,
    /// Largest truncation radius in the partial-sum check.
    #[arg(long, default_value_t = 60)]
    pub max_radius: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HorizonArgs {
    #[arg(long, default_value_t = 2)]
    pub p: u32,
    #[arg(long, value_enum, default_value_t = ProfileKind::Exp)]
    pub profile: ProfileKind,
    #[arg(long, default_value_t = 1.0)]
    pub amp: f64,
    /// Decay rate; defaults to 1 for exp and 16 for poly.
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub nu: usize,
    /// Report the largest amplitude whose horizon reaches this time.
    #[arg(long = "target-T")]
    pub target_t: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub run: RunFlags,
    /// RK4 steps; must be a positive multiple of the Picard steps. Defaults to them.
    #[arg(long)]
    pub rk_steps: Option<usize>,
    /// Fail (exit 1) when the sup-distance exceeds this value.
    #[arg(long)]
    pub max_distance: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Solution CSV written by `solve`.
    #[arg(long)]
    pub solution: PathBuf,
    /// Wave vector; defaults to (1, sqrt2, ...) for the file's dimension.
    #[arg(long)]
    pub omega: Option<String>,
    /// Frame index into the time grid.
    #[arg(long, default_value_t = 0)]
    pub t_index: usize,
    #[arg(long, default_value_t = 256)]
    pub x_samples: usize,
    #[arg(long, default_value_t = 0.0)]
    pub x_min: f64,
    /// Right end of the x range (excluded); defaults to 2 pi.
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
