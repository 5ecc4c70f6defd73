use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "hjsolve", version, about = "Grid-free characteristic solver for Hamilton-Jacobi equations")]
pub struct Cli {
    /// Suppress progress output on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve on the [-3, 3]² cross-section grid, or at one point with --point.
    Solve(ProblemArgs),
    /// Solve with both the characteristic method and Lax–Friedrichs (d = 2) and compare.
    Compare(ProblemArgs),
    /// σ and Δs sweeps at a fixed point against a fine reference.
    Convergence(ProblemArgs),
    /// List the built-in examples.
    ListExamples,
}

/// Flags shared by the solving commands. Every flag overrides the
/// corresponding entry of `--manifest`.
#[derive(Debug, Args, Default, Clone)]
pub struct ProblemArgs {
    /// JSON manifest; written manifests can be passed back to repeat a run.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// ex1 .. ex5 (see list-examples).
    #[arg(long)]
    pub example: Option<String>,
    /// Sign of ex2 / ex3: + or -.
    #[arg(long, allow_hyphen_values = true)]
    pub sign: Option<String>,
    /// Split index of ex5.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// lax, hopf, min-over-time or linear-direct; picked from H when omitted.
    #[arg(long)]
    pub mode: Option<String>,
    /// ellipse or rosenbrock.
    #[arg(long)]
    pub initial: Option<String>,
    /// Final time.
    #[arg(long = "T", visible_alias = "t-final")]
    pub t_final: Option<f64>,
    /// Comma-separated snapshot times (default: the example's spacing up to T).
    #[arg(long)]
    pub times: Option<String>,
    /// Nodes per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Single point, e.g. "0.5,-1" or "0,...,0" (the entry before ... is repeated).
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    #[arg(long)]
    pub ds: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Initial Lipschitz guess L (step 1/L).
    #[arg(long)]
    pub lipschitz: Option<f64>,
    /// Iterations per step size (M).
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub max_backoffs: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub stop_at_first_certified: bool,
    #[arg(long)]
    pub certificate_tol: Option<f64>,
    #[arg(long)]
    pub lf_dx: Option<f64>,
    /// LF time step; defaults to the largest CFL-stable step up to 1e-3.
    #[arg(long)]
    pub lf_dt: Option<f64>,
    /// LF domain padding around [-3, 3]².
    #[arg(long)]
    pub lf_pad: Option<f64>,
    /// Disk excluded from the comparison: "x1,x2,radius".
    #[arg(long, allow_hyphen_values = true)]
    pub mask: Option<String>,
    #[arg(long, conflicts_with = "mask")]
    pub no_mask: bool,
    #[arg(long)]
    pub ref_ds: Option<f64>,
    #[arg(long)]
    pub ref_sigma: Option<f64>,
    /// Comma-separated σ values of the σ sweep.
    #[arg(long)]
    pub sigmas: Option<String>,
    /// Comma-separated Δs values of the Δs sweep.
    #[arg(long)]
    pub steps: Option<String>,
    #[arg(long)]
    pub fixed_ds: Option<f64>,
    #[arg(long)]
    pub fixed_sigma: Option<f64>,
    /// Worker threads (fallback: HJ_THREADS, then all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}
