use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bessel-hardy", version, about = "Bessel heat kernels, atoms and Hardy-space condition checks")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand. Values given here override `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Config JSON; unset fields take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Comma-separated orders, one per axis.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub nu: Option<Vec<f64>>,
    /// Comma-separated `classical`/`exotic`, one per axis.
    #[arg(long, global = true, value_delimiter = ',')]
    pub flavors: Option<Vec<String>>,
    /// `dyadic`, `box:N`, `cylinder:D1:D2` or `qb`.
    #[arg(long, global = true)]
    pub covering: Option<String>,
    /// Inclusive dyadic level range `LO:HI`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub window: Option<String>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Comma-separated exponents for the A1 and A2 checks.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub delta: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true)]
    pub depth: Option<u32>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; falls back to `BESSEL_HARDY_THREADS`.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file (directory for `report render`); stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Modified Bessel functions.
    Specfun {
        #[command(subcommand)]
        op: SpecfunOp,
    },
    /// Power-weight measures of intervals and balls.
    Measure {
        #[command(subcommand)]
        op: MeasureOp,
    },
    /// Heat kernels.
    Kernel {
        #[command(subcommand)]
        op: KernelOp,
    },
    /// Admissible coverings.
    Covering {
        #[command(subcommand)]
        op: CoveringOp,
    },
    /// Atomic decompositions.
    Atoms {
        #[command(subcommand)]
        op: AtomsOp,
    },
    /// Hardy norm of a grid function by both routes.
    H1norm {
        /// Grid CSV: axis coordinates of cell centres, then the value.
        #[arg(long)]
        input: PathBuf,
        /// Write the maximal function profile as CSV.
        #[arg(long)]
        profile: Option<PathBuf>,
    },
    /// Kernel condition checks.
    Verify {
        /// `all` runs the full battery.
        target: Option<String>,
        /// `A0`, `A1`, `A2`, `A1p`, `A2p`, `a3a4`, `lemma24`, `supT` or `prop42`.
        #[arg(long)]
        condition: Option<String>,
    },
    /// Render JSON reports.
    Report {
        #[command(subcommand)]
        op: ReportOp,
    },
}

#[derive(Debug, Subcommand)]
pub enum SpecfunOp {
    /// `I_τ(x)` with its scaled value and evaluation path.
    Eval {
        #[arg(long, allow_hyphen_values = true)]
        tau: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum MeasureOp {
    /// `μ_ν(B(x, r))`, exact and by the closed-form comparable.
    Ball {
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        #[arg(long)]
        r: f64,
    },
    /// `μ_ν([a, b])` on one axis.
    Interval {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Route {
    /// The kernel implied by the flavors.
    Semigroup,
    /// Classical axes unchanged, exotic axes replaced by the conjugated kernel.
    Conjugated,
}

#[derive(Debug, Subcommand)]
pub enum KernelOp {
    /// Kernel value at `(t, x, y)`.
    Eval {
        #[arg(long)]
        t: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<f64>,
        #[arg(long, value_enum, default_value = "semigroup")]
        route: Route,
    },
}

#[derive(Debug, Subcommand)]
pub enum CoveringOp {
    /// Elements meeting the window as CSV.
    Dump,
    /// Axioms, overlap and partition of unity over the window.
    Check {
        #[arg(long, default_value_t = 2000)]
        points: usize,
        #[arg(long, default_value_t = 4000)]
        max_elements: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum AtomsOp {
    /// Decompose a grid CSV into local and cancellative atoms.
    Decompose {
        #[arg(long)]
        input: PathBuf,
    },
    /// Validate one atom or every term of a decomposition report.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum ReportOp {
    /// Markdown summary plus CSV tables.
    Render {
        #[arg(long)]
        input: PathBuf,
    },
}
