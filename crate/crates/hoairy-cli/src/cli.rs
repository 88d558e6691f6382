use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hoairy", version, args_override_self = true, about = "Higher-order Airy kernel determinants and the integro-differential Painlevé-II hierarchy")]
pub struct Cli {
    /// JSON object of flag values (keys are long flag names) used where the command line is silent.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Write results here instead of standard output.
    #[arg(long, short, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Higher-order Airy function Ai_n and its derivatives.
    #[command(args_override_self = true)]
    Ai(AiArgs),
    /// Fredholm determinant of the finite-temperature kernel.
    #[command(args_override_self = true)]
    Det(DetArgs),
    /// Integrate the Painlevé-II member backwards and report u, Q and log D.
    #[command(args_override_self = true)]
    Solve(SolveArgs),
    /// Compare log D from the solver with the Fredholm determinant.
    #[command(args_override_self = true)]
    Identity(SolveArgs),
    /// Print a hierarchy member.
    #[command(args_override_self = true)]
    Hierarchy(HierarchyArgs),
    /// Residual of the mKdV flow under the scaling reduction.
    #[command(args_override_self = true)]
    MkdvCheck(MkdvArgs),
    /// Distribution table F_n^alpha(t) with its t-derivative.
    #[command(args_override_self = true)]
    Table(TableArgs),
    /// Run the acceptance suite.
    #[command(args_override_self = true)]
    Selftest(SelftestArgs),
}

/// A single `--t` or a range `--t-from .. --t-to` with `--t-step`.
#[derive(Debug, Args, Clone)]
pub struct TRange {
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "t_to")]
    pub t_from: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "t_from")]
    pub t_to: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub t_step: f64,
}

#[derive(Debug, Args)]
pub struct AiArgs {
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "x_to")]
    pub x_from: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "x_from")]
    pub x_to: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub x_step: f64,
    /// Derivative order, at most 2n.
    #[arg(long, default_value_t = 0)]
    pub deriv: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Route {
    Halfline,
    Sigma,
    Step,
}

#[derive(Debug, Args)]
pub struct DetArgs {
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[command(flatten)]
    pub t: TRange,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value = "fermi:alpha=1")]
    pub weight: String,
    #[arg(long, value_enum, default_value_t = Route::Halfline)]
    pub route: Route,
    /// Nodes in x (half-line route) or y (σ route); step route uses it as its only size.
    #[arg(long)]
    pub m_x: Option<usize>,
    /// Nodes on the σ-axis.
    #[arg(long)]
    pub m_z: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[command(flatten)]
    pub t: TRange,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value = "fermi:alpha=1")]
    pub weight: String,
    /// Point at which u(t|x) is reported.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x_ref: f64,
    /// Seeding time (default depends on n).
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub grid_m: Option<usize>,
    /// Drop σ-nodes where w′ falls below this level (default depends on n).
    #[arg(long)]
    pub tail_cut: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Pii,
    Mkdv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TextFormat {
    Text,
    Json,
    /// The explicit `u^(2n) = F(...)` form (Painlevé-II only).
    Ode,
}

#[derive(Debug, Args)]
pub struct HierarchyArgs {
    #[arg(long, value_enum, default_value_t = Kind::Pii)]
    pub kind: Kind,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[arg(long, value_enum, default_value_t = TextFormat::Text)]
    pub format: TextFormat,
}

#[derive(Debug, Args)]
pub struct MkdvArgs {
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.02)]
    pub delta_tau: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x: f64,
    #[arg(long, default_value = "fermi:alpha=1")]
    pub weight: String,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
    pub t_from: f64,
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    pub t_to: f64,
    #[arg(long, default_value_t = 0.5)]
    pub t_step: f64,
    /// Also evaluate each row through the mKdV frame and report the difference.
    #[arg(long)]
    pub via_mkdv: bool,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Only the criteria that finish in a few seconds.
    #[arg(long)]
    pub quick: bool,
}
