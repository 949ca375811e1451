use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "walklab", version, about = "Return-time experiments for simple random walks on graphs")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Master seed for graph generation and simulation.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Directory for report files; reports go to stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Exit with status 1 when any check fails or a table is not exact.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Worker threads; defaults to the number of cores. Does not affect results.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// key=value file supplying defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact return-time table with the tail and hazard bounds.
    Dist(DistArgs),
    /// Effective resistance, potential and current flow between vertex sets.
    Resistance(ResistanceArgs),
    /// Random regular expander: spectrum, mixing, pendant hitting windows.
    Expander(ExpanderArgs),
    /// Monte Carlo check of P_x(tau_y <= eps R^2) <= eps.
    Escape(EscapeArgs),
    /// Hazard of the expander construction against a plain half-line.
    Sharpness(SharpnessArgs),
    /// Two-walker collisions on the comb and its control.
    Collide(CollideArgs),
    /// Identity and bound checks over a corpus of graphs.
    Verify(VerifyArgs),
    /// Emit a graph as an edge list.
    Construct(ConstructArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Dist(_) => "dist",
            Command::Resistance(_) => "resistance",
            Command::Expander(_) => "expander",
            Command::Escape(_) => "escape",
            Command::Sharpness(_) => "sharpness",
            Command::Collide(_) => "collide",
            Command::Verify(_) => "verify",
            Command::Construct(_) => "construct",
        }
    }
}

#[derive(Args, Debug)]
pub struct DistArgs {
    #[arg(long)]
    pub graph: String,
    /// Start vertex; defaults to the graph's center, else 0.
    #[arg(long)]
    pub v: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub horizon: usize,
}

#[derive(Args, Debug)]
pub struct ResistanceArgs {
    #[arg(long)]
    pub graph: String,
    #[arg(long, value_delimiter = ',', required = true)]
    pub source: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub sink: Vec<usize>,
}

#[derive(Args, Debug)]
pub struct ExpanderArgs {
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, default_value_t = 2000)]
    pub iterations: usize,
    /// Vertex pairs sampled for the resistance diameter.
    #[arg(long, default_value_t = 16)]
    pub pairs: usize,
    /// Contraction rate for the mixing check; skipped when omitted.
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, default_value_t = 64)]
    pub t_max: usize,
    /// Simulated trials for the pendant-hitting cross-check and the
    /// collision estimate.
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Window start is ceil(c_log ln n).
    #[arg(long, default_value_t = 2.0)]
    pub c_log: f64,
    /// Number of start vertices for the hitting window.
    #[arg(long, default_value_t = 16)]
    pub starts: usize,
}

#[derive(Args, Debug)]
pub struct EscapeArgs {
    #[arg(long)]
    pub graph: String,
    #[arg(long)]
    pub x: usize,
    #[arg(long)]
    pub y: usize,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
}

#[derive(Args, Debug)]
pub struct SharpnessArgs {
    #[arg(long, default_value = "gt:2000:0.1:3")]
    pub graph: String,
    /// Target times; default is t for gt specs and c h_i n_i ln n_i for
    /// full specs.
    #[arg(long, value_delimiter = ',')]
    pub target: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Ratio the construction hazard must reach over the half-line hazard.
    #[arg(long, default_value_t = 5.0)]
    pub min_ratio: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Small,
    Medium,
}

#[derive(Args, Debug)]
pub struct CollideArgs {
    #[arg(long, value_enum, default_value_t = Preset::Medium)]
    pub preset: Preset,
    /// Heights h_i; overrides the preset together with --sizes.
    #[arg(long, value_delimiter = ',', requires = "sizes")]
    pub heights: Vec<usize>,
    #[arg(long, value_delimiter = ',', requires = "heights")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub degree: usize,
    #[arg(long, default_value_t = 200)]
    pub trials: u64,
    /// Skip the comb(G, Z) control run.
    #[arg(long)]
    pub no_control: bool,
    /// Significance level for the final-window contrast.
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    #[arg(long, default_value_t = walklab::montecarlo::DEFAULT_STEP_BUDGET)]
    pub step_budget: u64,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Extra graph specs added to the built-in corpus.
    #[arg(long, value_delimiter = ';')]
    pub graph: Vec<String>,
    #[arg(long, default_value_t = 200)]
    pub horizon: usize,
    /// Also compare two exact rational computations on graphs with at most
    /// 12 vertices.
    #[arg(long)]
    pub rational: bool,
    /// Check only the graphs given with --graph.
    #[arg(long)]
    pub no_default_corpus: bool,
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    #[arg(long)]
    pub graph: String,
}
