use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "pathcol", version, about = "Sample and analyse H-colourings of the path")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Inspect a colour graph.
    Graph {
        #[command(subcommand)]
        action: GraphAction,
    },
    /// Run a chain and write its trajectory or final state.
    Sample(SampleArgs),
    /// Distance to uniform as a function of time.
    Mix(MixArgs),
    /// Run a named verification suite.
    Verify(VerifyArgs),
    /// List every colouring of a path or segment.
    Enumerate(EnumerateArgs),
    /// Disagreement profile of the segment coupling.
    Couple(CoupleArgs),
}

#[derive(Subcommand, Debug)]
enum GraphAction {
    Inspect(InspectArgs),
}

#[derive(Args, Debug, Clone)]
pub struct GraphArgs {
    /// Built-in graph: clique, independent_set, widom_rowlinson, beach, path.
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    pub builtin: Option<String>,
    /// Graph file (text edge list or JSON).
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Size parameter for clique, widom_rowlinson and path.
    #[arg(long)]
    pub q: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct OverrideArgs {
    #[arg(long = "override-l1")]
    pub l1: Option<usize>,
    #[arg(long = "override-s")]
    pub s: Option<usize>,
    #[arg(long = "override-beta")]
    pub beta: Option<u64>,
    #[arg(long = "override-gamma")]
    pub gamma: Option<u64>,
    #[arg(long = "override-u")]
    pub u: Option<usize>,
    #[arg(long = "override-w")]
    pub w: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct ChainArgs {
    #[arg(long, value_enum, default_value_t = ChainArg::Anyorder)]
    pub chain: ChainArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ClassArg::Auto)]
    pub class: ClassArg,
    /// Block order within a scan (any-order chain only).
    #[arg(long, value_enum, default_value_t = OrderArg::Ascending)]
    pub order: OrderArg,
    /// Start state as comma-separated colours; default is an exact uniform draw.
    #[arg(long)]
    pub init: Option<String>,
    #[command(flatten)]
    pub overrides: OverrideArgs,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainArg {
    Anyorder,
    Fixedorder,
    Rnd,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassArg {
    Auto,
    Omega1,
    Omega2,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderArg {
    Ascending,
    Random,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodArg {
    Exact,
    Empirical,
}

#[derive(Args, Debug)]
pub struct InspectArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Full scans (scan chains).
    #[arg(long, conflicts_with = "steps")]
    pub scans: Option<usize>,
    /// Single block updates (random-update chain).
    #[arg(long)]
    pub steps: Option<usize>,
    /// Record every k-th scan or step; 0 keeps only the start and final state.
    #[arg(long, default_value_t = 0)]
    pub every: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct MixArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Horizon in scans or steps.
    #[arg(long, visible_alias = "steps", default_value_t = 50)]
    pub scans: usize,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    pub method: MethodArg,
    /// Replicas per time point (empirical method).
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Project onto sites LO:HI (empirical method).
    #[arg(long)]
    pub window: Option<String>,
    /// Spacing of empirical time points.
    #[arg(long, default_value_t = 1)]
    pub every: usize,
    /// Largest state space to enumerate.
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub suite: String,
    #[arg(long, conflicts_with = "file")]
    pub builtin: Option<String>,
    #[arg(long)]
    pub file: Option<PathBuf>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20_000)]
    pub cap: usize,
    #[command(flatten)]
    pub overrides: OverrideArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = ClassArg::Auto)]
    pub class: ClassArg,
    /// Left boundary colour of a segment, or `free`.
    #[arg(long)]
    pub left: Option<String>,
    /// Right boundary colour of a segment, or `free`.
    #[arg(long)]
    pub right: Option<String>,
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CoupleArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Segment length.
    #[arg(long)]
    pub l: usize,
    #[arg(long)]
    pub c1: u8,
    #[arg(long)]
    pub c2: u8,
    /// Right boundary colour, or `free`.
    #[arg(long, default_value = "free")]
    pub d: String,
    /// Coupling stride; 1 couples site by site.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    /// Estimate by simulation instead of the exact recursion.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Graph { action: GraphAction::Inspect(a) } => commands::inspect(&a),
        Command::Sample(a) => commands::sample(&a),
        Command::Mix(a) => commands::mix(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Enumerate(a) => commands::enumerate(&a),
        Command::Couple(a) => commands::couple(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
