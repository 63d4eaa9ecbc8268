use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "bratteli", version, about = "Internal-metric experiments on graded graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Directory receiving the report files.
    #[arg(long, global = true, env = "BRATTELI_OUT_DIR", default_value = "out")]
    pub out: PathBuf,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "BRATTELI_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a graph and write it as JSON.
    Family(FamilyCmd),
    /// Iterate the internal metric and write one CSV per level.
    Metric(MetricCmd),
    /// Covering numbers per level and epsilon.
    Compactness(CompactnessCmd),
    /// Extremality, standardness, concentration and martingale diagnostics.
    Measure(MeasureCmd),
    /// Drop levels from a graph, composing the edges between kept levels.
    Rarefy(RarefyCmd),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    Pascal,
    Young,
    UnorderedPairs,
    Chain,
    Stationary,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GraphArgs {
    #[arg(long, value_enum, conflicts_with = "graph", required_unless_present = "graph")]
    pub family: Option<FamilyName>,
    /// Graph JSON file.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Pascal dimension.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Number of levels; a loaded graph is truncated to it.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Level-1 size of the unordered-pairs graph.
    #[arg(long, default_value_t = 4)]
    pub seed_size: usize,
    /// Also form pairs {a, a} in the unordered-pairs graph.
    #[arg(long)]
    pub include_equal: bool,
    /// Stationary adjacency matrix, rows separated by ';', e.g. "1,1;1,1".
    #[arg(long)]
    pub matrix: Option<String>,
    /// Refuse to generate levels with more vertices than this.
    #[arg(long, default_value_t = 20_000)]
    pub max_level_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeChoice {
    Exact,
    Float,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MetricArgs {
    /// Exact rational arithmetic (default).
    #[arg(long, conflicts_with = "float")]
    pub exact: bool,
    /// Floating-point arithmetic.
    #[arg(long)]
    pub float: bool,
    /// Denominator bits past which exact iteration continues in floating point.
    #[arg(long, default_value_t = 4096)]
    pub bit_cutoff: u64,
    /// Level carrying the initial metric (default: first level with two vertices).
    #[arg(long)]
    pub initial_level: Option<usize>,
    /// JSON file with a dense initial metric (`{"matrix": [["0","1"],["1","0"]]}`);
    /// the discrete metric is used otherwise.
    #[arg(long)]
    pub initial_metric: Option<PathBuf>,
}

impl MetricArgs {
    pub fn mode(&self) -> ModeChoice {
        if self.float {
            ModeChoice::Float
        } else {
            ModeChoice::Exact
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FamilyCmd {
    #[command(flatten)]
    pub graph: GraphArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MetricCmd {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub metric: MetricArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    Greedy,
    FarthestPoint,
    Exhaustive,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CompactnessCmd {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub metric: MetricArgs,
    /// Ball radii, comma separated; decimals are read exactly.
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    pub eps: Vec<String>,
    #[arg(long, value_enum, default_value_t = MethodChoice::Greedy)]
    pub method: MethodChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantChoice {
    Pairwise,
    ToMarginal,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MeasureCmd {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub metric: MetricArgs,
    /// Measure JSON file.
    #[arg(long, conflicts_with = "bernoulli", required_unless_present = "bernoulli")]
    pub measure: Option<PathBuf>,
    /// Bernoulli parameters on the Pascal graph; several give a mixture.
    #[arg(long, value_delimiter = ',')]
    pub bernoulli: Vec<String>,
    /// Mixture weights for --bernoulli (default: uniform).
    #[arg(long, value_delimiter = ',')]
    pub weights: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    pub eps: Vec<String>,
    /// Level pairs `n:m` for the extremality check (default: n = 2 against
    /// a quarter, half and all of the depth).
    #[arg(long, value_delimiter = ',')]
    pub pairs: Vec<String>,
    #[arg(long, value_enum, default_value_t = VariantChoice::Pairwise)]
    pub martingale: VariantChoice,
    /// Pairs drawn per level when the pairwise expectation is sampled.
    #[arg(long, default_value_t = 10_000)]
    pub sample_size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RarefyCmd {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Levels to keep, comma separated; must start at 0.
    #[arg(long, value_delimiter = ',', conflicts_with = "every", required_unless_present = "every")]
    pub keep: Vec<usize>,
    /// Keep every k-th level.
    #[arg(long)]
    pub every: Option<usize>,
}
