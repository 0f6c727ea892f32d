use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ndiv_core::{AnomalyType, DiversityStatistic, Fallback, Method, Reference};

use crate::config::{parse_enum, Lambda, Pairs};

#[derive(Debug, Parser)]
#[command(name = "ndiv", version, about = "Neighbor-diversity graph anomaly scoring")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score every node of a graph.
    Score(ScoreArgs),
    /// Score a labeled graph and report ranking metrics.
    Evaluate(ScoreArgs),
    /// Write a synthetic SBM benchmark graph.
    Generate(GenerateArgs),
    /// Homophily sweep over synthetic graphs.
    Sweep(SweepArgs),
    /// Time full enumeration against sampled pair budgets.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct InputArgs {
    /// Whitespace-separated edge list, one `u v` pair per line.
    #[arg(long)]
    pub edges: Option<PathBuf>,
    /// Comma- or tab-separated feature rows.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// One 0/1 label per line.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScoringArgs {
    #[arg(long, value_parser = parse_enum::<Method>, help = "neighbordiv | lcc | nrs | pcd | amen")]
    pub method: Option<Method>,
    /// Projection rank.
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long, value_parser = parse_enum::<DiversityStatistic>, help = "variance | std_dev | mean | entropy")]
    pub statistic: Option<DiversityStatistic>,
    #[arg(long)]
    pub entropy_bins: Option<usize>,
    #[arg(long, value_parser = parse_enum::<Reference>, help = "median | mean")]
    pub reference: Option<Reference>,
    #[arg(long, value_parser = parse_enum::<Fallback>, help = "zero | median_of_valid | valid_only")]
    pub fallback: Option<Fallback>,
    /// `full` or a per-node pair budget.
    #[arg(long)]
    pub pairs: Option<Pairs>,
    /// Threshold multiplier, or `none` for scores only.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<Lambda>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON file with defaults for any of these settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    /// Also write the projected feature matrix.
    #[arg(long)]
    pub dump_projection: bool,
    /// Also write the raw per-node statistic.
    #[arg(long)]
    pub dump_raw: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub communities: Option<usize>,
    #[arg(long)]
    pub homophily: Option<f64>,
    #[arg(long)]
    pub avg_degree: Option<f64>,
    #[arg(long)]
    pub feature_dim: Option<usize>,
    #[arg(long)]
    pub center_variance: Option<f64>,
    #[arg(long)]
    pub noise_variance: Option<f64>,
    #[arg(long, value_parser = parse_enum::<AnomalyType>, help = "type_h | type_d | mixed")]
    pub anomaly_type: Option<AnomalyType>,
    #[arg(long)]
    pub anomalies_per_type: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub synth: SynthArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON synthetic spec; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scoring: ScoringArgs,
    /// Base graph spec; `--homophily` and `--anomaly-type` are rejected here.
    #[command(flatten)]
    pub synth: SynthArgs,
    /// Defaults to neighbordiv,nrs,amen.
    #[arg(long, value_delimiter = ',', value_parser = parse_enum::<Method>)]
    pub methods: Vec<Method>,
    /// Homophily values; defaults to 0.1,0.3,0.5,0.7,0.9.
    #[arg(long, value_delimiter = ',')]
    pub h_values: Vec<f64>,
    /// Defaults to type_h,type_d,mixed.
    #[arg(long, value_delimiter = ',', value_parser = parse_enum::<AnomalyType>)]
    pub anomaly_types: Vec<AnomalyType>,
    /// Number of seeds per cell; seeds run from `--seed` upward.
    #[arg(long, default_value_t = 3)]
    pub seeds: usize,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    /// Pair budgets to time against full enumeration.
    #[arg(long, value_delimiter = ',', default_values_t = vec![25usize, 50, 100])]
    pub budgets: Vec<usize>,
    /// Timed runs per configuration; the fastest is reported.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
}
