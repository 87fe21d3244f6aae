use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use textgraph::embeddings::EmbeddingTrainConfig;
use textgraph::eval::{ExperimentConfig, MaskPolicy, ModelKind, DEFAULT_SEEDS, DEFAULT_WINDOW};
use textgraph::model::TrainConfig;

#[derive(Debug, Parser)]
#[command(
    name = "textgraph",
    version,
    about = "Text GCN pipeline for semi-supervised document classification"
)]
pub struct Cli {
    /// Directory holding cached artifacts and results.
    #[arg(
        long,
        global = true,
        env = "TEXTGRAPH_WORKDIR",
        default_value = "textgraph-work"
    )]
    pub workdir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean, tokenise and split a dataset; prints the per-class split table.
    Preprocess(PreprocessArgs),
    /// Build the normalised document-word graph.
    BuildGraph(GraphArgs),
    /// Train the embedding tables a model needs, one per seed.
    Embed(EmbedArgs),
    /// Train and evaluate one model over several seeds.
    Train(TrainArgs),
    /// Label-proportion or window-size sweep.
    Sweep(SweepArgs),
    /// Runs one seed for `train --jobs`.
    #[command(hide = true)]
    Worker(WorkerArgs),
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// CSV (`id,content,category`) or JSON-lines dataset.
    #[arg(long)]
    pub dataset: PathBuf,
    /// TSV `token<TAB>stem` table; identity stemming without it.
    #[arg(long)]
    pub stemmer_table: Option<PathBuf>,
    /// One stopword per line; a built-in Swahili list without it.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub split_seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GraphArgs {
    /// PPMI sliding-window size.
    #[arg(long, default_value_t = DEFAULT_WINDOW, value_parser = parse_positive)]
    pub window: usize,
    /// Omit word-word edges.
    #[arg(long, conflicts_with = "window")]
    pub no_ppmi: bool,
}

impl GraphArgs {
    pub fn window(&self) -> Option<usize> {
        (!self.no_ppmi).then_some(self.window)
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EmbeddingArgs {
    /// Embedding dimension for skip-gram and paragraph vectors.
    #[arg(long, default_value_t = 300, value_parser = parse_positive)]
    pub embed_dim: usize,
    #[arg(long, default_value_t = 20, value_parser = parse_positive)]
    pub embed_epochs: usize,
}

impl EmbeddingArgs {
    pub fn apply(&self, config: &mut ExperimentConfig) {
        let set = |c: &EmbeddingTrainConfig| EmbeddingTrainConfig {
            dimension: self.embed_dim,
            epochs: self.embed_epochs,
            ..c.clone()
        };
        config.embedding = set(&config.embedding);
        config.pvdm_embedding = set(&config.pvdm_embedding);
    }
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Model whose embedding tables to train.
    #[arg(long, default_value = "textgcn-t2v", value_parser = parse_model)]
    pub model: ModelKind,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SEEDS)]
    pub seeds: Vec<u64>,
    #[command(flatten)]
    pub embedding: EmbeddingArgs,
}

/// Settings shared by `train` and `sweep`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RunArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Fraction of training documents whose labels are visible.
    #[arg(long, default_value_t = 0.20, value_parser = parse_fraction)]
    pub label_proportion: f64,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SEEDS)]
    pub seeds: Vec<u64>,
    /// Draw a new labelled subset for every seed instead of one shared subset.
    #[arg(long)]
    pub per_seed_masks: bool,
    #[arg(long, default_value_t = 100, value_parser = parse_positive)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.02)]
    pub lr: f64,
    #[arg(long, default_value_t = 200, value_parser = parse_positive)]
    pub hidden: usize,
    #[arg(long, default_value_t = 0.5)]
    pub dropout: f64,
    /// Word vectors in text format, for `avg-embed`.
    #[arg(long)]
    pub pretrained: Option<PathBuf>,
    #[command(flatten)]
    pub embedding: EmbeddingArgs,
}

impl RunArgs {
    pub fn config(&self, model: ModelKind) -> ExperimentConfig {
        let mut config = ExperimentConfig {
            window: self.graph.window(),
            label_proportion: self.label_proportion,
            mask: if self.per_seed_masks {
                MaskPolicy::PerSeed
            } else {
                MaskPolicy::Fixed { seed: 0 }
            },
            train: TrainConfig {
                learning_rate: self.lr,
                epochs: self.epochs,
                dropout: self.dropout,
                hidden: self.hidden,
                ..TrainConfig::default()
            },
            ..ExperimentConfig::new(model)
        };
        self.embedding.apply(&mut config);
        config
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    #[arg(long, default_value = "textgcn", value_parser = parse_model)]
    pub model: ModelKind,
    #[command(flatten)]
    pub run: RunArgs,
    /// Seed runs to execute concurrently as worker processes.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    #[serde(skip, default = "one")]
    pub jobs: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    Labels,
    Window,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub sweep: SweepKind,
    /// Models compared in a label sweep; the first is swept over windows.
    #[arg(long = "model", value_delimiter = ',', default_value = "textgcn,tfidf", value_parser = parse_model)]
    pub models: Vec<ModelKind>,
    /// Label percentages of the training split.
    #[arg(long, value_delimiter = ',', default_value = "1,5,10,20", value_parser = parse_percent)]
    pub proportions: Vec<f64>,
    /// Window sizes for a window sweep.
    #[arg(long, value_delimiter = ',', default_value = "5,10,20,30", value_parser = parse_positive)]
    pub sizes: Vec<usize>,
    /// Add a point without word-word edges to a window sweep.
    #[arg(long)]
    pub include_no_ppmi: bool,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct WorkerArgs {
    /// JSON-encoded training arguments.
    #[arg(long)]
    pub request: String,
    #[arg(long)]
    pub seed: u64,
    /// Where to write the seed outcome.
    #[arg(long)]
    pub output: PathBuf,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse::<ModelKind>().map_err(|e| e.to_string())
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("`{s}` is not a positive integer")),
    }
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if p > 0.0 && p <= 1.0 {
        Ok(p)
    } else {
        Err(format!("{p} is outside (0, 1]"))
    }
}

fn parse_percent(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if p > 0.0 && p <= 100.0 {
        Ok(p / 100.0)
    } else {
        Err(format!("{p}% is outside (0, 100]"))
    }
}
