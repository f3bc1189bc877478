use std::path::PathBuf;

use awe_core::Mode;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "awe", version, about = "Train and evaluate attention word embeddings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model on one or more corpus files.
    Train(Box<TrainArgs>),
    /// Spearman correlation on word-similarity datasets.
    Eval(EvalArgs),
    /// Attention and similarity of every context word for a masked word.
    Inspect(InspectArgs),
    /// Nearest neighbors of a word by cosine similarity.
    Nn(NnArgs),
    /// Write word vectors in word2vec format.
    Export(ExportArgs),
    /// Download the word-similarity datasets.
    FetchData(FetchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Cbow,
    Awe,
    #[value(name = "awe-s")]
    AweS,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Cbow => Mode::Cbow,
            ModeArg::Awe => Mode::Awe,
            ModeArg::AweS => Mode::AweS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DTypeArg {
    F32,
    F64,
}

/// Training flags. Unset flags fall back to the config file, then to the
/// defaults shown.
#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Model [default: awe]
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,

    /// Corpus text files; each line is a sentence
    #[arg(long, num_args = 1.., required = true)]
    pub corpus: Vec<PathBuf>,

    /// Embedding dimension D [default: 500]
    #[arg(long)]
    pub dim: Option<usize>,

    /// Key/query dimension D' [default: 50]
    #[arg(long)]
    pub dim_kq: Option<usize>,

    /// Maximum context words on each side [default: 5]
    #[arg(long)]
    pub window: Option<usize>,

    /// Negative samples per window [default: 5]
    #[arg(long)]
    pub negatives: Option<usize>,

    /// Passes over the corpus [default: 5]
    #[arg(long)]
    pub epochs: Option<usize>,

    /// Initial learning rate, decayed linearly over training [default: 0.05]
    #[arg(long)]
    pub lr: Option<f64>,

    /// Final learning rate [default: 1e-4 x initial]
    #[arg(long)]
    pub min_lr: Option<f64>,

    /// Learning-rate multiplier for keys and queries [default: 1]
    #[arg(long)]
    pub kq_lr_mult: Option<f64>,

    /// Clip each row gradient to this norm; 0 disables clipping [default: 100]
    #[arg(long)]
    pub max_grad_norm: Option<f64>,

    /// Drop words seen fewer times [default: 5]
    #[arg(long)]
    pub min_count: Option<u64>,

    /// Keep only the most frequent words [default: unlimited]
    #[arg(long)]
    pub max_vocab: Option<usize>,

    /// Subsampling threshold t; 0 disables subsampling [default: 1e-4]
    #[arg(long)]
    pub subsample: Option<f64>,

    /// Worker threads [default: 1]
    #[arg(long)]
    pub workers: Option<usize>,

    /// Random seed [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,

    /// Clamp for key-query logits before exponentiation [default: 10]
    #[arg(long)]
    pub attn_clamp: Option<f64>,

    /// Clamp for target scores inside the loss [default: 15]
    #[arg(long)]
    pub logit_clamp: Option<f64>,

    /// Normalize attention weights over the context (ablation)
    #[arg(long)]
    pub normalize_attention: bool,

    /// Lemma table (word, pos, lemma TSV) for awe-s subword units
    #[arg(long)]
    pub lemmas: Option<PathBuf>,

    /// TOML file with training settings
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Continue from a checkpoint at its epoch boundary
    #[arg(long)]
    pub resume: Option<PathBuf>,

    /// Checkpoint path, rewritten after every epoch
    #[arg(long)]
    pub out: PathBuf,

    /// Write the training report (JSON) here
    #[arg(long)]
    pub report: Option<PathBuf>,

    /// Parameter storage precision [default: f32]
    #[arg(long, value_enum)]
    pub dtype: Option<DTypeArg>,

    /// Progress line every this many tokens; 0 disables [default: 1000000]
    #[arg(long)]
    pub progress_every: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Checkpoint, or vectors in word2vec text format
    #[arg(long)]
    pub model: PathBuf,

    /// Dataset files, or names of files in the data directory
    #[arg(long, num_args = 1.., required = true)]
    pub dataset: Vec<String>,

    /// Write the score reports (JSON) here
    #[arg(long)]
    pub report: Option<PathBuf>,

    /// Data directory for dataset names
    #[arg(long, env = "AWE_DATA_DIR", default_value = "data/similarity")]
    pub data_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    /// Checkpoint of an awe or awe-s model
    #[arg(long)]
    pub model: PathBuf,

    #[arg(long)]
    pub sentence: String,

    /// Word to mask (its first occurrence)
    #[arg(long)]
    pub mask: String,

    /// Fraction of the vocabulary marked frequent [default: 0.001]
    #[arg(long, default_value_t = awe_core::inspect::DEFAULT_FREQUENT_FRACTION)]
    pub frequent: f64,

    /// Print JSON instead of a table
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct NnArgs {
    /// Checkpoint, or vectors in word2vec text format
    #[arg(long)]
    pub model: PathBuf,

    #[arg(long)]
    pub word: String,

    /// Number of neighbors
    #[arg(short, default_value_t = 10)]
    pub k: usize,

    /// Print JSON instead of a table
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub model: PathBuf,

    #[arg(long)]
    pub out: PathBuf,

    /// word2vec binary format (f32) instead of text
    #[arg(long)]
    pub binary: bool,
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    /// Destination directory
    #[arg(long, env = "AWE_DATA_DIR", default_value = "data/similarity")]
    pub dest: PathBuf,
}
