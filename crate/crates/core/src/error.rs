use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,

    #[error("no words retained (min_count {min_count})")]
    NoWordsRetained { min_count: u64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("attention undefined for CBOW")]
    AttentionUndefined,

    #[error("empty context")]
    EmptyContext,

    #[error("word id {id} out of range for {len} rows")]
    WordOutOfRange { id: usize, len: usize },

    #[error("AWE-S mode requires a subword map")]
    MissingSubwords,

    #[error("corpus/vocabulary mismatch: {0}")]
    CorpusMismatch(String),

    #[error("non-finite value during training: {0}")]
    NonFinite(String),

    #[error("zero rank variance")]
    ZeroRankVariance,

    #[error("spearman needs two lists of equal length >= 2 (got {x} and {y})")]
    SpearmanLength { x: usize, y: usize },

    #[error("only {evaluated} evaluable pairs in dataset {dataset}; need at least 2")]
    TooFewPairs { dataset: String, evaluated: usize },

    #[error("word not representable by the model: {0}")]
    Unrepresentable(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("checkpoint: {msg} (at byte offset {offset})")]
    Checkpoint { offset: usize, msg: String },

    #[error("checkpoint format version {found} is not supported (expected {expected})")]
    CheckpointVersion { found: u32, expected: u32 },

    #[error("{context}")]
    Io {
        context: String,
        #[source]
        source: io::Error,
    },
}

pub(crate) trait IoContext<T> {
    fn io_context(self, context: impl FnOnce() -> String) -> Result<T>;
}

impl<T> IoContext<T> for io::Result<T> {
    fn io_context(self, context: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| Error::Io {
            context: context(),
            source,
        })
    }
}
