//! Attention word embeddings.
//!
//! Three models that predict a masked word from its context window under
//! negative sampling:
//!
//! * [`Mode::Cbow`]: the context vector is the plain sum of context word
//!   embeddings, scored against a separate target matrix.
//! * [`Mode::Awe`]: context words are weighted by unnormalized attention
//!   `exp(k_center · q_i)` with learned keys and queries, and the embedding
//!   matrix also serves as the target matrix.
//! * [`Mode::AweS`]: AWE where every word vector is the sum of its subword
//!   unit vectors (the word itself and its lemmas).
//!
//! ```no_run
//! use awe_core::{corpus::{EncodedCorpus, Vocabulary}, trainer::{TrainConfig, Trainer}, Mode};
//! # fn main() -> awe_core::Result<()> {
//! let files = vec!["corpus.txt".into()];
//! let config = TrainConfig { mode: Mode::Awe, dim: 100, ..Default::default() };
//! let vocab = Vocabulary::from_files(&files, &config.vocab)?;
//! let corpus = EncodedCorpus::from_files(&files, &vocab)?;
//! let (params, report) = Trainer::<f32>::new(config, &vocab, None, &corpus)?.run()?;
//! # let _ = (params, report);
//! # Ok(())
//! # }
//! ```

pub mod corpus;
pub mod error;
pub mod eval;
pub mod inspect;
pub mod io;
pub mod model;
pub mod real;
pub mod subword;
pub mod trainer;

pub use error::{Error, Result};
pub use model::{Mode, ModelOptions, ModelParams};
pub use real::{DType, Real};
