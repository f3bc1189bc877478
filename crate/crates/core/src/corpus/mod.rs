//! Tokenization, vocabulary construction and training-window generation.

mod vocab;
mod window;

use std::borrow::Cow;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::ops::Range;
use std::path::{Path, PathBuf};

use crate::error::{Error, IoContext, Result};

pub use vocab::{VocabConfig, Vocabulary};
pub use window::{windows, TrainingWindow, Windows};

/// Calls `f` for every token of `text`: whitespace split, leading and
/// trailing non-alphanumeric characters stripped, lowercased. Tokens that
/// are punctuation only are dropped.
pub fn for_each_token<'t>(text: &'t str, mut f: impl FnMut(Cow<'t, str>)) {
    for raw in text.split_whitespace() {
        let trimmed = raw.trim_matches(|c: char| !c.is_alphanumeric());
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.chars().any(char::is_uppercase) {
            f(Cow::Owned(trimmed.to_lowercase()));
        } else {
            f(Cow::Borrowed(trimmed));
        }
    }
}

pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for_each_token(text, |t| out.push(t.into_owned()));
    out
}

/// Streams the lines (sentences) of a set of UTF-8 files. Invalid byte
/// sequences are replaced with U+FFFD and logged.
pub fn for_each_line(paths: &[PathBuf], mut f: impl FnMut(&str)) -> Result<()> {
    let mut buf = Vec::new();
    for path in paths {
        let file = File::open(path).io_context(|| format!("opening corpus {}", path.display()))?;
        let mut reader = BufReader::with_capacity(1 << 20, file);
        let mut line_no = 0usize;
        loop {
            buf.clear();
            let n = reader
                .read_until(b'\n', &mut buf)
                .io_context(|| format!("reading corpus {}", path.display()))?;
            if n == 0 {
                break;
            }
            line_no += 1;
            match std::str::from_utf8(&buf) {
                Ok(line) => f(line),
                Err(_) => {
                    log::warn!("{}:{}: invalid UTF-8 replaced", path.display(), line_no);
                    f(&String::from_utf8_lossy(&buf));
                }
            }
        }
    }
    Ok(())
}

/// A corpus mapped to vocabulary ids with out-of-vocabulary tokens dropped.
/// Sentence boundaries (input lines) are preserved.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EncodedCorpus {
    ids: Vec<u32>,
    /// Start offset of every sentence into `ids`, plus a final `ids.len()`.
    bounds: Vec<usize>,
}

impl EncodedCorpus {
    pub fn from_files(paths: &[PathBuf], vocab: &Vocabulary) -> Result<Self> {
        let mut corpus = EncodedCorpus {
            ids: Vec::new(),
            bounds: vec![0],
        };
        for_each_line(paths, |line| corpus.push_line(line, vocab))?;
        Ok(corpus)
    }

    pub fn from_text(text: &str, vocab: &Vocabulary) -> Self {
        let mut corpus = EncodedCorpus {
            ids: Vec::new(),
            bounds: vec![0],
        };
        for line in text.lines() {
            corpus.push_line(line, vocab);
        }
        corpus
    }

    /// Builds a corpus from pre-encoded sentences.
    pub fn from_sentences<I, S>(sentences: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u32]>,
    {
        let mut corpus = EncodedCorpus {
            ids: Vec::new(),
            bounds: vec![0],
        };
        for s in sentences {
            let s = s.as_ref();
            if !s.is_empty() {
                corpus.ids.extend_from_slice(s);
                corpus.bounds.push(corpus.ids.len());
            }
        }
        corpus
    }

    fn push_line(&mut self, line: &str, vocab: &Vocabulary) {
        let before = self.ids.len();
        for_each_token(line, |tok| {
            if let Some(id) = vocab.id(&tok) {
                self.ids.push(id);
            }
        });
        if self.ids.len() > before {
            self.bounds.push(self.ids.len());
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn num_sentences(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn sentences(&self) -> impl Iterator<Item = &[u32]> + '_ {
        self.bounds.windows(2).map(|b| &self.ids[b[0]..b[1]])
    }

    /// Every id must index into a vocabulary of `vocab_len` words.
    pub fn validate(&self, vocab_len: usize) -> Result<()> {
        if let Some(&bad) = self.ids.iter().find(|&&id| id as usize >= vocab_len) {
            return Err(Error::CorpusMismatch(format!(
                "token id {bad} out of range for vocabulary of {vocab_len} words"
            )));
        }
        Ok(())
    }

    /// Splits the token stream into `n` contiguous shards of near-equal
    /// size. A sentence that straddles a shard edge is cut there.
    pub fn shards(&self, n: usize) -> Vec<Range<usize>> {
        let n = n.max(1);
        let len = self.ids.len();
        (0..n)
            .map(|i| (i * len / n)..((i + 1) * len / n))
            .filter(|r| !r.is_empty())
            .collect()
    }

    /// Sentences intersected with a token range from [`shards`](Self::shards).
    pub fn shard_sentences(&self, range: Range<usize>) -> impl Iterator<Item = &[u32]> + '_ {
        let first = match self.bounds.binary_search(&range.start) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        self.bounds[first..]
            .windows(2)
            .take_while(move |b| b[0] < range.end)
            .map(move |b| &self.ids[b[0].max(range.start)..b[1].min(range.end)])
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).io_context(|| format!("reading {}", path.display()))?;
    Ok(match String::from_utf8(bytes) {
        Ok(s) => s,
        Err(e) => {
            log::warn!("{}: invalid UTF-8 replaced", path.display());
            String::from_utf8_lossy(e.as_bytes()).into_owned()
        }
    })
}
