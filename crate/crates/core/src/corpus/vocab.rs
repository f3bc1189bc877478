use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{for_each_line, for_each_token};
use crate::error::{Error, IoContext, Result};

/// Settings that determine a [`Vocabulary`] from raw counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VocabConfig {
    pub min_count: u64,
    /// Keep at most this many words (the most frequent ones).
    pub max_size: Option<usize>,
    /// Subsampling threshold `t`; `0` disables subsampling.
    pub subsample: f64,
    pub neg_table_size: usize,
    /// Exponent of the unigram distribution used for negative sampling.
    pub alpha: f64,
}

impl Default for VocabConfig {
    fn default() -> Self {
        VocabConfig {
            min_count: 5,
            max_size: None,
            subsample: 1e-4,
            neg_table_size: 10_000_000,
            alpha: 0.75,
        }
    }
}

impl VocabConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_count < 1 {
            return Err(Error::Config("min_count must be >= 1".into()));
        }
        if !(self.subsample.is_finite() && self.subsample >= 0.0) {
            return Err(Error::Config(format!(
                "subsample threshold must be >= 0 (got {})",
                self.subsample
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1] (got {})", self.alpha)));
        }
        if self.max_size == Some(0) {
            return Err(Error::Config("max_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// Word/id mapping with corpus counts, subsampling probabilities and the
/// negative-sampling table. Ids are assigned by descending count, ties
/// broken lexicographically. Immutable once built.
#[derive(Clone, Debug)]
pub struct Vocabulary {
    config: VocabConfig,
    words: Vec<String>,
    index: HashMap<String, u32>,
    counts: Vec<u64>,
    total_tokens: u64,
    keep_prob: Vec<f64>,
    neg_table: Vec<u32>,
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.words == other.words && self.counts == other.counts
    }
}

impl Vocabulary {
    /// Counts a token stream and builds the vocabulary.
    pub fn build<I, S>(tokens: I, config: &VocabConfig) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut counts: HashMap<String, u64> = HashMap::new();
        for tok in tokens {
            bump(&mut counts, tok.as_ref());
        }
        Self::from_counts(counts, config)
    }

    /// Counts every token of the given corpus files.
    pub fn from_files(paths: &[PathBuf], config: &VocabConfig) -> Result<Self> {
        let mut counts: HashMap<String, u64> = HashMap::new();
        for_each_line(paths, |line| for_each_token(line, |t| bump(&mut counts, &t)))?;
        Self::from_counts(counts, config)
    }

    pub fn from_counts(counts: impl IntoIterator<Item = (String, u64)>, config: &VocabConfig) -> Result<Self> {
        config.validate()?;
        let mut all: Vec<(String, u64)> = counts.into_iter().filter(|(_, c)| *c > 0).collect();
        if all.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        all.retain(|(_, c)| *c >= config.min_count);
        if all.is_empty() {
            return Err(Error::NoWordsRetained {
                min_count: config.min_count,
            });
        }
        all.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        if let Some(cap) = config.max_size {
            all.truncate(cap);
        }
        if config.neg_table_size < all.len() {
            return Err(Error::Config(format!(
                "neg_table_size {} is smaller than the vocabulary ({} words)",
                config.neg_table_size,
                all.len()
            )));
        }

        let (words, counts): (Vec<String>, Vec<u64>) = all.into_iter().unzip();
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect();
        let total_tokens = counts.iter().sum();
        let keep_prob = keep_probabilities(&counts, total_tokens, config.subsample);
        let neg_table = unigram_table(&counts, config.alpha, config.neg_table_size);
        Ok(Vocabulary {
            config: config.clone(),
            words,
            index,
            counts,
            total_tokens,
            keep_prob,
            neg_table,
        })
    }

    pub fn config(&self) -> &VocabConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn keep_prob(&self, id: u32) -> f64 {
        self.keep_prob[id as usize]
    }

    pub fn keep_probs(&self) -> &[f64] {
        &self.keep_prob
    }

    pub fn neg_table(&self) -> &[u32] {
        &self.neg_table
    }

    #[inline]
    pub fn sample_negative<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.neg_table[rng.random_range(0..self.neg_table.len())]
    }

    /// Ids of the `fraction` most frequent words, at least one.
    pub fn frequent_cutoff(&self, fraction: f64) -> usize {
        ((self.len() as f64 * fraction).ceil() as usize).clamp(1, self.len())
    }

    pub fn encode<'a>(&'a self, tokens: impl IntoIterator<Item = &'a str>) -> Vec<u32> {
        tokens.into_iter().filter_map(|t| self.id(t)).collect()
    }

    /// `word<TAB>count` lines in id order.
    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        let ctx = || format!("writing vocabulary {}", path.display());
        let mut out = BufWriter::new(File::create(path).io_context(ctx)?);
        for (w, c) in self.words.iter().zip(&self.counts) {
            writeln!(out, "{w}\t{c}").io_context(ctx)?;
        }
        out.flush().io_context(ctx)
    }

    pub fn read_tsv(path: &Path, config: &VocabConfig) -> Result<Self> {
        let file = File::open(path).io_context(|| format!("opening {}", path.display()))?;
        let mut counts = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.io_context(|| format!("reading {}", path.display()))?;
            if line.is_empty() {
                continue;
            }
            let parse_err = |msg: &str| Error::Parse {
                path: path.to_owned(),
                line: i + 1,
                msg: msg.to_owned(),
            };
            let (word, count) = line
                .split_once('\t')
                .ok_or_else(|| parse_err("expected word<TAB>count"))?;
            let count = count.trim().parse().map_err(|_| parse_err("bad count"))?;
            counts.push((word.to_owned(), count));
        }
        Self::from_counts(counts, config)
    }
}

fn bump(counts: &mut HashMap<String, u64>, tok: &str) {
    if let Some(c) = counts.get_mut(tok) {
        *c += 1;
    } else {
        counts.insert(tok.to_owned(), 1);
    }
}

/// `min(1, sqrt(t/f) + t/f)` with `f` the relative frequency.
fn keep_probabilities(counts: &[u64], total: u64, t: f64) -> Vec<f64> {
    counts
        .iter()
        .map(|&c| {
            if t <= 0.0 {
                return 1.0;
            }
            let ratio = t / (c as f64 / total as f64);
            (ratio.sqrt() + ratio).min(1.0)
        })
        .collect()
}

/// Fills `size` slots so word `w` occupies within one slot of
/// `size * c_w^alpha / sum(c^alpha)`: slot boundaries are the rounded
/// cumulative mass.
fn unigram_table(counts: &[u64], alpha: f64, size: usize) -> Vec<u32> {
    let powered: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(alpha)).collect();
    let norm: f64 = powered.iter().sum();
    let mut table = Vec::with_capacity(size);
    let mut cum = 0.0;
    for (id, p) in powered.iter().enumerate() {
        cum += p / norm;
        let end = if id + 1 == powered.len() {
            size
        } else {
            ((cum * size as f64).round() as usize).min(size)
        };
        while table.len() < end {
            table.push(id as u32);
        }
    }
    table
}
