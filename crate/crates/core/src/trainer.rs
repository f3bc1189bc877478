//! Negative-sampling SGD for all three models.
//!
//! Workers train on disjoint shards of the corpus and write to one shared
//! set of parameters without locks (Hogwild). Races between workers can
//! lose individual updates; the single-worker path is fully deterministic
//! for a fixed seed.

use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{EncodedCorpus, TrainingWindow, VocabConfig, Vocabulary, Windows};
use crate::error::{Error, Result};
use crate::model::{self, ApplySink, GradSink, Gradients, Mode, ModelOptions, ModelParams, Scratch, WindowScore};
use crate::real::Real;
use crate::subword::SubwordMap;

/// Stream id reserved for parameter initialization.
const INIT_STREAM: u64 = u64::MAX;

/// Default per-row gradient norm clip.
pub const DEFAULT_MAX_GRAD_NORM: f64 = 100.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub mode: Mode,
    /// Embedding dimension.
    pub dim: usize,
    /// Key/query dimension.
    pub dim_kq: usize,
    /// Maximum context half-width.
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    /// Final learning rate; `1e-4 * initial_lr` when unset.
    pub min_lr: Option<f64>,
    /// Learning-rate multiplier for the key and query matrices.
    pub kq_lr_multiplier: f64,
    /// Per-row gradient norm clip applied to every SGD update.
    pub max_grad_norm: Option<f64>,
    pub seed: u64,
    pub workers: usize,
    pub vocab: VocabConfig,
    pub model: ModelOptions,
    /// Emit a progress line to stderr every this many corpus tokens.
    pub progress_interval: Option<u64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            mode: Mode::Awe,
            dim: 500,
            dim_kq: 50,
            window: 5,
            negatives: 5,
            epochs: 5,
            initial_lr: 0.05,
            min_lr: None,
            kq_lr_multiplier: 1.0,
            max_grad_norm: Some(DEFAULT_MAX_GRAD_NORM),
            seed: 1,
            workers: 1,
            vocab: VocabConfig::default(),
            model: ModelOptions::default(),
            progress_interval: None,
        }
    }
}

impl TrainConfig {
    pub fn min_lr(&self) -> f64 {
        self.min_lr.unwrap_or(self.initial_lr * 1e-4)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dim", self.dim),
            ("window", self.window),
            ("negatives", self.negatives),
            ("epochs", self.epochs),
            ("workers", self.workers),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be >= 1")));
            }
        }
        if self.mode.has_attention() && self.dim_kq == 0 {
            return Err(Error::Config("dim_kq must be >= 1".into()));
        }
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return Err(Error::Config("initial_lr must be > 0".into()));
        }
        let min = self.min_lr();
        if !(min > 0.0 && min < self.initial_lr) {
            return Err(Error::Config(format!("min_lr must lie in (0, initial_lr) (got {min})")));
        }
        if !(self.kq_lr_multiplier >= 0.0 && self.kq_lr_multiplier.is_finite()) {
            return Err(Error::Config("kq_lr_multiplier must be >= 0".into()));
        }
        if let Some(c) = self.max_grad_norm {
            if c.is_nan() || c <= 0.0 {
                return Err(Error::Config("max_grad_norm must be > 0".into()));
            }
        }
        if !(self.model.attn_clamp > 0.0 && self.model.logit_clamp > 0.0) {
            return Err(Error::Config("clamp values must be > 0".into()));
        }
        self.vocab.validate()
    }
}

/// Progress through the global schedule; enough to resume training.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainState {
    pub epochs_completed: usize,
    pub words_processed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub windows: u64,
    pub words: u64,
    pub seconds: f64,
    pub words_per_sec: f64,
    pub windows_per_sec: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub config: TrainConfig,
    /// Verbatim text of the config file, when one was used.
    pub config_file: Option<String>,
    pub epochs: Vec<EpochStats>,
    pub wall_seconds: f64,
    pub words_per_sec: f64,
    pub windows_per_sec: f64,
}

impl TrainReport {
    fn new(config: &TrainConfig) -> Self {
        TrainReport {
            config: config.clone(),
            config_file: None,
            epochs: Vec::new(),
            wall_seconds: 0.0,
            words_per_sec: 0.0,
            windows_per_sec: 0.0,
        }
    }

    fn push(&mut self, stats: EpochStats) {
        self.wall_seconds += stats.seconds;
        self.epochs.push(stats);
        let words: u64 = self.epochs.iter().map(|e| e.words).sum();
        let windows: u64 = self.epochs.iter().map(|e| e.windows).sum();
        if self.wall_seconds > 0.0 {
            self.words_per_sec = words as f64 / self.wall_seconds;
            self.windows_per_sec = windows as f64 / self.wall_seconds;
        }
    }
}

/// Analytic gradient of [`model::window_loss`] for one window. See
/// [`model`] for the scoring functions.
///
/// With targets `t` (center labelled 1, negatives 0), `g_t = σ(s_t) -
/// label_t` and `G_c = Σ g_t · target_vec(t)`:
///
/// * target row `t` gets `g_t · c`;
/// * context row `i` gets `a_i · G_c`;
/// * the center's key gets `Σ_i h_i a_i q_i` and query `i` gets
///   `h_i a_i k_center`, where `h_i = G_c · u_i`. Terms whose key-query
///   logit is clamped contribute nothing.
///
/// In AWE-S each word-level term is added to every unit row of the word.
/// The score clamp inside the loss is not differentiated: `g_t` uses the
/// exact `σ(s_t)`.
pub fn gradients<T: Real>(
    window: &TrainingWindow,
    negatives: &[u32],
    params: &ModelParams<T>,
    subwords: Option<&SubwordMap>,
) -> Result<(WindowScore, Gradients)> {
    let mut s = Scratch::new();
    model::score_into(window.center, &window.context, negatives, params, subwords, &mut s)?;
    let mut grads = Gradients::default();
    model::backward(params.mode, subwords, params.dim_kq, &mut s, &mut grads);
    Ok((WindowScore::from_scratch(s), grads))
}

/// Learning rates and gradient clip for one update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepSize {
    pub lr: f64,
    pub lr_kq: f64,
    pub max_grad_norm: Option<f64>,
}

impl StepSize {
    /// The same rate for every matrix, without clipping.
    pub fn uniform(lr: f64) -> Self {
        StepSize {
            lr,
            lr_kq: lr,
            max_grad_norm: None,
        }
    }

    fn sink<'p, T>(self, params: &'p mut ModelParams<T>) -> ApplySink<'p, T> {
        ApplySink {
            params,
            lr: self.lr,
            lr_kq: self.lr_kq,
            max_norm: self.max_grad_norm.unwrap_or(f64::INFINITY),
        }
    }
}

/// `row -= lr * grad` for every row in `grads`, with the rate and clip of
/// `step` applied row by row.
pub fn apply_update<T: Real>(params: &mut ModelParams<T>, grads: &Gradients, step: StepSize) {
    let mut sink = step.sink(params);
    for (m, row, g) in grads.iter() {
        sink.add(m, row, 1.0, g, crate::real::dot(g, g).sqrt());
    }
}

/// One SGD step on one window, updating `params` in place. Returns the
/// window loss before the update.
pub fn sgd_step<T: Real>(
    params: &mut ModelParams<T>,
    subwords: Option<&SubwordMap>,
    window: &TrainingWindow,
    negatives: &[u32],
    step: StepSize,
    scratch: &mut Scratch,
) -> Result<f64> {
    model::score_into(window.center, &window.context, negatives, params, subwords, scratch)?;
    Ok(step_loaded(params, subwords, step, scratch))
}

#[inline]
fn step_loaded<T: Real>(
    params: &mut ModelParams<T>,
    subwords: Option<&SubwordMap>,
    step: StepSize,
    s: &mut Scratch,
) -> f64 {
    let (mode, dim_kq) = (params.mode, params.dim_kq);
    model::backward(mode, subwords, dim_kq, s, &mut step.sink(params));
    s.loss
}

/// Shared parameters for lock-free concurrent updates.
struct Hogwild<T>(*mut ModelParams<T>);

// SAFETY: workers write rows without synchronization by design. Each
// access is a plain load or store of a float; a lost or torn update only
// perturbs SGD. The pointer outlives the scoped worker threads.
unsafe impl<T: Send + Sync> Sync for Hogwild<T> {}
unsafe impl<T: Send + Sync> Send for Hogwild<T> {}

impl<T> Hogwild<T> {
    /// # Safety
    /// Callers may alias this mutable reference across threads only for
    /// element-wise float updates, and only while the owner is borrowed.
    #[allow(clippy::mut_from_ref)]
    unsafe fn get(&self) -> &mut ModelParams<T> {
        &mut *self.0
    }
}

struct ShardOutcome {
    loss_sum: f64,
    windows: u64,
}

struct EpochContext<'a> {
    config: &'a TrainConfig,
    vocab: &'a Vocabulary,
    subwords: Option<&'a SubwordMap>,
    corpus: &'a EncodedCorpus,
    epoch: usize,
    total_words: u64,
    words: &'a AtomicU64,
    abort: &'a AtomicBool,
    started: Instant,
}

impl EpochContext<'_> {
    fn lr(&self, processed: u64) -> f64 {
        let init = self.config.initial_lr;
        let min = self.config.min_lr();
        let frac = (processed as f64 / self.total_words.max(1) as f64).min(1.0);
        (init - (init - min) * frac).max(min)
    }

    fn run_shard<T: Real>(
        &self,
        params: &mut ModelParams<T>,
        shard: usize,
        range: std::ops::Range<usize>,
    ) -> Result<ShardOutcome> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(((self.epoch as u64) << 24) | shard as u64);
        let mut gen = Windows::new(self.vocab, self.config.window, rng);
        let mut scratch = Scratch::new();
        let mut context = Vec::with_capacity(2 * self.config.window);
        let mut negatives = Vec::with_capacity(self.config.negatives);
        let normalized = params.options.normalize_attention;
        let kq_mult = self.config.kq_lr_multiplier;
        let interval = self.config.progress_interval;

        let mut out = ShardOutcome {
            loss_sum: 0.0,
            windows: 0,
        };
        let (mut since_report_loss, mut since_report_windows) = (0.0, 0u64);
        let mut next_report = interval.unwrap_or(u64::MAX);
        let mut local_words = 0u64;
        let mut lr = self.lr(self.words.load(Ordering::Relaxed));

        for sentence in self.corpus.shard_sentences(range) {
            if self.abort.load(Ordering::Relaxed) {
                break;
            }
            gen.reset(sentence);
            let kept = gen.kept_len().max(1);
            let mut flushed = 0u64;
            while let Some(center) = gen.next_into(&mut context) {
                negatives.clear();
                for _ in 0..self.config.negatives {
                    negatives.push(self.vocab.sample_negative(gen.rng_mut()));
                }
                scratch.load(center, &context, &negatives, normalized);
                model::forward(params, self.subwords, &mut scratch);
                if !scratch.loss.is_finite() {
                    self.abort.store(true, Ordering::Relaxed);
                    return Err(Error::NonFinite(format!(
                        "loss {} in epoch {} at center {:?} (about {} words processed)",
                        scratch.loss,
                        self.epoch + 1,
                        self.vocab.word(center),
                        self.words.load(Ordering::Relaxed)
                    )));
                }
                let step = StepSize {
                    lr,
                    lr_kq: lr * kq_mult,
                    max_grad_norm: self.config.max_grad_norm,
                };
                let loss = step_loaded(params, self.subwords, step, &mut scratch);
                out.loss_sum += loss;
                out.windows += 1;
                since_report_loss += loss;
                since_report_windows += 1;

                // Learning-rate and progress bookkeeping every ~10k tokens.
                let done = (sentence.len() as u64 * gen.position() as u64) / kept as u64;
                if done - flushed >= 10_000 {
                    let processed = self.words.fetch_add(done - flushed, Ordering::Relaxed) + done - flushed;
                    local_words += done - flushed;
                    flushed = done;
                    lr = self.lr(processed);
                    if local_words >= next_report {
                        next_report += interval.unwrap_or(u64::MAX);
                        self.report(lr, since_report_loss / since_report_windows.max(1) as f64, processed);
                        since_report_loss = 0.0;
                        since_report_windows = 0;
                    }
                }
            }
            let rest = sentence.len() as u64 - flushed;
            let processed = self.words.fetch_add(rest, Ordering::Relaxed) + rest;
            local_words += rest;
            lr = self.lr(processed);
            if local_words >= next_report {
                next_report += interval.unwrap_or(u64::MAX);
                self.report(lr, since_report_loss / since_report_windows.max(1) as f64, processed);
                since_report_loss = 0.0;
                since_report_windows = 0;
            }
        }
        Ok(out)
    }

    fn report(&self, lr: f64, loss: f64, processed: u64) {
        let epoch_words = processed.saturating_sub(self.epoch as u64 * self.corpus.len() as u64);
        let secs = self.started.elapsed().as_secs_f64().max(1e-9);
        eprintln!(
            "epoch {} | lr {:.6} | loss {:.4} | words/sec {:.0}",
            self.epoch + 1,
            lr,
            loss,
            epoch_words as f64 / secs
        );
    }
}

/// Owns the parameters and the position in the training schedule.
pub struct Trainer<'a, T> {
    config: TrainConfig,
    vocab: &'a Vocabulary,
    subwords: Option<&'a SubwordMap>,
    corpus: &'a EncodedCorpus,
    params: ModelParams<T>,
    state: TrainState,
    report: TrainReport,
}

impl<'a, T: Real> Trainer<'a, T> {
    /// Fresh parameters initialized from `config.seed`.
    pub fn new(
        config: TrainConfig,
        vocab: &'a Vocabulary,
        subwords: Option<&'a SubwordMap>,
        corpus: &'a EncodedCorpus,
    ) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(INIT_STREAM);
        let params = ModelParams::init(
            config.mode,
            vocab.len(),
            subwords.map(SubwordMap::num_units),
            config.dim,
            config.dim_kq,
            config.model.clone(),
            &mut rng,
        )?;
        Self::resume(config, vocab, subwords, corpus, params, TrainState::default())
    }

    /// Continues from saved parameters and schedule position.
    pub fn resume(
        config: TrainConfig,
        vocab: &'a Vocabulary,
        subwords: Option<&'a SubwordMap>,
        corpus: &'a EncodedCorpus,
        params: ModelParams<T>,
        state: TrainState,
    ) -> Result<Self> {
        config.validate()?;
        if params.mode != config.mode || params.dim != config.dim {
            return Err(Error::Config(format!(
                "parameters ({} , dim {}) do not match config ({}, dim {})",
                params.mode, params.dim, config.mode, config.dim
            )));
        }
        if params.num_words() != vocab.len() {
            return Err(Error::CorpusMismatch(format!(
                "parameters cover {} words, vocabulary has {}",
                params.num_words(),
                vocab.len()
            )));
        }
        params.check_subwords(subwords)?;
        if config.mode != Mode::AweS && subwords.is_some() {
            log::warn!("subword map ignored in {} mode", config.mode);
        }
        let subwords = if config.mode == Mode::AweS { subwords } else { None };
        corpus.validate(vocab.len())?;
        if corpus.is_empty() {
            return Err(Error::CorpusMismatch("no in-vocabulary tokens in the corpus".into()));
        }
        let report = TrainReport::new(&config);
        Ok(Trainer {
            config,
            vocab,
            subwords,
            corpus,
            params,
            state,
            report,
        })
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn state(&self) -> TrainState {
        self.state
    }

    pub fn report(&self) -> &TrainReport {
        &self.report
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn is_done(&self) -> bool {
        self.state.epochs_completed >= self.config.epochs
    }

    /// Runs one pass over the corpus.
    pub fn train_epoch(&mut self) -> Result<EpochStats> {
        let epoch = self.state.epochs_completed;
        let started = Instant::now();
        let words = AtomicU64::new(self.state.words_processed);
        let abort = AtomicBool::new(false);
        let ctx = EpochContext {
            config: &self.config,
            vocab: self.vocab,
            subwords: self.subwords,
            corpus: self.corpus,
            epoch,
            total_words: self.config.epochs as u64 * self.corpus.len() as u64,
            words: &words,
            abort: &abort,
            started,
        };

        let shards = self.corpus.shards(self.config.workers);
        let outcomes: Vec<Result<ShardOutcome>> = if shards.len() == 1 {
            vec![ctx.run_shard(&mut self.params, 0, shards[0].clone())]
        } else {
            let shared = Hogwild(&mut self.params as *mut ModelParams<T>);
            let results = std::thread::scope(|scope| {
                let handles: Vec<_> = shards
                    .iter()
                    .enumerate()
                    .map(|(i, range)| {
                        let (ctx, shared, range) = (&ctx, &shared, range.clone());
                        // SAFETY: Hogwild contract, see `Hogwild`.
                        scope.spawn(move || ctx.run_shard(unsafe { shared.get() }, i, range))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("training worker panicked"))
                    .collect()
            });
            results
        };

        let mut loss_sum = 0.0;
        let mut windows = 0;
        for o in outcomes {
            let o = o?;
            loss_sum += o.loss_sum;
            windows += o.windows;
        }
        if let Some((m, r, c)) = self.params.find_non_finite() {
            return Err(Error::NonFinite(format!(
                "parameter {m:?}[{r}][{c}] after epoch {}",
                epoch + 1
            )));
        }

        let seconds = started.elapsed().as_secs_f64();
        let epoch_words = self.corpus.len() as u64;
        self.state.epochs_completed += 1;
        self.state.words_processed = (epoch as u64 + 1) * epoch_words;
        let stats = EpochStats {
            epoch: epoch + 1,
            mean_loss: if windows > 0 { loss_sum / windows as f64 } else { 0.0 },
            windows,
            words: epoch_words,
            seconds,
            words_per_sec: epoch_words as f64 / seconds.max(1e-9),
            windows_per_sec: windows as f64 / seconds.max(1e-9),
        };
        if self.config.progress_interval.is_some() {
            eprintln!(
                "epoch {} done | loss {:.4} | words/sec {:.0}",
                stats.epoch, stats.mean_loss, stats.words_per_sec
            );
        }
        self.report.push(stats.clone());
        Ok(stats)
    }

    /// Trains the remaining epochs.
    pub fn run(mut self) -> Result<(ModelParams<T>, TrainReport)> {
        while !self.is_done() {
            self.train_epoch()?;
        }
        Ok((self.params, self.report))
    }

    pub fn into_parts(self) -> (ModelParams<T>, TrainState, TrainReport) {
        (self.params, self.state, self.report)
    }
}

/// Encodes the corpus files with `vocab` and trains from scratch.
pub fn train<T: Real>(
    corpus: &[PathBuf],
    config: &TrainConfig,
    vocab: &Vocabulary,
    subwords: Option<&SubwordMap>,
) -> Result<(ModelParams<T>, TrainReport)> {
    let encoded = EncodedCorpus::from_files(corpus, vocab)?;
    Trainer::new(config.clone(), vocab, subwords, &encoded)?.run()
}

#[cfg(test)]
mod tests;
