use rand::Rng;

use super::Vocabulary;

/// One masked (center) word and the context used to predict it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TrainingWindow {
    pub center: u32,
    pub context: Vec<u32>,
}

/// Windows over a single encoded sentence.
///
/// Tokens are first subsampled (each kept with `keep_prob`), then for every
/// retained position an effective half-width is drawn uniformly from
/// `1..=b_max`. The window stops at the sentence edges and windows with no
/// context are skipped.
pub struct Windows<'v, R> {
    vocab: &'v Vocabulary,
    b_max: usize,
    rng: R,
    kept: Vec<u32>,
    pos: usize,
}

impl<'v, R: Rng> Windows<'v, R> {
    pub fn new(vocab: &'v Vocabulary, b_max: usize, rng: R) -> Self {
        assert!(b_max >= 1, "window size must be >= 1");
        Windows {
            vocab,
            b_max,
            rng,
            kept: Vec::new(),
            pos: 0,
        }
    }

    /// Starts a new sentence. Ids must be valid vocabulary indices.
    pub fn reset(&mut self, sentence: &[u32]) {
        self.kept.clear();
        self.pos = 0;
        for &id in sentence {
            let p = self.vocab.keep_prob(id);
            if p >= 1.0 || self.rng.random::<f64>() < p {
                self.kept.push(id);
            }
        }
    }

    /// Writes the next window's context into `context` and returns its
    /// center, or `None` at the end of the sentence.
    pub fn next_into(&mut self, context: &mut Vec<u32>) -> Option<u32> {
        while self.pos < self.kept.len() {
            let pos = self.pos;
            self.pos += 1;
            let b = self.rng.random_range(1..=self.b_max);
            let lo = pos.saturating_sub(b);
            let hi = (pos + b + 1).min(self.kept.len());
            context.clear();
            context.extend_from_slice(&self.kept[lo..pos]);
            context.extend_from_slice(&self.kept[pos + 1..hi]);
            if !context.is_empty() {
                return Some(self.kept[pos]);
            }
        }
        None
    }

    /// Number of tokens of the current sentence that survived
    /// subsampling.
    pub fn kept_len(&self) -> usize {
        self.kept.len()
    }

    /// Retained positions consumed so far in the current sentence.
    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn rng_mut(&mut self) -> &mut R {
        &mut self.rng
    }

    pub fn into_rng(self) -> R {
        self.rng
    }
}

/// All windows of a sequence of sentences, each given as raw tokens.
/// Out-of-vocabulary tokens are dropped before windowing.
pub fn windows<S, R>(sentences: &[S], vocab: &Vocabulary, b_max: usize, rng: R) -> Vec<TrainingWindow>
where
    S: AsRef<[String]>,
    R: Rng,
{
    let mut gen = Windows::new(vocab, b_max, rng);
    let mut out = Vec::new();
    let mut ctx = Vec::new();
    for s in sentences {
        let ids = vocab.encode(s.as_ref().iter().map(String::as_str));
        gen.reset(&ids);
        while let Some(center) = gen.next_into(&mut ctx) {
            out.push(TrainingWindow {
                center,
                context: ctx.clone(),
            });
        }
    }
    out
}
