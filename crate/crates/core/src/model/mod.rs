//! Parameters and scoring for CBOW, AWE and AWE-S.
//!
//! All three models predict a masked center word from a context window
//! under negative sampling:
//!
//! * CBOW: `c = Σ u_i`, score of target `t` is `v_t · c`.
//! * AWE: attention `a_i = exp(k_center · q_i)` (unnormalized),
//!   `c = Σ a_i u_i`, score `u_t · c` (the embedding doubles as the target
//!   matrix).
//! * AWE-S: like AWE, with every word vector replaced by the sum of its
//!   subword unit vectors, for context words and targets alike.
//!
//! fastText also sums subword vectors on the context side but scores the
//! target with a separate per-word vector; that model is not provided here.

mod kernel;
mod params;

use std::collections::BTreeMap;

pub use kernel::Scratch;
pub(crate) use kernel::{backward, forward, ApplySink, GradSink};

pub use params::{Matrix, Mode, ModelOptions, ModelParams, ParamMatrix};

use crate::corpus::TrainingWindow;
use crate::error::{Error, Result};
use crate::real::{dot, Real};
use crate::subword::SubwordMap;

/// Per-window scoring result.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowScore {
    /// `c` (CBOW) or `c_attn`.
    pub context_vec: Vec<f64>,
    /// Attention weight per context word; all ones for CBOW.
    pub attn: Vec<f64>,
    pub loss: f64,
    /// Unclamped score of the true center.
    pub pos_score: f64,
    pub neg_scores: Vec<f64>,
}

impl WindowScore {
    pub(crate) fn from_scratch(s: Scratch) -> Self {
        WindowScore {
            pos_score: s.scores[0],
            neg_scores: s.scores[1..].to_vec(),
            context_vec: s.c,
            attn: s.attn,
            loss: s.loss,
        }
    }
}

fn check_window<T: Real>(
    params: &ModelParams<T>,
    subwords: Option<&SubwordMap>,
    center: u32,
    context: &[u32],
    negatives: &[u32],
) -> Result<()> {
    params.check_subwords(subwords)?;
    if context.is_empty() {
        return Err(Error::EmptyContext);
    }
    for &w in std::iter::once(&center).chain(context).chain(negatives) {
        params.check_word(w)?;
    }
    Ok(())
}

/// Attention weights of the context words for `center`:
/// `exp(clamp(k_center · q_i))`, in context order.
pub fn attention_weights<T: Real>(center: u32, context: &[u32], params: &ModelParams<T>) -> Result<Vec<f64>> {
    if !params.mode.has_attention() {
        return Err(Error::AttentionUndefined);
    }
    for &w in std::iter::once(&center).chain(context) {
        params.check_word(w)?;
    }
    let mut s = Scratch::new();
    s.load(center, context, &[], params.options.normalize_attention);
    kernel::attention_into(params, &mut s);
    Ok(s.attn)
}

/// The vector representing vocabulary word `word`: its `u` row, or the sum
/// of its unit rows in AWE-S.
pub fn word_vector<T: Real>(word: u32, params: &ModelParams<T>, subwords: Option<&SubwordMap>) -> Result<Vec<f64>> {
    params.check_subwords(subwords)?;
    params.check_word(word)?;
    let mut out = vec![0.0; params.dim];
    kernel::word_vector_into(params, subwords, word, &mut out);
    Ok(out)
}

/// Sum of the given unit rows (AWE-S composition for arbitrary unit sets).
pub fn unit_sum<T: Real>(units: &[u32], params: &ModelParams<T>) -> Vec<f64> {
    let mut out = vec![0.0; params.dim];
    for &u in units {
        crate::real::axpy_into(&mut out, 1.0, params.u.row(u as usize));
    }
    out
}

/// Context vector and the attention weights used to build it.
pub fn context_vector<T: Real>(
    center: u32,
    context: &[u32],
    params: &ModelParams<T>,
    subwords: Option<&SubwordMap>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_window(params, subwords, center, context, &[])?;
    let mut s = Scratch::new();
    s.load(center, context, &[], params.options.normalize_attention);
    kernel::context_into(params, subwords, &mut s);
    Ok((s.c, s.attn))
}

/// Negative-sampling loss of one window:
/// `-log σ(s⁺) - Σ_n log σ(-s_n)`, scores clamped to `±logit_clamp`.
pub fn window_loss<T: Real>(
    window: &TrainingWindow,
    negatives: &[u32],
    params: &ModelParams<T>,
    subwords: Option<&SubwordMap>,
) -> Result<WindowScore> {
    let mut s = Scratch::new();
    score_into(window.center, &window.context, negatives, params, subwords, &mut s)?;
    Ok(WindowScore::from_scratch(s))
}

pub(crate) fn score_into<T: Real>(
    center: u32,
    context: &[u32],
    negatives: &[u32],
    params: &ModelParams<T>,
    subwords: Option<&SubwordMap>,
    s: &mut Scratch,
) -> Result<()> {
    check_window(params, subwords, center, context, negatives)?;
    s.load(center, context, negatives, params.options.normalize_attention);
    kernel::forward(params, subwords, s);
    Ok(())
}

/// Full-softmax probability of `center` given `context` over the whole
/// vocabulary. Cost is linear in the vocabulary; meant for debugging
/// small models.
///
/// In the attention modes the context vector is built with the key of
/// `center`, so the values for different centers of one context do not
/// form a single distribution.
pub fn full_softmax_probability<T: Real>(
    center: u32,
    context: &[u32],
    params: &ModelParams<T>,
    subwords: Option<&SubwordMap>,
) -> Result<f64> {
    let (c, _) = context_vector(center, context, params, subwords)?;
    let mut scores = Vec::with_capacity(params.num_words());
    let mut tv = vec![0.0; params.dim];
    for w in 0..params.num_words() as u32 {
        let s = match &params.v {
            Some(v) => crate::real::dot_mixed(v.row(w as usize), &c),
            None => {
                kernel::word_vector_into(params, subwords, w, &mut tv);
                dot(&tv, &c)
            }
        };
        scores.push(s);
    }
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = scores.iter().map(|s| (s - max).exp()).sum();
    Ok((scores[center as usize] - max).exp() / z)
}

/// Sparse gradient: one dense vector per touched row, keyed by matrix and
/// row. Contributions to the same row accumulate.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Gradients {
    rows: BTreeMap<(ParamMatrix, u32), Vec<f64>>,
}

impl Gradients {
    pub fn get(&self, matrix: ParamMatrix, row: u32) -> Option<&[f64]> {
        self.rows.get(&(matrix, row)).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamMatrix, u32, &[f64])> {
        self.rows.iter().map(|(&(m, r), g)| (m, r, g.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Element-wise sum with another gradient set.
    pub fn merge(&mut self, other: &Gradients) {
        for (m, r, g) in other.iter() {
            self.add(m, r, 1.0, g, 0.0);
        }
    }
}

impl GradSink for Gradients {
    fn add(&mut self, matrix: ParamMatrix, row: u32, scale: f64, dir: &[f64], _dir_norm: f64) {
        let acc = self.rows.entry((matrix, row)).or_insert_with(|| vec![0.0; dir.len()]);
        for (a, d) in acc.iter_mut().zip(dir) {
            *a += scale * d;
        }
    }
}
