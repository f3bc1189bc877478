//! Per-window forward and backward passes shared by scoring, gradient
//! extraction and the SGD hot loop.
//!
//! The forward pass copies everything the backward pass needs into a
//! [`Scratch`], so gradients can be emitted while the parameters are being
//! written to.

use super::params::{Mode, ModelParams, ParamMatrix};
use crate::real::{axpy_into, dot, dot_mixed, Real};
use crate::subword::SubwordMap;

/// Working buffers for one window. Reused across windows.
#[derive(Clone, Debug, Default)]
pub struct Scratch {
    pub(crate) center: u32,
    pub(crate) context: Vec<u32>,
    pub(crate) targets: Vec<u32>,
    /// Context word vectors, `context.len() * dim`.
    pub(crate) ctx_vecs: Vec<f64>,
    pub(crate) logits: Vec<f64>,
    pub(crate) clamped: Vec<bool>,
    pub(crate) attn: Vec<f64>,
    /// Query rows of the context words, `context.len() * dim_kq`.
    pub(crate) queries: Vec<f64>,
    pub(crate) key: Vec<f64>,
    pub(crate) c: Vec<f64>,
    pub(crate) g_c: Vec<f64>,
    pub(crate) target_vec: Vec<f64>,
    pub(crate) scores: Vec<f64>,
    pub(crate) g: Vec<f64>,
    pub(crate) d_logits: Vec<f64>,
    pub(crate) d_key: Vec<f64>,
    pub(crate) normalized: bool,
    pub(crate) loss: f64,
}

impl Scratch {
    pub fn new() -> Self {
        Self::default()
    }
}

/// `log(1 + e^x)` without overflow.
#[inline]
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Word vector of `word` into `out`: the `u` row, or the sum of its
/// subword unit rows in AWE-S.
#[inline]
pub(crate) fn word_vector_into<T: Real>(
    params: &ModelParams<T>,
    subwords: Option<&SubwordMap>,
    word: u32,
    out: &mut [f64],
) {
    out.fill(0.0);
    match (params.mode, subwords) {
        (Mode::AweS, Some(sw)) => {
            for &unit in sw.set(word) {
                axpy_into(out, 1.0, params.u.row(unit as usize));
            }
        }
        _ => axpy_into(out, 1.0, params.u.row(word as usize)),
    }
}

/// Computes attention logits and weights for the context of `center`
/// into `s.logits`, `s.clamped` and `s.attn` (all ones for CBOW).
pub(crate) fn attention_into<T: Real>(params: &ModelParams<T>, s: &mut Scratch) {
    let n = s.context.len();
    s.logits.clear();
    s.clamped.clear();
    s.attn.clear();
    let (Some(k), Some(q)) = (params.k.as_ref(), params.q.as_ref()) else {
        s.logits.resize(n, 0.0);
        s.clamped.resize(n, false);
        s.attn.resize(n, 1.0);
        return;
    };
    let dk = params.dim_kq;
    let clamp = params.options.attn_clamp;
    s.key.clear();
    s.key.extend(k.row(s.center as usize).iter().map(|x| x.to_f64()));
    s.queries.clear();
    for &w in &s.context {
        let row = q.row(w as usize);
        let start = s.queries.len();
        s.queries.extend(row.iter().map(|x| x.to_f64()));
        let e = dot(&s.key, &s.queries[start..start + dk]);
        s.logits.push(e);
        s.clamped.push(e.abs() > clamp);
        s.attn.push(e.clamp(-clamp, clamp).exp());
    }
    if params.options.normalize_attention {
        let z: f64 = s.attn.iter().sum();
        for a in &mut s.attn {
            *a /= z;
        }
    }
}

/// Computes the context vector (`s.c`) and, for attention modes, the
/// context word vectors.
pub(crate) fn context_into<T: Real>(params: &ModelParams<T>, subwords: Option<&SubwordMap>, s: &mut Scratch) {
    let d = params.dim;
    let n = s.context.len();
    attention_into(params, s);
    s.c.clear();
    s.c.resize(d, 0.0);
    if params.mode == Mode::Cbow {
        for (&w, &a) in s.context.iter().zip(&s.attn) {
            axpy_into(&mut s.c, a, params.u.row(w as usize));
        }
        return;
    }
    s.ctx_vecs.resize(n * d, 0.0);
    for i in 0..n {
        let v = &mut s.ctx_vecs[i * d..(i + 1) * d];
        word_vector_into(params, subwords, s.context[i], v);
        let a = s.attn[i];
        for (c, x) in s.c.iter_mut().zip(v.iter()) {
            *c += a * x;
        }
    }
}

/// Forward pass over `center`, `context` and `negatives` already loaded in
/// `s`. Fills scores, per-target gradient coefficients, `G_c` and the loss.
pub(crate) fn forward<T: Real>(params: &ModelParams<T>, subwords: Option<&SubwordMap>, s: &mut Scratch) {
    let d = params.dim;
    context_into(params, subwords, s);
    let lc = params.options.logit_clamp;
    s.scores.clear();
    s.g.clear();
    s.g_c.clear();
    s.g_c.resize(d, 0.0);
    s.target_vec.resize(d, 0.0);
    let mut loss = 0.0;
    for (t, &word) in s.targets.iter().enumerate() {
        let label = if t == 0 { 1.0 } else { 0.0 };
        let score = match &params.v {
            Some(v) => {
                let row = v.row(word as usize);
                let sc = dot_mixed(row, &s.c);
                let g = sigmoid(sc) - label;
                axpy_into(&mut s.g_c, g, row);
                s.g.push(g);
                sc
            }
            None => {
                word_vector_into(params, subwords, word, &mut s.target_vec);
                let sc = dot(&s.target_vec, &s.c);
                let g = sigmoid(sc) - label;
                for (acc, x) in s.g_c.iter_mut().zip(&s.target_vec) {
                    *acc += g * x;
                }
                s.g.push(g);
                sc
            }
        };
        let clamped = score.clamp(-lc, lc);
        loss += if t == 0 { softplus(-clamped) } else { softplus(clamped) };
        s.scores.push(score);
    }
    s.loss = loss;
}

/// Receives `grad(row) += scale * dir` contributions.
pub(crate) trait GradSink {
    /// Adds `scale * dir` to the gradient of `row`; `dir_norm` is the
    /// Euclidean norm of `dir`.
    fn add(&mut self, matrix: ParamMatrix, row: u32, scale: f64, dir: &[f64], dir_norm: f64);
}

/// Emits the gradient of the forward pass held in `s`. Word-level
/// contributions to the embedding are spread over subword unit rows in
/// AWE-S.
pub(crate) fn backward(
    mode: Mode,
    subwords: Option<&SubwordMap>,
    dim_kq: usize,
    s: &mut Scratch,
    sink: &mut impl GradSink,
) {
    let embed = |sink: &mut dyn FnMut(ParamMatrix, u32), word: u32| match (mode, subwords) {
        (Mode::AweS, Some(sw)) => {
            for &unit in sw.set(word) {
                sink(ParamMatrix::U, unit);
            }
        }
        _ => sink(ParamMatrix::U, word),
    };

    let c_norm = dot(&s.c, &s.c).sqrt();
    let g_c_norm = dot(&s.g_c, &s.g_c).sqrt();

    // Targets: d/d(target vector) = g_t * c.
    for (t, &word) in s.targets.iter().enumerate() {
        let g = s.g[t];
        if mode == Mode::Cbow {
            sink.add(ParamMatrix::V, word, g, &s.c, c_norm);
        } else {
            embed(&mut |m, r| sink.add(m, r, g, &s.c, c_norm), word);
        }
    }

    // Context rows: d/d(u_i) = a_i * G_c.
    for (i, &word) in s.context.iter().enumerate() {
        let a = s.attn[i];
        embed(&mut |m, r| sink.add(m, r, a, &s.g_c, g_c_norm), word);
    }

    if !mode.has_attention() {
        return;
    }

    // Attention: dL/de_i = h_i a_i with h_i = G_c . u_i (unnormalized), or
    // a_i (h_i - sum_j a_j h_j) under normalization. Clamped logits get 0.
    let d = s.g_c.len();
    let n = s.context.len();
    s.d_logits.clear();
    for i in 0..n {
        s.d_logits.push(dot(&s.g_c, &s.ctx_vecs[i * d..(i + 1) * d]));
    }
    if s.normalized {
        let mean: f64 = s.d_logits.iter().zip(&s.attn).map(|(h, a)| h * a).sum();
        for (h, a) in s.d_logits.iter_mut().zip(&s.attn) {
            *h = a * (*h - mean);
        }
    } else {
        for (h, a) in s.d_logits.iter_mut().zip(&s.attn) {
            *h *= a;
        }
    }
    for (h, &c) in s.d_logits.iter_mut().zip(&s.clamped) {
        if c {
            *h = 0.0;
        }
    }
    let key_norm = dot(&s.key, &s.key).sqrt();
    s.d_key.clear();
    s.d_key.resize(dim_kq, 0.0);
    for i in 0..n {
        let de = s.d_logits[i];
        let q = &s.queries[i * dim_kq..(i + 1) * dim_kq];
        for (dk, x) in s.d_key.iter_mut().zip(q) {
            *dk += de * x;
        }
        sink.add(ParamMatrix::Q, s.context[i], de, &s.key, key_norm);
    }
    sink.add(ParamMatrix::K, s.center, 1.0, &s.d_key, dot(&s.d_key, &s.d_key).sqrt());
}

impl Scratch {
    pub(crate) fn load(&mut self, center: u32, context: &[u32], negatives: &[u32], normalized: bool) {
        self.center = center;
        self.context.clear();
        self.context.extend_from_slice(context);
        self.targets.clear();
        self.targets.push(center);
        self.targets.extend_from_slice(negatives);
        self.normalized = normalized;
    }
}

/// Applies `row -= lr * scale * dir` straight into the parameters.
pub(crate) struct ApplySink<'p, T> {
    pub params: &'p mut ModelParams<T>,
    pub lr: f64,
    pub lr_kq: f64,
    /// Row gradients longer than this are rescaled to this norm.
    pub max_norm: f64,
}

impl<T: Real> GradSink for ApplySink<'_, T> {
    #[inline]
    fn add(&mut self, matrix: ParamMatrix, row: u32, scale: f64, dir: &[f64], dir_norm: f64) {
        let lr = match matrix {
            ParamMatrix::K | ParamMatrix::Q => self.lr_kq,
            _ => self.lr,
        };
        let mut scale = scale;
        let norm = scale.abs() * dir_norm;
        if norm > self.max_norm {
            scale *= self.max_norm / norm;
        }
        if let Some(m) = self.params.matrix_mut(matrix) {
            crate::real::axpy_row(m.row_mut(row as usize), -lr * scale, dir);
        }
    }
}
