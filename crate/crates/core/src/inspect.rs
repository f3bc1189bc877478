//! Per-context-word attention and similarity tables for a masked word.
//!
//! For a sentence with one masked position, every other token gets
//!
//! * `attention = exp(k_masked · q_context)`, without the training clamp;
//! * `dot = u_masked · u_context`, using composed word vectors in AWE-S;
//! * `similarity = exp(dot)`.
//!
//! Both `dot` and `similarity` are emitted: published attention tables
//! caption their similarity column as `exp(u·u')` yet list negative
//! values, which only the raw dot product can produce.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::tokenize;
use crate::error::{Error, Result};
use crate::eval::TrainedModel;
use crate::model;
use crate::real::{dot, Real};

/// Fraction of the vocabulary (by frequency rank) marked as frequent.
pub const DEFAULT_FREQUENT_FRACTION: f64 = 0.001;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttentionRow {
    pub word: String,
    /// `None` for out-of-vocabulary tokens.
    pub attention: Option<f64>,
    pub dot: Option<f64>,
    pub similarity: Option<f64>,
    pub frequent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttentionTable {
    pub sentence: String,
    pub masked: String,
    pub masked_index: usize,
    pub rows: Vec<AttentionRow>,
}

/// Builds the table for `tokens[masked_index]`. Rows follow the input
/// order and skip only the masked position.
pub fn attention_table<T: Real>(
    tokens: &[String],
    masked_index: usize,
    model: &TrainedModel<'_, T>,
    frequent_fraction: f64,
) -> Result<AttentionTable> {
    let params = model.params;
    let (Some(k), Some(q)) = (params.k.as_ref(), params.q.as_ref()) else {
        return Err(Error::AttentionUndefined);
    };
    let masked = tokens.get(masked_index).ok_or_else(|| {
        Error::Config(format!(
            "masked index {masked_index} out of range for {} tokens",
            tokens.len()
        ))
    })?;
    let m = model
        .vocab
        .id(masked)
        .ok_or_else(|| Error::Unrepresentable(masked.clone()))?;
    let cutoff = model.vocab.frequent_cutoff(frequent_fraction);
    let key: Vec<f64> = k.row(m as usize).iter().map(|x| x.to_f64()).collect();
    let u_m = model::word_vector(m, params, model.subwords)?;

    let mut rows = Vec::with_capacity(tokens.len().saturating_sub(1));
    for (i, tok) in tokens.iter().enumerate() {
        if i == masked_index {
            continue;
        }
        let row = match model.vocab.id(tok) {
            Some(c) => {
                let query: Vec<f64> = q.row(c as usize).iter().map(|x| x.to_f64()).collect();
                let d = dot(&u_m, &model::word_vector(c, params, model.subwords)?);
                AttentionRow {
                    word: tok.clone(),
                    attention: Some(dot(&key, &query).exp()),
                    dot: Some(d),
                    similarity: Some(d.exp()),
                    frequent: (c as usize) < cutoff,
                }
            }
            None => AttentionRow {
                word: tok.clone(),
                attention: None,
                dot: None,
                similarity: None,
                frequent: false,
            },
        };
        rows.push(row);
    }
    Ok(AttentionTable {
        sentence: tokens.join(" "),
        masked: masked.clone(),
        masked_index,
        rows,
    })
}

/// Tokenizes `sentence` and masks the first occurrence of `mask`.
pub fn attention_table_for<T: Real>(
    sentence: &str,
    mask: &str,
    model: &TrainedModel<'_, T>,
    frequent_fraction: f64,
) -> Result<AttentionTable> {
    let tokens = tokenize(sentence);
    let mask = tokenize(mask);
    let [mask] = mask.as_slice() else {
        return Err(Error::Config("mask must be a single word".into()));
    };
    let idx = tokens
        .iter()
        .position(|t| t == mask)
        .ok_or_else(|| Error::Config(format!("{mask:?} does not occur in the sentence")))?;
    attention_table(&tokens, idx, model, frequent_fraction)
}

impl AttentionTable {
    /// Aligned text rendering; frequent words are marked with `*` and
    /// out-of-vocabulary rows show `-`.
    pub fn render(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"));
        let cells: Vec<[String; 4]> = self
            .rows
            .iter()
            .map(|r| {
                let word = if r.frequent {
                    format!("{}*", r.word)
                } else {
                    r.word.clone()
                };
                [word, fmt(r.attention), fmt(r.dot), fmt(r.similarity)]
            })
            .collect();
        let header = ["word", "attention", "dot", "exp(dot)"];
        let mut w = header.map(str::len);
        for c in &cells {
            for (wi, s) in w.iter_mut().zip(c) {
                *wi = (*wi).max(s.len());
            }
        }
        let mut out = String::new();
        let _ = writeln!(out, "masked: {} (position {})", self.masked, self.masked_index);
        let _ = writeln!(
            out,
            "{:<w0$}  {:>w1$}  {:>w2$}  {:>w3$}",
            header[0],
            header[1],
            header[2],
            header[3],
            w0 = w[0],
            w1 = w[1],
            w2 = w[2],
            w3 = w[3]
        );
        for c in &cells {
            let _ = writeln!(
                out,
                "{:<w0$}  {:>w1$}  {:>w2$}  {:>w3$}",
                c[0],
                c[1],
                c[2],
                c[3],
                w0 = w[0],
                w1 = w[1],
                w2 = w[2],
                w3 = w[3]
            );
        }
        out
    }
}
