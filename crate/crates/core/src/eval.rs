//! Word-similarity evaluation and nearest-neighbor search.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Vocabulary;
use crate::error::{Error, IoContext, Result};
use crate::model::{self, ModelParams};
use crate::real::{dot, Real};
use crate::subword::SubwordMap;

/// Human-scored word pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityDataset {
    pub name: String,
    pub pairs: Vec<(String, String, f64)>,
}

const SCORE_HEADERS: &[&str] = &[
    "score",
    "similarity",
    "sim",
    "simlex999",
    "human (mean)",
    "mean",
    "relatedness",
];

impl SimilarityDataset {
    pub fn new(name: impl Into<String>, pairs: Vec<(String, String, f64)>) -> Result<Self> {
        let name = name.into();
        if pairs.is_empty() {
            return Err(Error::TooFewPairs {
                dataset: name,
                evaluated: 0,
            });
        }
        if let Some(p) = pairs.iter().find(|p| !p.2.is_finite()) {
            return Err(Error::NonFinite(format!("score of pair ({}, {}) in {name}", p.0, p.1)));
        }
        let pairs = pairs
            .into_iter()
            .map(|(a, b, s)| (a.to_lowercase(), b.to_lowercase(), s))
            .collect();
        Ok(SimilarityDataset { name, pairs })
    }

    /// Reads a delimited pair file. The dataset is named after the file
    /// stem.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).io_context(|| format!("reading {}", path.display()))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into());
        Self::parse(&name, &text).map_err(|e| match e {
            Error::Parse { line, msg, .. } => Error::Parse {
                path: path.to_path_buf(),
                line,
                msg,
            },
            e => e,
        })
    }

    /// Parses `word_a <sep> word_b <sep> score` lines.
    ///
    /// The separator is detected from the first data line (tab, comma,
    /// semicolon, or runs of spaces). Blank lines and lines starting with
    /// `#` are skipped. If the first line's score field is not a number it
    /// is taken as a header, and a header column named like a score
    /// (`score`, `similarity`, `SimLex999`, `Human (mean)`, ...) selects
    /// the score column; otherwise the third column is used.
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            path: name.into(),
            line,
            msg,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .peekable();
        let Some(&(_, first)) = lines.peek() else {
            return Err(Error::TooFewPairs {
                dataset: name.into(),
                evaluated: 0,
            });
        };
        let sep: fn(&str) -> Vec<&str> = if first.contains('\t') {
            |l| l.split('\t').map(str::trim).collect()
        } else if first.contains(',') {
            |l| l.split(',').map(str::trim).collect()
        } else if first.contains(';') {
            |l| l.split(';').map(str::trim).collect()
        } else {
            |l| l.split_whitespace().collect()
        };

        let mut score_col = 2;
        let head = sep(first);
        if head.len() >= 3 && head[2].parse::<f64>().is_err() {
            if let Some(c) = head
                .iter()
                .position(|h| SCORE_HEADERS.contains(&h.to_lowercase().as_str()))
            {
                score_col = c;
            }
            lines.next();
        }

        let mut pairs = Vec::new();
        for (no, line) in lines {
            let fields = sep(line);
            if fields.len() <= score_col.max(1) {
                return Err(err(no, format!("expected at least {} fields", score_col.max(2) + 1)));
            }
            let score: f64 = fields[score_col]
                .parse()
                .map_err(|_| err(no, format!("bad score {:?}", fields[score_col])))?;
            pairs.push((fields[0].to_string(), fields[1].to_string(), score));
        }
        Self::new(name, pairs)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Cosine similarity. A zero vector has similarity 0 to everything.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = dot(a, a);
    let nb = dot(b, b);
    if na == 0.0 || nb == 0.0 {
        log::warn!("cosine of a zero vector, using 0");
        return 0.0;
    }
    (dot(a, b) / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0)
}

/// 1-based ranks; tied values share the mean of their rank range.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[i].partial_cmp(&x[j]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && x[order[j]] == x[order[i]] {
            j += 1;
        }
        // Positions i..j (0-based) hold ranks i+1..=j.
        let r = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroRankVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::SpearmanLength { x: x.len(), y: y.len() });
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Anything that maps words to vectors.
pub trait WordEmbeddings {
    fn dim(&self) -> usize;

    /// Number of vocabulary words.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn word(&self, index: usize) -> &str;

    fn index_of(&self, word: &str) -> Option<usize>;

    fn vector_at(&self, index: usize) -> Vec<f64>;

    /// Vector for any string: vocabulary words, plus whatever else the
    /// model can compose.
    fn vector(&self, word: &str) -> Option<Vec<f64>> {
        self.index_of(word).map(|i| self.vector_at(i))
    }
}

/// Trained parameters together with the vocabulary and subword map they
/// were trained with.
#[derive(Clone, Copy, Debug)]
pub struct TrainedModel<'a, T> {
    pub vocab: &'a Vocabulary,
    pub params: &'a ModelParams<T>,
    pub subwords: Option<&'a SubwordMap>,
}

impl<'a, T: Real> TrainedModel<'a, T> {
    pub fn new(vocab: &'a Vocabulary, params: &'a ModelParams<T>, subwords: Option<&'a SubwordMap>) -> Result<Self> {
        if params.num_words() != vocab.len() {
            return Err(Error::CorpusMismatch(format!(
                "parameters cover {} words, vocabulary has {}",
                params.num_words(),
                vocab.len()
            )));
        }
        params.check_subwords(subwords)?;
        Ok(TrainedModel {
            vocab,
            params,
            subwords,
        })
    }
}

impl<T: Real> WordEmbeddings for TrainedModel<'_, T> {
    fn dim(&self) -> usize {
        self.params.dim
    }

    fn len(&self) -> usize {
        self.vocab.len()
    }

    fn word(&self, index: usize) -> &str {
        self.vocab.word(index as u32)
    }

    fn index_of(&self, word: &str) -> Option<usize> {
        self.vocab.id(word).map(|i| i as usize)
    }

    fn vector_at(&self, index: usize) -> Vec<f64> {
        model::word_vector(index as u32, self.params, self.subwords).expect("validated model")
    }

    /// AWE-S also composes out-of-vocabulary words whose lemma units are
    /// known.
    fn vector(&self, word: &str) -> Option<Vec<f64>> {
        if let Some(i) = self.index_of(word) {
            return Some(self.vector_at(i));
        }
        let units = self.subwords?.oov_set(word)?;
        (self.params.mode == model::Mode::AweS).then(|| model::unit_sum(units, self.params))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub dataset: String,
    pub spearman: f64,
    pub pairs_total: usize,
    pub pairs_evaluated: usize,
}

impl ScoreReport {
    pub fn coverage(&self) -> f64 {
        self.pairs_evaluated as f64 / self.pairs_total as f64
    }
}

/// Spearman correlation between model cosines and human scores over the
/// pairs whose words are both representable. Other pairs are skipped and
/// reflected in `pairs_evaluated`.
pub fn evaluate<E: WordEmbeddings + ?Sized>(emb: &E, dataset: &SimilarityDataset) -> Result<ScoreReport> {
    let mut human = Vec::with_capacity(dataset.len());
    let mut model = Vec::with_capacity(dataset.len());
    for (a, b, score) in &dataset.pairs {
        if let (Some(va), Some(vb)) = (emb.vector(a), emb.vector(b)) {
            human.push(*score);
            model.push(cosine(&va, &vb));
        }
    }
    if human.len() < 2 {
        return Err(Error::TooFewPairs {
            dataset: dataset.name.clone(),
            evaluated: human.len(),
        });
    }
    Ok(ScoreReport {
        dataset: dataset.name.clone(),
        spearman: spearman(&model, &human)?,
        pairs_total: dataset.len(),
        pairs_evaluated: human.len(),
    })
}

/// Aligned text table: one row per model, one column per dataset, cells
/// `spearman (coverage%)`.
pub fn score_table(rows: &[(String, Vec<ScoreReport>)]) -> String {
    let mut datasets: Vec<&str> = Vec::new();
    for (_, reports) in rows {
        for r in reports {
            if !datasets.contains(&r.dataset.as_str()) {
                datasets.push(&r.dataset);
            }
        }
    }
    let cell = |reports: &[ScoreReport], ds: &str| {
        reports
            .iter()
            .find(|r| r.dataset == ds)
            .map(|r| format!("{:.3} ({:.0}%)", r.spearman, 100.0 * r.coverage()))
            .unwrap_or_else(|| "-".into())
    };
    let name_w = rows.iter().map(|(n, _)| n.len()).chain([5]).max().unwrap_or(5);
    let widths: Vec<usize> = datasets
        .iter()
        .map(|ds| {
            rows.iter()
                .map(|(_, r)| cell(r, ds).len())
                .chain([ds.len()])
                .max()
                .unwrap_or(0)
        })
        .collect();

    let mut out = String::new();
    let _ = write!(out, "{:<name_w$}", "Model");
    for (ds, w) in datasets.iter().zip(&widths) {
        let _ = write!(out, "  {ds:>w$}");
    }
    out.push('\n');
    for (name, reports) in rows {
        let _ = write!(out, "{name:<name_w$}");
        for (ds, w) in datasets.iter().zip(&widths) {
            let _ = write!(out, "  {:>w$}", cell(reports, ds));
        }
        out.push('\n');
    }
    out
}

/// Every vocabulary vector with its squared norm precomputed, for
/// repeated cosine queries. Scores are bit-identical to [`cosine`].
pub struct NeighborIndex {
    words: Vec<String>,
    dim: usize,
    rows: Vec<f64>,
    sq_norms: Vec<f64>,
}

impl NeighborIndex {
    pub fn new<E: WordEmbeddings + ?Sized>(emb: &E) -> Self {
        let dim = emb.dim();
        let mut rows = Vec::with_capacity(emb.len() * dim);
        let mut sq_norms = Vec::with_capacity(emb.len());
        let mut words = Vec::with_capacity(emb.len());
        for i in 0..emb.len() {
            let v = emb.vector_at(i);
            sq_norms.push(dot(&v, &v));
            rows.extend_from_slice(&v);
            words.push(emb.word(i).to_string());
        }
        NeighborIndex {
            words,
            dim,
            rows,
            sq_norms,
        }
    }

    /// The `k` words most cosine-similar to `query`, descending, ties
    /// broken by vocabulary index. `exclude` is left out.
    pub fn query(&self, query: &[f64], k: usize, exclude: Option<&str>) -> Vec<(String, f64)> {
        let qn = dot(query, query);
        if qn == 0.0 {
            log::warn!("nearest neighbors of a zero vector");
        }
        let mut scored: Vec<(usize, f64)> = self
            .words
            .iter()
            .enumerate()
            .filter(|(_, w)| Some(w.as_str()) != exclude)
            .map(|(i, _)| {
                let (row, rn) = (&self.rows[i * self.dim..(i + 1) * self.dim], self.sq_norms[i]);
                let s = if qn == 0.0 || rn == 0.0 {
                    0.0
                } else {
                    (dot(query, row) / (qn.sqrt() * rn.sqrt())).clamp(-1.0, 1.0)
                };
                (i, s)
            })
            .collect();
        let by_score = |a: &(usize, f64), b: &(usize, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
        let k = k.min(scored.len());
        if k < scored.len() && k > 0 {
            scored.select_nth_unstable_by(k - 1, by_score);
        }
        scored.truncate(k);
        scored.sort_by(by_score);
        scored.into_iter().map(|(i, s)| (self.words[i].clone(), s)).collect()
    }
}

/// Top-`k` neighbors of `word`, excluding the word itself.
pub fn nearest_neighbors<E: WordEmbeddings + ?Sized>(emb: &E, word: &str, k: usize) -> Result<Vec<(String, f64)>> {
    if k == 0 {
        return Err(Error::Config("k must be >= 1".into()));
    }
    let q = emb
        .vector(word)
        .ok_or_else(|| Error::Unrepresentable(word.to_string()))?;
    Ok(NeighborIndex::new(emb).query(&q, k, Some(word)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::VocabConfig;
    use crate::model::Mode;
    use crate::subword::{LemmaTable, Pos};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Sort-free rank oracle: rank = 1 + #smaller + (#equal - 1) / 2.
    fn oracle_ranks(x: &[f64]) -> Vec<f64> {
        x.iter()
            .map(|&v| {
                let less = x.iter().filter(|&&o| o < v).count() as f64;
                let eq = x.iter().filter(|&&o| o == v).count() as f64;
                1.0 + less + (eq - 1.0) / 2.0
            })
            .collect()
    }

    fn oracle_spearman(x: &[f64], y: &[f64]) -> f64 {
        let (rx, ry) = (oracle_ranks(x), oracle_ranks(y));
        let n = x.len() as f64;
        let mx = rx.iter().sum::<f64>() / n;
        let my = ry.iter().sum::<f64>() / n;
        let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
        let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
        let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
        cov / (vx * vy).sqrt()
    }

    #[test]
    fn cosine_examples() {
        assert_relative_eq!(cosine(&[0.3, -2.0], &[0.3, -2.0]), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 3.0]), 0.0);
        assert_relative_eq!(cosine(&[1.0, 0.0], &[1.0, 1.0]), 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 1.0]), 0.0);
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap(), 0.8);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 35.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert!(matches!(
            spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::ZeroRankVariance)
        ));
        assert!(matches!(
            spearman(&[1.0, 2.0], &[1.0]),
            Err(Error::SpearmanLength { x: 2, y: 1 })
        ));
    }

    #[test]
    fn average_ranks_with_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 10.0, 30.0]), vec![1.5, 3.0, 1.5, 4.0]);
        assert_eq!(average_ranks(&[5.0, 5.0, 5.0]), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn spearman_matches_rank_pearson_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut checked = 0;
        while checked < 1000 {
            let n = rng.random_range(2..=50);
            // Small integer ranges force plenty of ties.
            let levels = rng.random_range(2..=12);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64 * 0.5).collect();
            let Ok(got) = spearman(&x, &y) else { continue };
            assert!((got - oracle_spearman(&x, &y)).abs() < 1e-12, "{x:?} {y:?}");
            checked += 1;
        }
    }

    proptest! {
        #[test]
        fn spearman_invariances(pairs in prop::collection::vec((-100i32..100, -100i32..100), 3..40)) {
            let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
            if let Ok(r) = spearman(&x, &y) {
                let neg: Vec<f64> = y.iter().map(|v| -v).collect();
                let mono: Vec<f64> = x.iter().map(|v| (v / 7.0).exp() + 3.0).collect();
                prop_assert!((spearman(&y, &x).unwrap() - r).abs() < 1e-12);
                prop_assert!((spearman(&x, &neg).unwrap() + r).abs() < 1e-12);
                prop_assert!((spearman(&mono, &y).unwrap() - r).abs() < 1e-12);
                prop_assert!((-1.0..=1.0).contains(&r));
            }
        }

        #[test]
        fn cosine_scale_invariant(
            a in prop::collection::vec(-10.0f64..10.0, 4),
            b in prop::collection::vec(-10.0f64..10.0, 4),
            s in 0.01f64..100.0,
            t in 0.01f64..100.0,
        ) {
            let sa: Vec<f64> = a.iter().map(|x| x * s).collect();
            let tb: Vec<f64> = b.iter().map(|x| x * t).collect();
            prop_assert!((cosine(&sa, &tb) - cosine(&a, &b)).abs() < 1e-12);
        }
    }

    #[test]
    fn parse_formats() {
        let tsv = "# comment\nWord 1\tWord 2\tHuman (mean)\nlove\tsex\t6.77\nTiger\tcat\t7.35\n";
        let d = SimilarityDataset::parse("ws", tsv).unwrap();
        assert_eq!(
            d.pairs,
            vec![
                ("love".into(), "sex".into(), 6.77),
                ("tiger".into(), "cat".into(), 7.35)
            ]
        );

        let csv = "word1,word2,score\nold,new,1.58\n";
        assert_eq!(SimilarityDataset::parse("c", csv).unwrap().len(), 1);

        let spaces = "sun sunlight 50\nautomobile car 50\n";
        assert_eq!(SimilarityDataset::parse("men", spaces).unwrap().pairs[1].2, 50.0);

        let simlex = "word1\tword2\tPOS\tSimLex999\tconc(w1)\nold\tnew\tA\t1.58\t2.72\n";
        assert_eq!(SimilarityDataset::parse("simlex", simlex).unwrap().pairs[0].2, 1.58);

        assert!(matches!(
            SimilarityDataset::parse("bad", "a\tb\t1\nc\td\tx\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(SimilarityDataset::parse("empty", "# nothing\n").is_err());
    }

    fn toy_vocab(words: &[&str]) -> Vocabulary {
        let cfg = VocabConfig {
            min_count: 1,
            neg_table_size: 10_000,
            ..Default::default()
        };
        let n = words.len() as u64;
        Vocabulary::from_counts(
            words.iter().enumerate().map(|(i, w)| (w.to_string(), n - i as u64)),
            &cfg,
        )
        .unwrap()
    }

    fn hand_model(vecs: &[[f64; 2]]) -> ModelParams<f64> {
        let mut p = ModelParams::<f64>::zeros(Mode::Cbow, vecs.len(), None, 2, 1).unwrap();
        for (i, v) in vecs.iter().enumerate() {
            p.u.row_mut(i).copy_from_slice(v);
        }
        p
    }

    #[test]
    fn evaluate_perfect_ordering_and_coverage() {
        let vocab = toy_vocab(&["a", "b", "c", "d"]);
        let p = hand_model(&[[1.0, 0.0], [1.0, 0.1], [1.0, 1.0], [0.0, 1.0]]);
        let m = TrainedModel::new(&vocab, &p, None).unwrap();
        let ds = SimilarityDataset::new(
            "toy",
            vec![
                ("a".into(), "b".into(), 9.0),
                ("a".into(), "c".into(), 5.0),
                ("a".into(), "d".into(), 1.0),
                ("zz".into(), "yy".into(), 3.0),
            ],
        )
        .unwrap();
        let r = evaluate(&m, &ds).unwrap();
        assert_eq!(r.spearman, 1.0);
        assert_eq!((r.pairs_total, r.pairs_evaluated), (4, 3));
        assert_relative_eq!(r.coverage(), 0.75);
        assert_eq!(evaluate(&m, &ds).unwrap(), r);

        let one = SimilarityDataset::new("one", vec![("a".into(), "b".into(), 1.0)]).unwrap();
        assert!(matches!(
            evaluate(&m, &one),
            Err(Error::TooFewPairs { evaluated: 1, .. })
        ));
    }

    #[test]
    fn awe_s_composes_known_lemmas_for_oov_words() {
        let vocab = toy_vocab(&["run", "cat", "dog"]);
        let mut lemmas = LemmaTable::new();
        lemmas.insert("running", Pos::Verb, "run");
        let sw = SubwordMap::build(&vocab, &lemmas);
        let mut p = ModelParams::<f64>::zeros(Mode::AweS, 3, Some(sw.num_units()), 2, 1).unwrap();
        p.u.row_mut(0).copy_from_slice(&[0.5, 2.0]);
        let m = TrainedModel::new(&vocab, &p, Some(&sw)).unwrap();
        assert_eq!(m.vector("running"), Some(vec![0.5, 2.0]));
        assert_eq!(m.vector("walking"), None);
    }

    #[test]
    fn nearest_neighbor_examples() {
        let vocab = toy_vocab(&["a", "b", "c"]);
        let p = hand_model(&[[1.0, 0.0], [0.0, 1.0], [0.9, 0.2]]);
        let m = TrainedModel::new(&vocab, &p, None).unwrap();
        let nn = nearest_neighbors(&m, "a", 1).unwrap();
        assert_eq!(nn[0].0, "c");
        let all = nearest_neighbors(&m, "a", 10).unwrap();
        assert_eq!(all.len(), 2);
        assert!(all.iter().all(|(w, _)| w != "a"));
        assert!(matches!(
            nearest_neighbors(&m, "zzz", 3),
            Err(Error::Unrepresentable(_))
        ));
    }

    #[test]
    fn neighbor_index_matches_exhaustive_scan() {
        let n = 1000;
        let words: Vec<String> = (0..n).map(|i| format!("w{i:04}")).collect();
        let refs: Vec<&str> = words.iter().map(String::as_str).collect();
        let vocab = toy_vocab(&refs);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut p = ModelParams::<f64>::zeros(Mode::Cbow, n, None, 8, 1).unwrap();
        for x in p.u.as_mut_slice() {
            // Coarse values produce exact ties.
            *x = rng.random_range(-2i32..=2) as f64;
        }
        let m = TrainedModel::new(&vocab, &p, None).unwrap();
        let index = NeighborIndex::new(&m);
        for q in [0usize, 17, 500, 999] {
            let word = vocab.word(q as u32);
            let qv = m.vector_at(q);
            let mut brute: Vec<(usize, f64)> = (0..n)
                .filter(|&i| i != q)
                .map(|i| (i, cosine(&qv, &m.vector_at(i))))
                .collect();
            brute.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            let fast = index.query(&qv, 25, Some(word));
            for (f, b) in fast.iter().zip(&brute) {
                assert_eq!(f.0, vocab.word(b.0 as u32));
                assert_eq!(f.1, b.1);
            }
        }
    }

    #[test]
    fn table_layout() {
        let r = |ds: &str, s| ScoreReport {
            dataset: ds.into(),
            spearman: s,
            pairs_total: 4,
            pairs_evaluated: 4,
        };
        let t = score_table(&[
            ("CBOW".into(), vec![r("WS353", 0.5), r("MEN", 0.6)]),
            ("AWE".into(), vec![r("WS353", 0.55)]),
        ]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("Model") && lines[0].contains("WS353") && lines[0].contains("MEN"));
        assert!(lines[1].contains("0.500 (100%)"));
        assert!(lines[2].trim_end().ends_with('-'));
        assert!(lines.iter().all(|l| l.len() == lines[0].len()));
    }
}
