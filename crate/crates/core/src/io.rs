//! Embedding export/import in the word2vec formats, and training
//! checkpoints.
//!
//! # Checkpoint layout
//!
//! All integers and floats are little-endian. Strings are a `u32` byte
//! length followed by UTF-8 bytes; JSON blobs are a `u64` length followed
//! by the text.
//!
//! ```text
//! magic        b"AWECKPT\0"
//! version      u32
//! dtype        u8      4 = f32, 8 = f64
//! mode         u8
//! config       JSON    training configuration
//! vocab config JSON
//! vocabulary   u64 n, then n x (string word, u64 count)
//! subwords     u8 present; if 1: u64 units, unit strings,
//!              one (u32 len, u32 ids...) set per word,
//!              u64 m, m x (string word, u32 len, u32 ids...)
//! state        u64 epochs_completed, u64 words_processed
//! options      f64 attn_clamp, f64 logit_clamp, u8 normalize
//! shape        u64 dim, u64 dim_kq
//! matrices     u8 count, then count x (u8 tag, u64 rows, u64 cols, data)
//! checksum     u64 FNV-1a of every preceding byte
//! ```
//!
//! The negative-sampling table and subsampling probabilities are rebuilt
//! from the stored counts and vocabulary configuration.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::corpus::{VocabConfig, Vocabulary};
use crate::error::{Error, IoContext, Result};
use crate::eval::{TrainedModel, WordEmbeddings};
use crate::model::{Matrix, Mode, ModelOptions, ModelParams, ParamMatrix};
use crate::real::{DType, Real};
use crate::subword::SubwordMap;
use crate::trainer::{TrainConfig, TrainState};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"AWECKPT\0";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Dense word vectors read from an exported file.
#[derive(Clone, Debug, PartialEq)]
pub struct Embeddings {
    words: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    data: Vec<f64>,
}

impl Embeddings {
    pub fn new(words: Vec<String>, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != words.len() * dim {
            return Err(Error::Config(format!(
                "{} values for {} words of dimension {dim}",
                data.len(),
                words.len()
            )));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate word {w:?}")));
            }
        }
        Ok(Embeddings {
            words,
            index,
            dim,
            data,
        })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

impl WordEmbeddings for Embeddings {
    fn dim(&self) -> usize {
        self.dim
    }

    fn len(&self) -> usize {
        self.words.len()
    }

    fn word(&self, index: usize) -> &str {
        &self.words[index]
    }

    fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    fn vector_at(&self, index: usize) -> Vec<f64> {
        self.row(index).to_vec()
    }
}

/// word2vec text format: `N D` header, then `word v1 ... vD` per line.
/// Values use the shortest decimal form that parses back to the same
/// `f64`.
pub fn export_text<E: WordEmbeddings + ?Sized>(emb: &E, path: &Path) -> Result<()> {
    let ctx = || format!("writing {}", path.display());
    let mut out = BufWriter::new(File::create(path).io_context(ctx)?);
    writeln!(out, "{} {}", emb.len(), emb.dim()).io_context(ctx)?;
    let mut line = String::new();
    for i in 0..emb.len() {
        line.clear();
        line.push_str(emb.word(i));
        for x in emb.vector_at(i) {
            line.push(' ');
            line.push_str(&x.to_string());
        }
        line.push('\n');
        out.write_all(line.as_bytes()).io_context(ctx)?;
    }
    out.flush().io_context(ctx)
}

pub fn import_text(path: &Path) -> Result<Embeddings> {
    let file = File::open(path).io_context(|| format!("opening {}", path.display()))?;
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| err(1, "missing header".into()))?
        .io_context(|| format!("reading {}", path.display()))?;
    let (n, dim) = parse_header(&header).ok_or_else(|| err(1, format!("bad header {header:?}")))?;
    let mut words = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * dim);
    for (i, line) in lines.enumerate() {
        let no = i + 2;
        let line = line.io_context(|| format!("reading {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(' ').filter(|f| !f.is_empty());
        let word = fields.next().ok_or_else(|| err(no, "missing word".into()))?;
        let before = data.len();
        for f in fields {
            data.push(f.parse::<f64>().map_err(|_| err(no, format!("bad value {f:?}")))?);
        }
        if data.len() - before != dim {
            return Err(err(no, format!("expected {dim} values, found {}", data.len() - before)));
        }
        words.push(word.to_string());
    }
    if words.len() != n {
        return Err(err(0, format!("header promises {n} words, found {}", words.len())));
    }
    Embeddings::new(words, dim, data)
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut it = line.split_whitespace();
    let n = it.next()?.parse().ok()?;
    let d = it.next()?.parse().ok()?;
    it.next().is_none().then_some((n, d))
}

/// word2vec binary format: `N D\n` header, then per word the word, a
/// space, `D` little-endian `f32` values and a newline. Values are rounded
/// to `f32`.
pub fn export_binary<E: WordEmbeddings + ?Sized>(emb: &E, path: &Path) -> Result<()> {
    let ctx = || format!("writing {}", path.display());
    let mut out = BufWriter::new(File::create(path).io_context(ctx)?);
    writeln!(out, "{} {}", emb.len(), emb.dim()).io_context(ctx)?;
    let mut buf = Vec::new();
    for i in 0..emb.len() {
        buf.clear();
        buf.extend_from_slice(emb.word(i).as_bytes());
        buf.push(b' ');
        for x in emb.vector_at(i) {
            buf.extend_from_slice(&(x as f32).to_le_bytes());
        }
        buf.push(b'\n');
        out.write_all(&buf).io_context(ctx)?;
    }
    out.flush().io_context(ctx)
}

pub fn import_binary(path: &Path) -> Result<Embeddings> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .io_context(|| format!("reading {}", path.display()))?;
    let bad = |offset: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        msg: format!("byte {offset}: {msg}"),
    };
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| bad(0, "missing header".into()))?;
    let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| bad(0, "header is not UTF-8".into()))?;
    let (n, dim) = parse_header(header).ok_or_else(|| bad(0, format!("bad header {header:?}")))?;
    let mut pos = nl + 1;
    let mut words = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * dim);
    for _ in 0..n {
        while pos < bytes.len() && bytes[pos] == b'\n' {
            pos += 1;
        }
        let start = pos;
        let sp = bytes[pos..]
            .iter()
            .position(|&b| b == b' ')
            .ok_or_else(|| bad(start, "unterminated word".into()))?;
        let word = std::str::from_utf8(&bytes[pos..pos + sp]).map_err(|_| bad(start, "word is not UTF-8".into()))?;
        words.push(word.to_string());
        pos += sp + 1;
        let end = pos + 4 * dim;
        if end > bytes.len() {
            return Err(bad(pos, format!("truncated vector for {word:?}")));
        }
        for c in bytes[pos..end].chunks_exact(4) {
            data.push(f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64);
        }
        pos = end;
    }
    Embeddings::new(words, dim, data)
}

/// Everything needed to evaluate a model or continue training it.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint<T> {
    pub config: TrainConfig,
    pub vocab: Vocabulary,
    pub subwords: Option<SubwordMap>,
    pub params: ModelParams<T>,
    pub state: TrainState,
}

/// A checkpoint of either storage precision.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyCheckpoint {
    F32(Checkpoint<f32>),
    F64(Checkpoint<f64>),
}

impl AnyCheckpoint {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = read_file(path)?;
        let dtype = Reader::new(&bytes).header()?;
        Ok(match dtype {
            DType::F32 => AnyCheckpoint::F32(Checkpoint::from_bytes(&bytes)?),
            DType::F64 => AnyCheckpoint::F64(Checkpoint::from_bytes(&bytes)?),
        })
    }

    pub fn config(&self) -> &TrainConfig {
        match self {
            AnyCheckpoint::F32(c) => &c.config,
            AnyCheckpoint::F64(c) => &c.config,
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).io_context(|| format!("reading checkpoint {}", path.display()))
}

impl<T: Real> Checkpoint<T> {
    pub fn model(&self) -> Result<TrainedModel<'_, T>> {
        TrainedModel::new(&self.vocab, &self.params, self.subwords.as_ref())
    }

    /// Writes to a temporary sibling file, then renames it into place.
    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.to_bytes()?;
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, &bytes).io_context(|| format!("writing {}", tmp.display()))?;
        std::fs::rename(&tmp, path).io_context(|| format!("renaming to {}", path.display()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&read_file(path)?)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = Vec::new();
        w.extend_from_slice(CHECKPOINT_MAGIC);
        put_u32(&mut w, CHECKPOINT_VERSION);
        w.push(T::DTYPE.tag());
        w.push(self.params.mode.tag());
        put_blob(&mut w, &to_json(&self.config)?);
        put_blob(&mut w, &to_json(self.vocab.config())?);

        put_u64(&mut w, self.vocab.len() as u64);
        for (word, &count) in self.vocab.words().iter().zip(self.vocab.counts()) {
            put_str(&mut w, word);
            put_u64(&mut w, count);
        }

        match &self.subwords {
            None => w.push(0),
            Some(sw) => {
                w.push(1);
                put_u64(&mut w, sw.num_units() as u64);
                for u in sw.units() {
                    put_str(&mut w, u);
                }
                for id in 0..sw.num_words() {
                    put_ids(&mut w, sw.set(id as u32));
                }
                let oov: Vec<(&str, &[u32])> = sw.oov_words().collect();
                put_u64(&mut w, oov.len() as u64);
                for (word, set) in oov {
                    put_str(&mut w, word);
                    put_ids(&mut w, set);
                }
            }
        }

        put_u64(&mut w, self.state.epochs_completed as u64);
        put_u64(&mut w, self.state.words_processed);
        let o = &self.params.options;
        w.extend_from_slice(&o.attn_clamp.to_le_bytes());
        w.extend_from_slice(&o.logit_clamp.to_le_bytes());
        w.push(o.normalize_attention as u8);
        put_u64(&mut w, self.params.dim as u64);
        put_u64(&mut w, self.params.dim_kq as u64);

        let mats: Vec<(ParamMatrix, &Matrix<T>)> = self.params.matrices().collect();
        w.push(mats.len() as u8);
        for (which, m) in mats {
            w.push(matrix_tag(which));
            put_u64(&mut w, m.rows() as u64);
            put_u64(&mut w, m.cols() as u64);
            w.reserve(m.as_slice().len() * T::DTYPE.tag() as usize);
            for &x in m.as_slice() {
                x.write_le(&mut w);
            }
        }
        let sum = fnv1a(&w);
        put_u64(&mut w, sum);
        Ok(w)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let dtype = r.header()?;
        if dtype != T::DTYPE {
            return Err(r.error(format!("stored as {dtype:?}, requested {:?}", T::DTYPE)));
        }
        let mode_at = r.pos;
        let mode = Mode::from_tag(r.u8("mode")?).ok_or_else(|| Error::Checkpoint {
            offset: mode_at,
            msg: "unknown mode".into(),
        })?;
        let config: TrainConfig = r.json("config")?;
        let vocab_config: VocabConfig = r.json("vocabulary config")?;

        let n = r.len("vocabulary size")?;
        let mut counts = Vec::with_capacity(n);
        for _ in 0..n {
            let word = r.string("word")?;
            counts.push((word, r.u64("count")?));
        }
        let vocab_at = r.pos;
        let vocab = Vocabulary::from_counts(counts.iter().cloned(), &vocab_config).map_err(|e| Error::Checkpoint {
            offset: vocab_at,
            msg: format!("vocabulary: {e}"),
        })?;
        if vocab.words().iter().zip(&counts).any(|(w, (c, _))| w != c) || vocab.len() != n {
            return Err(r.error("vocabulary order does not match its counts".into()));
        }

        let subwords = match r.u8("subword flag")? {
            0 => None,
            1 => {
                let units = (0..r.len("unit count")?)
                    .map(|_| r.string("unit"))
                    .collect::<Result<Vec<_>>>()?;
                let sets = (0..n).map(|_| r.ids()).collect::<Result<Vec<_>>>()?;
                let mut oov = BTreeMap::new();
                for _ in 0..r.len("out-of-vocabulary count")? {
                    let word = r.string("word")?;
                    oov.insert(word, r.ids()?);
                }
                let at = r.pos;
                Some(SubwordMap::from_raw(units, sets, oov).map_err(|msg| Error::Checkpoint { offset: at, msg })?)
            }
            f => return Err(r.error(format!("bad subword flag {f}"))),
        };

        let state = TrainState {
            epochs_completed: r.u64("epochs")? as usize,
            words_processed: r.u64("words processed")?,
        };
        let options = ModelOptions {
            attn_clamp: r.f64("attention clamp")?,
            logit_clamp: r.f64("score clamp")?,
            normalize_attention: r.u8("normalize flag")? != 0,
        };
        let dim = r.len("dim")?;
        let dim_kq = r.len("dim_kq")?;

        let mut mats: [Option<Matrix<T>>; 4] = Default::default();
        for _ in 0..r.u8("matrix count")? {
            let at = r.pos;
            let which = r.u8("matrix tag")?;
            let slot = mats.get_mut(which as usize).ok_or_else(|| Error::Checkpoint {
                offset: at,
                msg: format!("unknown matrix tag {which}"),
            })?;
            let rows = r.len("rows")?;
            let cols = r.len("cols")?;
            let width = T::DTYPE.tag() as usize;
            let total = rows
                .checked_mul(cols)
                .and_then(|x| x.checked_mul(width))
                .ok_or_else(|| r.error("matrix size overflows".into()))?;
            let raw = r.take(total, "matrix data")?;
            let data = raw.chunks_exact(width).map(T::read_le).collect();
            *slot = Some(Matrix::from_vec(rows, cols, data));
        }
        let body_end = r.pos;
        let stored = r.u64("checksum")?;
        if r.pos != bytes.len() {
            return Err(r.error(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        if fnv1a(&bytes[..body_end]) != stored {
            return Err(Error::Checkpoint {
                offset: body_end,
                msg: "checksum mismatch".into(),
            });
        }

        let [u, v, k, q] = mats;
        let u = u.ok_or_else(|| r.error("missing U matrix".into()))?;
        let params = ModelParams {
            mode,
            dim,
            dim_kq,
            options,
            u,
            v,
            k,
            q,
        };
        check_shapes(&params, &vocab, subwords.as_ref()).map_err(|msg| Error::Checkpoint { offset: body_end, msg })?;
        Ok(Checkpoint {
            config,
            vocab,
            subwords,
            params,
            state,
        })
    }
}

fn check_shapes<T: Real>(
    p: &ModelParams<T>,
    vocab: &Vocabulary,
    sw: Option<&SubwordMap>,
) -> std::result::Result<(), String> {
    let n = vocab.len();
    let expect = |name: &str, m: Option<&Matrix<T>>, rows: usize, cols: usize| match m {
        Some(m) if m.rows() == rows && m.cols() == cols => Ok(()),
        Some(m) => Err(format!("{name} is {}x{}, expected {rows}x{cols}", m.rows(), m.cols())),
        None => Err(format!("missing {name} matrix")),
    };
    let absent = |name: &str, m: Option<&Matrix<T>>| match m {
        None => Ok(()),
        Some(_) => Err(format!("unexpected {name} matrix in {} checkpoint", p.mode)),
    };
    match p.mode {
        Mode::Cbow => {
            expect("U", Some(&p.u), n, p.dim)?;
            expect("V", p.v.as_ref(), n, p.dim)?;
            absent("K", p.k.as_ref())?;
            absent("Q", p.q.as_ref())
        }
        Mode::Awe | Mode::AweS => {
            let units = match (p.mode, sw) {
                (Mode::AweS, Some(sw)) if sw.num_words() == n => sw.num_units(),
                (Mode::AweS, _) => return Err("AWE-S checkpoint without a matching subword map".into()),
                _ => n,
            };
            expect("U", Some(&p.u), units, p.dim)?;
            absent("V", p.v.as_ref())?;
            expect("K", p.k.as_ref(), n, p.dim_kq)?;
            expect("Q", p.q.as_ref(), n, p.dim_kq)
        }
    }
}

fn to_json<S: serde::Serialize>(v: &S) -> Result<Vec<u8>> {
    serde_json::to_vec(v).map_err(|e| Error::Config(format!("serializing checkpoint: {e}")))
}

fn matrix_tag(m: ParamMatrix) -> u8 {
    match m {
        ParamMatrix::U => 0,
        ParamMatrix::V => 1,
        ParamMatrix::K => 2,
        ParamMatrix::Q => 3,
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn put_u32(w: &mut Vec<u8>, v: u32) {
    w.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(w: &mut Vec<u8>, v: u64) {
    w.extend_from_slice(&v.to_le_bytes());
}

fn put_str(w: &mut Vec<u8>, s: &str) {
    put_u32(w, s.len() as u32);
    w.extend_from_slice(s.as_bytes());
}

fn put_blob(w: &mut Vec<u8>, b: &[u8]) {
    put_u64(w, b.len() as u64);
    w.extend_from_slice(b);
}

fn put_ids(w: &mut Vec<u8>, ids: &[u32]) {
    put_u32(w, ids.len() as u32);
    for &i in ids {
        put_u32(w, i);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn error(&self, msg: String) -> Error {
        Error::Checkpoint { offset: self.pos, msg }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(self.error(format!(
                "truncated {what}: need {n} bytes, {} left",
                self.buf.len() - self.pos
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn array<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        Ok(self.take(N, what)?.try_into().expect("length checked"))
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.array::<1>(what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array(what)?))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array(what)?))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array(what)?))
    }

    /// A `u64` count that must fit in the remaining bytes.
    fn len(&mut self, what: &str) -> Result<usize> {
        let at = self.pos;
        let v = self.u64(what)?;
        usize::try_from(v)
            .ok()
            .filter(|&v| v <= self.buf.len())
            .ok_or(Error::Checkpoint {
                offset: at,
                msg: format!("implausible {what} {v}"),
            })
    }

    fn string(&mut self, what: &str) -> Result<String> {
        let n = self.u32(what)? as usize;
        let at = self.pos;
        let b = self.take(n, what)?;
        String::from_utf8(b.to_vec()).map_err(|_| Error::Checkpoint {
            offset: at,
            msg: format!("{what} is not UTF-8"),
        })
    }

    fn ids(&mut self) -> Result<Vec<u32>> {
        let n = self.u32("unit set length")? as usize;
        if n > self.buf.len() {
            return Err(self.error(format!("implausible unit set length {n}")));
        }
        (0..n).map(|_| self.u32("unit id")).collect()
    }

    fn json<T: serde::de::DeserializeOwned>(&mut self, what: &str) -> Result<T> {
        let n = self.len(what)?;
        let at = self.pos;
        let b = self.take(n, what)?;
        serde_json::from_slice(b).map_err(|e| Error::Checkpoint {
            offset: at,
            msg: format!("{what}: {e}"),
        })
    }

    /// Magic and version; returns the stored dtype.
    fn header(&mut self) -> Result<DType> {
        if self.take(8, "magic").ok() != Some(&CHECKPOINT_MAGIC[..]) {
            return Err(Error::Checkpoint {
                offset: 0,
                msg: "not a checkpoint (bad magic)".into(),
            });
        }
        let version = self.u32("version")?;
        if version != CHECKPOINT_VERSION {
            return Err(Error::CheckpointVersion {
                found: version,
                expected: CHECKPOINT_VERSION,
            });
        }
        let at = self.pos;
        let tag = self.u8("dtype")?;
        DType::from_tag(tag).ok_or(Error::Checkpoint {
            offset: at,
            msg: format!("unknown dtype tag {tag}"),
        })
    }
}
