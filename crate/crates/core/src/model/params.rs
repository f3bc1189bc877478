use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::subword::SubwordMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "cbow")]
    Cbow,
    #[serde(rename = "awe")]
    Awe,
    #[serde(rename = "awe-s")]
    AweS,
}

impl Mode {
    pub fn has_attention(self) -> bool {
        !matches!(self, Mode::Cbow)
    }

    pub fn tag(self) -> u8 {
        match self {
            Mode::Cbow => 0,
            Mode::Awe => 1,
            Mode::AweS => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Mode> {
        match tag {
            0 => Some(Mode::Cbow),
            1 => Some(Mode::Awe),
            2 => Some(Mode::AweS),
            _ => None,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Cbow => "cbow",
            Mode::Awe => "awe",
            Mode::AweS => "awe-s",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cbow" => Ok(Mode::Cbow),
            "awe" => Ok(Mode::Awe),
            "awe-s" | "awe_s" | "awes" => Ok(Mode::AweS),
            _ => Err(Error::Config(format!("unknown mode {s:?} (cbow, awe, awe-s)"))),
        }
    }
}

/// Numerical knobs of the scoring function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelOptions {
    /// Key-query logits are clamped to `[-attn_clamp, attn_clamp]` before
    /// exponentiation.
    pub attn_clamp: f64,
    /// Target scores are clamped to `[-logit_clamp, logit_clamp]` inside
    /// `log σ`.
    pub logit_clamp: f64,
    /// Divide attention weights by their sum over the context (ablation;
    /// off by default).
    pub normalize_attention: bool,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            attn_clamp: 10.0,
            logit_clamp: 15.0,
            normalize_attention: false,
        }
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::default(); rows * cols],
        }
    }

    pub fn uniform<R: Rng + ?Sized>(rows: usize, cols: usize, half_width: f64, rng: &mut R) -> Self {
        let data = (0..rows * cols)
            .map(|_| T::from_f64(rng.random_range(-half_width..half_width)))
            .collect();
        Matrix { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn fill(&mut self, value: T) {
        self.data.fill(value);
    }

    /// First non-finite entry as `(row, col)`.
    pub fn find_non_finite(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(|x| !x.to_f64().is_finite())
            .map(|i| (i / self.cols, i % self.cols))
    }
}

/// Names one of the learnable matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParamMatrix {
    /// Value embeddings (context role; also the target role in AWE modes).
    U,
    /// Target embeddings (CBOW only).
    V,
    /// Keys.
    K,
    /// Queries.
    Q,
}

/// The complete learnable state.
///
/// CBOW keeps separate context (`u`) and target (`v`) embeddings. AWE and
/// AWE-S have no `v`: the target role reads `u` as well. In AWE-S the rows
/// of `u` are subword units rather than words, while `k` and `q` stay
/// per-word.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams<T> {
    pub mode: Mode,
    pub dim: usize,
    pub dim_kq: usize,
    pub options: ModelOptions,
    pub u: Matrix<T>,
    pub v: Option<Matrix<T>>,
    pub k: Option<Matrix<T>>,
    pub q: Option<Matrix<T>>,
}

impl<T: Real> ModelParams<T> {
    /// Randomly initialized parameters: `u` uniform in `±0.5/dim`, `v`
    /// zero, `k` and `q` uniform in `±0.5/dim_kq`.
    ///
    /// `num_words` is the vocabulary size; `num_units` the subword unit
    /// count (AWE-S only).
    pub fn init<R: Rng + ?Sized>(
        mode: Mode,
        num_words: usize,
        num_units: Option<usize>,
        dim: usize,
        dim_kq: usize,
        options: ModelOptions,
        rng: &mut R,
    ) -> Result<Self> {
        let u_rows = Self::check_shape(mode, num_words, num_units, dim, dim_kq)?;
        let u = Matrix::uniform(u_rows, dim, 0.5 / dim as f64, rng);
        let (v, k, q) = if mode.has_attention() {
            let hw = 0.5 / dim_kq as f64;
            let k = Matrix::uniform(num_words, dim_kq, hw, rng);
            let q = Matrix::uniform(num_words, dim_kq, hw, rng);
            (None, Some(k), Some(q))
        } else {
            (Some(Matrix::zeros(num_words, dim)), None, None)
        };
        Ok(ModelParams {
            mode,
            dim,
            dim_kq,
            options,
            u,
            v,
            k,
            q,
        })
    }

    /// All-zero parameters of the right shapes.
    pub fn zeros(mode: Mode, num_words: usize, num_units: Option<usize>, dim: usize, dim_kq: usize) -> Result<Self> {
        let u_rows = Self::check_shape(mode, num_words, num_units, dim, dim_kq)?;
        let attn = mode.has_attention();
        Ok(ModelParams {
            mode,
            dim,
            dim_kq,
            options: ModelOptions::default(),
            u: Matrix::zeros(u_rows, dim),
            v: (!attn).then(|| Matrix::zeros(num_words, dim)),
            k: attn.then(|| Matrix::zeros(num_words, dim_kq)),
            q: attn.then(|| Matrix::zeros(num_words, dim_kq)),
        })
    }

    fn check_shape(mode: Mode, num_words: usize, num_units: Option<usize>, dim: usize, dim_kq: usize) -> Result<usize> {
        if num_words == 0 || dim == 0 {
            return Err(Error::Config("vocabulary and dimension must be non-empty".into()));
        }
        if mode.has_attention() && dim_kq == 0 {
            return Err(Error::Config("key/query dimension must be >= 1".into()));
        }
        match (mode, num_units) {
            (Mode::AweS, Some(n)) if n > 0 => Ok(n),
            (Mode::AweS, _) => Err(Error::MissingSubwords),
            _ => Ok(num_words),
        }
    }

    /// Number of vocabulary words the parameters cover.
    pub fn num_words(&self) -> usize {
        match self.mode {
            Mode::Cbow => self.u.rows(),
            _ => self.k.as_ref().map_or(0, Matrix::rows),
        }
    }

    pub fn matrix(&self, which: ParamMatrix) -> Option<&Matrix<T>> {
        match which {
            ParamMatrix::U => Some(&self.u),
            ParamMatrix::V => self.v.as_ref(),
            ParamMatrix::K => self.k.as_ref(),
            ParamMatrix::Q => self.q.as_ref(),
        }
    }

    pub fn matrix_mut(&mut self, which: ParamMatrix) -> Option<&mut Matrix<T>> {
        match which {
            ParamMatrix::U => Some(&mut self.u),
            ParamMatrix::V => self.v.as_mut(),
            ParamMatrix::K => self.k.as_mut(),
            ParamMatrix::Q => self.q.as_mut(),
        }
    }

    pub fn matrices(&self) -> impl Iterator<Item = (ParamMatrix, &Matrix<T>)> {
        [ParamMatrix::U, ParamMatrix::V, ParamMatrix::K, ParamMatrix::Q]
            .into_iter()
            .filter_map(move |m| self.matrix(m).map(|x| (m, x)))
    }

    /// Checks that `subwords` matches the mode and the parameter shapes.
    pub fn check_subwords(&self, subwords: Option<&SubwordMap>) -> Result<()> {
        if self.mode != Mode::AweS {
            return Ok(());
        }
        let sw = subwords.ok_or(Error::MissingSubwords)?;
        if sw.num_units() != self.u.rows() || sw.num_words() != self.num_words() {
            return Err(Error::Config(format!(
                "subword map ({} words, {} units) does not match parameters ({} words, {} units)",
                sw.num_words(),
                sw.num_units(),
                self.num_words(),
                self.u.rows()
            )));
        }
        Ok(())
    }

    pub fn check_word(&self, word: u32) -> Result<()> {
        let len = self.num_words();
        if word as usize >= len {
            return Err(Error::WordOutOfRange { id: word as usize, len });
        }
        Ok(())
    }

    /// First non-finite entry, as `(matrix, row, col)`.
    pub fn find_non_finite(&self) -> Option<(ParamMatrix, usize, usize)> {
        self.matrices()
            .find_map(|(m, x)| x.find_non_finite().map(|(r, c)| (m, r, c)))
    }

    /// Converts storage precision.
    pub fn cast<S: Real>(&self) -> ModelParams<S> {
        let cast = |m: &Matrix<T>| {
            Matrix::from_vec(
                m.rows(),
                m.cols(),
                m.as_slice().iter().map(|x| S::from_f64(x.to_f64())).collect(),
            )
        };
        ModelParams {
            mode: self.mode,
            dim: self.dim,
            dim_kq: self.dim_kq,
            options: self.options.clone(),
            u: cast(&self.u),
            v: self.v.as_ref().map(cast),
            k: self.k.as_ref().map(cast),
            q: self.q.as_ref().map(cast),
        }
    }
}
