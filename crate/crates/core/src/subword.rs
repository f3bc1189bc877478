//! Lemma-based subword sets for AWE-S.
//!
//! A word's subword set holds its own surface form plus its noun, verb and
//! adjective lemmas when the lemma table has them. Every distinct string
//! becomes a unit with its own embedding row.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::corpus::Vocabulary;
use crate::error::{Error, IoContext, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pos {
    Noun,
    Verb,
    Adj,
}

impl Pos {
    pub const ALL: [Pos; 3] = [Pos::Noun, Pos::Verb, Pos::Adj];

    pub fn parse(s: &str) -> Option<Pos> {
        match s.trim().to_ascii_lowercase().as_str() {
            "noun" | "n" => Some(Pos::Noun),
            "verb" | "v" => Some(Pos::Verb),
            "adj" | "a" | "s" | "adjective" => Some(Pos::Adj),
            _ => None,
        }
    }
}

/// `(word, pos) -> lemma` entries.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LemmaTable {
    entries: BTreeMap<String, [Option<String>; 3]>,
}

impl LemmaTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an entry; a second lemma for the same `(word, pos)` is ignored.
    pub fn insert(&mut self, word: &str, pos: Pos, lemma: &str) -> bool {
        let slot = &mut self.entries.entry(word.to_lowercase()).or_default()[pos as usize];
        if slot.is_some() {
            return false;
        }
        *slot = Some(lemma.to_lowercase());
        true
    }

    pub fn lemma(&self, word: &str, pos: Pos) -> Option<&str> {
        self.entries.get(word)?[pos as usize].as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reads `word<TAB>pos<TAB>lemma` lines. Blank lines and lines starting
    /// with `#` are skipped.
    pub fn read_tsv(path: &Path) -> Result<Self> {
        let file = File::open(path).io_context(|| format!("opening lemma table {}", path.display()))?;
        let mut table = LemmaTable::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.io_context(|| format!("reading lemma table {}", path.display()))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse {
                path: path.to_owned(),
                line: i + 1,
                msg,
            };
            let mut cols = line.split('\t');
            let (Some(word), Some(pos), Some(lemma), None) = (cols.next(), cols.next(), cols.next(), cols.next())
            else {
                return Err(err("expected word<TAB>pos<TAB>lemma".into()));
            };
            let pos = Pos::parse(pos).ok_or_else(|| err(format!("unknown part of speech {pos:?}")))?;
            if word.is_empty() || lemma.is_empty() {
                return Err(err("empty word or lemma".into()));
            }
            if !table.insert(word, pos, lemma) {
                log::warn!(
                    "{}:{}: duplicate {:?} lemma for {word:?}, keeping the first",
                    path.display(),
                    i + 1,
                    pos
                );
            }
        }
        Ok(table)
    }

    fn candidates<'a>(&'a self, word: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        let lemmas = self.entries.get(word);
        std::iter::once(word).chain(
            Pos::ALL
                .into_iter()
                .filter_map(move |p| lemmas.and_then(|l| l[p as usize].as_deref())),
        )
    }
}

/// Subword unit ids per vocabulary word, plus compositions for
/// out-of-vocabulary words whose lemmas are known units.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SubwordMap {
    units: Vec<String>,
    unit_index: HashMap<String, u32>,
    sets: Vec<Vec<u32>>,
    oov: BTreeMap<String, Vec<u32>>,
}

impl SubwordMap {
    /// Unit ids are assigned in first-seen order walking the vocabulary in
    /// id order, surface form first, then noun, verb and adjective lemmas.
    pub fn build(vocab: &Vocabulary, lemmas: &LemmaTable) -> Self {
        let mut map = SubwordMap::default();
        for word in vocab.words() {
            let mut set: Vec<u32> = Vec::with_capacity(4);
            for unit in lemmas.candidates(word) {
                let id = map.intern(unit);
                if !set.contains(&id) {
                    set.push(id);
                }
            }
            map.sets.push(set);
        }
        for word in lemmas.entries.keys() {
            if vocab.id(word).is_some() {
                continue;
            }
            let mut set = Vec::new();
            for unit in lemmas.candidates(word) {
                if let Some(&id) = map.unit_index.get(unit) {
                    if !set.contains(&id) {
                        set.push(id);
                    }
                }
            }
            if !set.is_empty() {
                map.oov.insert(word.clone(), set);
            }
        }
        map
    }

    /// Every word is its own single unit.
    pub fn singletons(vocab: &Vocabulary) -> Self {
        Self::build(vocab, &LemmaTable::new())
    }

    fn intern(&mut self, unit: &str) -> u32 {
        if let Some(&id) = self.unit_index.get(unit) {
            return id;
        }
        let id = self.units.len() as u32;
        self.units.push(unit.to_owned());
        self.unit_index.insert(unit.to_owned(), id);
        id
    }

    pub fn num_units(&self) -> usize {
        self.units.len()
    }

    pub fn num_words(&self) -> usize {
        self.sets.len()
    }

    pub fn unit(&self, id: u32) -> &str {
        &self.units[id as usize]
    }

    pub fn unit_id(&self, unit: &str) -> Option<u32> {
        self.unit_index.get(unit).copied()
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    /// Unit ids of vocabulary word `word`.
    #[inline]
    pub fn set(&self, word: u32) -> &[u32] {
        &self.sets[word as usize]
    }

    /// Composition for a word outside the vocabulary, if any unit covers it.
    pub fn oov_set(&self, word: &str) -> Option<&[u32]> {
        self.oov.get(word).map(Vec::as_slice)
    }

    pub fn oov_words(&self) -> impl Iterator<Item = (&str, &[u32])> {
        self.oov.iter().map(|(w, s)| (w.as_str(), s.as_slice()))
    }

    /// `word<TAB>unit1,unit2,...` lines: vocabulary words in id order, then
    /// composable out-of-vocabulary words. `,` and `\` inside units are
    /// backslash-escaped.
    pub fn write_tsv(&self, vocab: &Vocabulary, path: &Path) -> Result<()> {
        let ctx = || format!("writing subword map {}", path.display());
        let mut out = BufWriter::new(File::create(path).io_context(ctx)?);
        let line = |word: &str, set: &[u32]| {
            let units: Vec<String> = set.iter().map(|&u| escape(self.unit(u))).collect();
            format!("{word}\t{}\n", units.join(","))
        };
        for (id, set) in self.sets.iter().enumerate() {
            out.write_all(line(vocab.word(id as u32), set).as_bytes())
                .io_context(ctx)?;
        }
        for (word, set) in &self.oov {
            out.write_all(line(word, set).as_bytes()).io_context(ctx)?;
        }
        out.flush().io_context(ctx)
    }

    pub fn read_tsv(vocab: &Vocabulary, path: &Path) -> Result<Self> {
        let file = File::open(path).io_context(|| format!("opening subword map {}", path.display()))?;
        let mut lines: Vec<(String, Vec<String>)> = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.io_context(|| format!("reading subword map {}", path.display()))?;
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse {
                path: path.to_owned(),
                line: i + 1,
                msg: msg.to_owned(),
            };
            let (word, units) = line.split_once('\t').ok_or_else(|| err("expected word<TAB>units"))?;
            let units = split_escaped(units);
            if units.iter().any(String::is_empty) {
                return Err(err("empty unit"));
            }
            lines.push((word.to_owned(), units));
        }
        Self::from_parts(vocab, lines).map_err(|msg| Error::Parse {
            path: path.to_owned(),
            line: 0,
            msg,
        })
    }

    /// Reassembles a map from its unit list and id sets.
    pub(crate) fn from_raw(
        units: Vec<String>,
        sets: Vec<Vec<u32>>,
        oov: BTreeMap<String, Vec<u32>>,
    ) -> std::result::Result<Self, String> {
        let n = units.len() as u32;
        let mut unit_index = HashMap::with_capacity(units.len());
        for (i, u) in units.iter().enumerate() {
            if unit_index.insert(u.clone(), i as u32).is_some() {
                return Err(format!("duplicate unit {u:?}"));
            }
        }
        for set in sets.iter().chain(oov.values()) {
            if set.is_empty() || set.iter().any(|&u| u >= n) {
                return Err(format!("invalid unit set {set:?} for {n} units"));
            }
        }
        Ok(SubwordMap {
            units,
            unit_index,
            sets,
            oov,
        })
    }

    /// Rebuilds a map from per-word unit strings; vocabulary words must all
    /// be present, other words become out-of-vocabulary compositions.
    pub(crate) fn from_parts(
        vocab: &Vocabulary,
        entries: Vec<(String, Vec<String>)>,
    ) -> std::result::Result<Self, String> {
        let mut by_word: HashMap<String, Vec<String>> = HashMap::new();
        let mut oov_entries = Vec::new();
        for (word, units) in entries {
            if vocab.id(&word).is_some() {
                by_word.insert(word, units);
            } else {
                oov_entries.push((word, units));
            }
        }
        let mut map = SubwordMap::default();
        for word in vocab.words() {
            let units = by_word
                .remove(word)
                .ok_or_else(|| format!("no subword set for vocabulary word {word:?}"))?;
            let set: Vec<u32> = units.iter().map(|u| map.intern(u)).collect();
            if set.is_empty() {
                return Err(format!("empty subword set for {word:?}"));
            }
            map.sets.push(set);
        }
        for (word, units) in oov_entries {
            let set = units
                .iter()
                .map(|u| {
                    map.unit_id(u)
                        .ok_or_else(|| format!("unit {u:?} of {word:?} is not a known unit"))
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            map.oov.insert(word, set);
        }
        Ok(map)
    }
}

fn escape(unit: &str) -> String {
    unit.replace('\\', "\\\\").replace(',', "\\,")
}

fn split_escaped(s: &str) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                if let Some(n) = chars.next() {
                    out.last_mut().unwrap().push(n);
                }
            }
            ',' => out.push(String::new()),
            _ => out.last_mut().unwrap().push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize, VocabConfig};

    fn vocab(text: &str) -> Vocabulary {
        let c = VocabConfig {
            min_count: 1,
            neg_table_size: 1000,
            ..Default::default()
        };
        Vocabulary::build(tokenize(text), &c).unwrap()
    }

    fn names(map: &SubwordMap, v: &Vocabulary, w: &str) -> Vec<String> {
        map.set(v.id(w).unwrap())
            .iter()
            .map(|&u| map.unit(u).to_owned())
            .collect()
    }

    #[test]
    fn lemma_examples() {
        let v = vocab("awing happiest happy zebra happy");
        let mut t = LemmaTable::new();
        t.insert("awing", Pos::Verb, "awe");
        t.insert("happiest", Pos::Adj, "happy");
        let m = SubwordMap::build(&v, &t);
        assert_eq!(names(&m, &v, "awing"), vec!["awing", "awe"]);
        assert_eq!(names(&m, &v, "happiest"), vec!["happiest", "happy"]);
        assert_eq!(names(&m, &v, "zebra"), vec!["zebra"]);
        // "happy" and "happiest" share a unit.
        let happy = m.unit_id("happy").unwrap();
        assert!(m.set(v.id("happy").unwrap()).contains(&happy));
        assert!(m.set(v.id("happiest").unwrap()).contains(&happy));
        assert_eq!(m.num_units(), 5);
    }

    #[test]
    fn dedup_and_size_bound() {
        let v = vocab("running");
        let mut t = LemmaTable::new();
        t.insert("running", Pos::Noun, "running");
        t.insert("running", Pos::Verb, "run");
        t.insert("running", Pos::Adj, "running");
        assert!(!t.insert("running", Pos::Verb, "runn"));
        let m = SubwordMap::build(&v, &t);
        assert_eq!(names(&m, &v, "running"), vec!["running", "run"]);
    }

    #[test]
    fn empty_table_gives_singletons() {
        let v = vocab("a b b c c c");
        let m = SubwordMap::singletons(&v);
        assert_eq!(m.num_units(), v.len());
        for id in 0..v.len() as u32 {
            assert_eq!(m.set(id), &[id]);
        }
    }

    #[test]
    fn oov_composition() {
        let v = vocab("happy sad");
        let mut t = LemmaTable::new();
        t.insert("happiest", Pos::Adj, "happy");
        t.insert("gleeful", Pos::Adj, "glee");
        let m = SubwordMap::build(&v, &t);
        assert_eq!(m.oov_set("happiest"), Some(&[m.unit_id("happy").unwrap()][..]));
        assert_eq!(m.oov_set("gleeful"), None);
    }

    #[test]
    fn tsv_round_trip_and_escaping() {
        let dir = tempfile::tempdir().unwrap();
        let v = vocab("awing 1,000 happy");
        let mut t = LemmaTable::new();
        t.insert("awing", Pos::Verb, "awe");
        t.insert("happiest", Pos::Adj, "happy");
        let m = SubwordMap::build(&v, &t);
        let path = dir.path().join("sub.tsv");
        m.write_tsv(&v, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("1,000\t1\\,000\n"));
        assert!(text.contains("awing\tawing,awe\n"));
        assert_eq!(SubwordMap::read_tsv(&v, &path).unwrap(), m);
    }

    #[test]
    fn lemma_tsv_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lemmas.tsv");
        std::fs::write(&path, "# comment\nawing\tverb\tawe\nHappiest\ta\tHappy\n").unwrap();
        let t = LemmaTable::read_tsv(&path).unwrap();
        assert_eq!(t.lemma("awing", Pos::Verb), Some("awe"));
        assert_eq!(t.lemma("happiest", Pos::Adj), Some("happy"));

        std::fs::write(&path, "awing\tadverb\tawe\n").unwrap();
        assert!(matches!(LemmaTable::read_tsv(&path), Err(Error::Parse { line: 1, .. })));
        assert!(LemmaTable::read_tsv(&dir.path().join("missing.tsv")).is_err());

        std::fs::write(&path, "").unwrap();
        assert!(LemmaTable::read_tsv(&path).unwrap().is_empty());
    }
}
