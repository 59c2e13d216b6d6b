//! Corpus streaming, sentence normalization and frequency-ranked vocabularies.
//!
//! A corpus is a plain UTF-8 file with one already-tokenized sentence per
//! line; tokens are separated by whitespace.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Token and sentence filters applied before counting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub lowercase: bool,
    pub drop_nonalnum_tokens: bool,
    /// Sentences with fewer surviving tokens are dropped entirely.
    pub min_sentence_tokens: usize,
    pub drop_single_char: bool,
    /// Single-character tokens kept even when `drop_single_char` is set.
    pub single_char_exceptions: BTreeSet<String>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            lowercase: true,
            drop_nonalnum_tokens: true,
            min_sentence_tokens: 5,
            drop_single_char: false,
            single_char_exceptions: ["u".to_owned()].into_iter().collect(),
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_sentence_tokens < 1 {
            return Err(Error::Config(
                "min_sentence_tokens must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Token-level part of normalization; sentence length is not considered.
    pub fn normalize_token(&self, token: &str) -> Option<String> {
        let token = if self.lowercase {
            token.to_lowercase()
        } else {
            token.to_owned()
        };
        if token.is_empty() {
            return None;
        }
        if self.drop_nonalnum_tokens && !token.chars().any(char::is_alphanumeric) {
            return None;
        }
        if self.drop_single_char
            && token.chars().count() == 1
            && !self.single_char_exceptions.contains(&token)
        {
            return None;
        }
        Some(token)
    }
}

/// Normalize one tokenized sentence.
///
/// Returns an empty list when fewer than `min_sentence_tokens` tokens
/// survive, which signals that the sentence should be dropped.
pub fn normalize_sentence<S: AsRef<str>>(tokens: &[S], config: &PreprocessConfig) -> Vec<String> {
    let kept: Vec<String> = tokens
        .iter()
        .filter_map(|t| config.normalize_token(t.as_ref()))
        .collect();
    if kept.len() < config.min_sentence_tokens {
        Vec::new()
    } else {
        kept
    }
}

/// Split a corpus line into tokens.
pub fn tokenize_line(line: &str) -> Vec<String> {
    line.split_whitespace().map(str::to_owned).collect()
}

/// A corpus that can be streamed any number of times.
pub trait SentenceSource: Sync {
    fn for_each_sentence(&self, f: &mut dyn FnMut(&[String])) -> Result<()>;
}

impl SentenceSource for [Vec<String>] {
    fn for_each_sentence(&self, f: &mut dyn FnMut(&[String])) -> Result<()> {
        self.iter().for_each(|s| f(s));
        Ok(())
    }
}

impl SentenceSource for Vec<Vec<String>> {
    fn for_each_sentence(&self, f: &mut dyn FnMut(&[String])) -> Result<()> {
        self.as_slice().for_each_sentence(f)
    }
}

/// Applies [`normalize_sentence`] to another source and skips the sentences
/// it drops. Normalization is idempotent, so wrapping an already
/// preprocessed corpus changes nothing.
pub struct Normalized<'a, S: ?Sized> {
    pub inner: &'a S,
    pub config: &'a PreprocessConfig,
}

impl<S: SentenceSource + ?Sized> SentenceSource for Normalized<'_, S> {
    fn for_each_sentence(&self, f: &mut dyn FnMut(&[String])) -> Result<()> {
        self.inner.for_each_sentence(&mut |s| {
            let kept = normalize_sentence(s, self.config);
            if !kept.is_empty() {
                f(&kept);
            }
        })
    }
}

/// One or more corpus files, read line by line on every pass.
#[derive(Clone, Debug)]
pub struct CorpusFiles {
    paths: Vec<PathBuf>,
}

impl CorpusFiles {
    pub fn new<P: Into<PathBuf>>(paths: impl IntoIterator<Item = P>) -> Self {
        CorpusFiles {
            paths: paths.into_iter().map(Into::into).collect(),
        }
    }

    pub fn paths(&self) -> &[PathBuf] {
        &self.paths
    }
}

impl SentenceSource for CorpusFiles {
    fn for_each_sentence(&self, f: &mut dyn FnMut(&[String])) -> Result<()> {
        for path in &self.paths {
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            for line in BufReader::new(file).lines() {
                let line = line.map_err(|e| Error::io(path, e))?;
                let tokens = tokenize_line(&line);
                if !tokens.is_empty() {
                    f(&tokens);
                }
            }
        }
        Ok(())
    }
}

/// Bidirectional word/id mapping with token frequencies.
///
/// Words are ordered by descending count with ties broken by ascending
/// lexicographic order, so ids are dense and truncation is deterministic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    total_tokens: u64,
}

fn vocab_order(a: &(String, u64), b: &(String, u64)) -> Ordering {
    b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

impl Vocabulary {
    /// Build from raw counts, dropping words below `min_count` and keeping
    /// at most `max_size` of the most frequent words.
    pub fn from_counts(
        counts: impl IntoIterator<Item = (String, u64)>,
        min_count: u64,
        max_size: Option<usize>,
    ) -> Result<Self> {
        let min_count = min_count.max(1);
        let mut entries: Vec<(String, u64)> = counts
            .into_iter()
            .filter(|(_, c)| *c >= min_count)
            .collect();
        entries.sort_by(vocab_order);
        if let Some(max) = max_size {
            entries.truncate(max);
        }
        if entries.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        Ok(Self::from_sorted(entries))
    }

    fn from_sorted(entries: Vec<(String, u64)>) -> Self {
        let (words, counts): (Vec<String>, Vec<u64>) = entries.into_iter().unzip();
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        let total_tokens = counts.iter().sum();
        Vocabulary {
            words,
            counts,
            index,
            total_tokens,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn count(&self, id: usize) -> u64 {
        self.counts[id]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.words
            .iter()
            .map(String::as_str)
            .zip(self.counts.iter().copied())
    }

    /// Map a sentence to ids, deleting out-of-vocabulary tokens.
    pub fn encode(&self, sentence: &[String]) -> Vec<u32> {
        sentence
            .iter()
            .filter_map(|w| self.id(w).map(|i| i as u32))
            .collect()
    }

    /// Write as `word<TAB>count` lines preceded by a `#total_tokens<TAB>N` header.
    pub fn write_tsv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "#total_tokens\t{}", self.total_tokens)?;
        for (word, count) in self.iter() {
            writeln!(writer, "{word}\t{count}")?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing #total_tokens header"))??;
        let total: u64 = header
            .strip_prefix("#total_tokens\t")
            .and_then(|n| n.trim().parse().ok())
            .ok_or_else(|| Error::parse(1, "expected `#total_tokens<TAB>N`"))?;

        let mut entries: Vec<(String, u64)> = Vec::new();
        let mut seen = HashSet::new();
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (word, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(line_no, "expected `word<TAB>count`"))?;
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|_| Error::parse(line_no, format!("invalid count `{count}`")))?;
            if count == 0 {
                return Err(Error::parse(line_no, "counts must be positive"));
            }
            if !seen.insert(word.to_owned()) {
                return Err(Error::parse(line_no, format!("duplicate word `{word}`")));
            }
            let entry = (word.to_owned(), count);
            if let Some(prev) = entries.last() {
                if vocab_order(prev, &entry) != Ordering::Less {
                    return Err(Error::parse(
                        line_no,
                        "words must be ordered by descending count, then lexicographically",
                    ));
                }
            }
            entries.push(entry);
        }
        if entries.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let vocab = Self::from_sorted(entries);
        if vocab.total_tokens != total {
            return Err(Error::parse(
                1,
                format!(
                    "header total {total} does not match sum of counts {}",
                    vocab.total_tokens
                ),
            ));
        }
        Ok(vocab)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_tsv(std::io::BufWriter::new(file))
            .map_err(|e| e.in_file(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_tsv(BufReader::new(file)).map_err(|e| e.in_file(path))
    }
}

/// Token frequencies accumulated over one or more corpus shards.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TokenCounts {
    counts: HashMap<String, u64>,
}

impl TokenCounts {
    pub fn new() -> Self {
        Self::default()
    }

    /// Count the tokens of a sentence that survives normalization.
    pub fn add_sentence<S: AsRef<str>>(&mut self, tokens: &[S], config: &PreprocessConfig) {
        for token in normalize_sentence(tokens, config) {
            *self.counts.entry(token).or_insert(0) += 1;
        }
    }

    /// Merge another shard's counts; associative and commutative.
    pub fn merge(&mut self, other: TokenCounts) {
        for (word, count) in other.counts {
            *self.counts.entry(word).or_insert(0) += count;
        }
    }

    pub fn get(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn into_vocabulary(self, max_size: Option<usize>, min_count: u64) -> Result<Vocabulary> {
        Vocabulary::from_counts(self.counts, min_count, max_size)
    }
}

/// Count post-normalization token frequencies and build a vocabulary.
pub fn build_vocabulary(
    corpus: &(impl SentenceSource + ?Sized),
    config: &PreprocessConfig,
    max_size: Option<usize>,
    min_count: u64,
) -> Result<Vocabulary> {
    config.validate()?;
    if max_size == Some(0) {
        return Err(Error::Config("max_size must be at least 1".into()));
    }
    let mut counts = TokenCounts::new();
    corpus.for_each_sentence(&mut |s| counts.add_sentence(s, config))?;
    counts.into_vocabulary(max_size, min_count)
}

/// Words present in every vocabulary.
pub fn intersect_vocabularies(vocabs: &[&Vocabulary]) -> BTreeSet<String> {
    let Some((first, rest)) = vocabs.split_first() else {
        return BTreeSet::new();
    };
    first
        .words()
        .iter()
        .filter(|w| rest.iter().all(|v| v.contains(w)))
        .cloned()
        .collect()
}
