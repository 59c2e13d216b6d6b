//! Sliding-window word/context co-occurrence counts.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{SentenceSource, Vocabulary};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoocConfig {
    /// Symmetric half-window size.
    pub window: usize,
    /// Draw the effective half-window uniformly from `1..=window` per center token.
    pub dynamic_window: bool,
}

impl Default for CoocConfig {
    fn default() -> Self {
        CoocConfig {
            window: 5,
            dynamic_window: false,
        }
    }
}

impl CoocConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 1 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        Ok(())
    }
}

/// Sparse word-by-context count matrix with its marginals.
///
/// Rows and columns are both indexed by the ids of one vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct CoocMatrix {
    vocab: Arc<Vocabulary>,
    rows: Vec<BTreeMap<u32, u64>>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    grand_total: u64,
}

impl CoocMatrix {
    pub fn empty(vocab: Arc<Vocabulary>) -> Self {
        let n = vocab.len();
        CoocMatrix {
            vocab,
            rows: vec![BTreeMap::new(); n],
            row_sums: vec![0; n],
            col_sums: vec![0; n],
            grand_total: 0,
        }
    }

    /// Build from explicit `(word, context, count)` cells; zero counts are ignored.
    pub fn from_cells(
        vocab: Arc<Vocabulary>,
        cells: impl IntoIterator<Item = (usize, usize, u64)>,
    ) -> Result<Self> {
        let mut m = Self::empty(vocab);
        let n = m.rows.len();
        for (w, c, count) in cells {
            if w >= n || c >= n {
                return Err(Error::Invalid(format!(
                    "cell ({w}, {c}) outside vocabulary of {n}"
                )));
            }
            if count > 0 {
                *m.rows[w].entry(c as u32).or_insert(0) += count;
            }
        }
        m.recompute_marginals();
        Ok(m)
    }

    fn recompute_marginals(&mut self) {
        let n = self.rows.len();
        self.row_sums = vec![0; n];
        self.col_sums = vec![0; n];
        for (w, row) in self.rows.iter().enumerate() {
            for (&c, &count) in row {
                self.row_sums[w] += count;
                self.col_sums[c as usize] += count;
            }
        }
        self.grand_total = self.row_sums.iter().sum();
    }

    fn add_sentence(&mut self, ids: &[u32], config: &CoocConfig, rng: &mut ChaCha8Rng) {
        for (i, &center) in ids.iter().enumerate() {
            let w = if config.dynamic_window {
                rng.random_range(1..=config.window)
            } else {
                config.window
            };
            let lo = i.saturating_sub(w);
            let hi = (i + w).min(ids.len() - 1);
            let row = &mut self.rows[center as usize];
            for (j, &ctx) in ids.iter().enumerate().take(hi + 1).skip(lo) {
                if j != i {
                    *row.entry(ctx).or_insert(0) += 1;
                }
            }
        }
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn get(&self, word: usize, context: usize) -> u64 {
        self.rows[word].get(&(context as u32)).copied().unwrap_or(0)
    }

    /// Nonzero cells of one row in ascending context order.
    pub fn row(&self, word: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.rows[word].iter().map(|(&c, &n)| (c as usize, n))
    }

    /// All nonzero cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(w, row)| row.iter().map(move |(&c, &n)| (w, c as usize, n)))
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    pub fn grand_total(&self) -> u64 {
        self.grand_total
    }

    pub fn write_tsv<W: Write>(&self, mut writer: W) -> Result<()> {
        for (w, c, n) in self.cells() {
            writeln!(
                writer,
                "{}\t{}\t{}",
                self.vocab.word(w),
                self.vocab.word(c),
                n
            )?;
        }
        writer.flush()?;
        Ok(())
    }

    /// Read `word<TAB>context<TAB>count` triples over a known vocabulary.
    pub fn read_tsv<R: BufRead>(reader: R, vocab: Arc<Vocabulary>) -> Result<Self> {
        let mut cells = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [w, c, n] = fields[..] else {
                return Err(Error::parse(i + 1, "expected `word<TAB>context<TAB>count`"));
            };
            let lookup = |word: &str| {
                vocab
                    .id(word)
                    .ok_or_else(|| Error::parse(i + 1, format!("`{word}` not in vocabulary")))
            };
            let count: u64 = n
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("invalid count `{n}`")))?;
            if count == 0 {
                return Err(Error::parse(i + 1, "counts must be positive"));
            }
            cells.push((lookup(w)?, lookup(c)?, count));
        }
        Self::from_cells(vocab, cells)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_tsv(BufWriter::new(file))
            .map_err(|e| e.in_file(path))
    }

    pub fn load(path: &Path, vocab: Arc<Vocabulary>) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_tsv(BufReader::new(file), vocab).map_err(|e| e.in_file(path))
    }
}

/// Count co-occurrences within a window around every in-vocabulary token.
///
/// Out-of-vocabulary tokens are deleted before windowing and windows never
/// cross sentence boundaries. `seed` only matters for dynamic windows.
pub fn count_cooccurrences(
    corpus: &(impl SentenceSource + ?Sized),
    vocab: Arc<Vocabulary>,
    config: &CoocConfig,
    seed: u64,
) -> Result<CoocMatrix> {
    config.validate()?;
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matrix = CoocMatrix::empty(vocab);
    let lookup = Arc::clone(&matrix.vocab);
    corpus.for_each_sentence(&mut |sentence| {
        let ids = lookup.encode(sentence);
        if ids.len() > 1 {
            matrix.add_sentence(&ids, config, &mut rng);
        }
    })?;
    matrix.recompute_marginals();
    Ok(matrix)
}

/// Cell-wise sum of shards counted over the same vocabulary.
pub fn merge_counts(shards: Vec<CoocMatrix>) -> Result<CoocMatrix> {
    let mut shards = shards.into_iter();
    let mut merged = shards
        .next()
        .ok_or_else(|| Error::Invalid("no shards to merge".into()))?;
    for shard in shards {
        if !Arc::ptr_eq(&merged.vocab, &shard.vocab) && merged.vocab != shard.vocab {
            return Err(Error::VocabularyMismatch);
        }
        for (target, source) in merged.rows.iter_mut().zip(shard.rows) {
            for (c, n) in source {
                *target.entry(c).or_insert(0) += n;
            }
        }
    }
    merged.recompute_marginals();
    Ok(merged)
}
