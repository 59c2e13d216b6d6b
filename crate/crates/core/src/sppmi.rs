//! Shifted positive PMI embeddings built from a co-occurrence matrix.
//!
//! Every nonzero cell becomes `max(ln(#(w,c)·N / (#(w)·#(c))) − ln k, 0)`;
//! zero cells are never materialized, so rows stay sparse.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cooc::CoocMatrix;
use crate::embedspace::{EmbeddingSpace, WordIndex};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SppmiConfig {
    /// The matrix is shifted by `ln(shift_k)`; `1` gives plain PPMI.
    pub shift_k: f64,
}

impl Default for SppmiConfig {
    fn default() -> Self {
        SppmiConfig { shift_k: 1.0 }
    }
}

impl SppmiConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.shift_k.is_finite() || self.shift_k < 1.0 {
            return Err(Error::Config(format!(
                "shift_k must be a finite number >= 1, got {}",
                self.shift_k
            )));
        }
        Ok(())
    }
}

/// Provenance carried in the header of the on-disk format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SppmiHeader {
    pub shift_k: f64,
    pub window: Option<usize>,
    pub grand_total: u64,
}

/// Explicit embeddings: one sparse row per word over the context vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseEmbeddings {
    words: WordIndex,
    rows: Vec<Vec<(u32, f64)>>,
    norms: Vec<f64>,
    header: SppmiHeader,
}

fn row_norm(row: &[(u32, f64)]) -> f64 {
    row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
}

/// Transform co-occurrence counts into SPPMI weights.
pub fn build_sppmi(matrix: &CoocMatrix, config: &SppmiConfig) -> Result<SparseEmbeddings> {
    config.validate()?;
    let total = matrix.grand_total();
    if total == 0 {
        return Err(Error::Invalid("co-occurrence matrix is empty".into()));
    }
    let total = total as f64;
    let shift = config.shift_k.ln();
    let row_sums = matrix.row_sums();
    let col_sums = matrix.col_sums();

    let rows: Vec<Vec<(u32, f64)>> = (0..row_sums.len())
        .into_par_iter()
        .map(|w| {
            let rs = row_sums[w] as f64;
            matrix
                .row(w)
                .filter_map(|(c, n)| {
                    let pmi = (n as f64 * total / (rs * col_sums[c] as f64)).ln();
                    let value = pmi - shift;
                    (value > 0.0).then_some((c as u32, value))
                })
                .collect()
        })
        .collect();

    let header = SppmiHeader {
        shift_k: config.shift_k,
        window: None,
        grand_total: matrix.grand_total(),
    };
    Ok(SparseEmbeddings::from_rows(
        WordIndex::new(matrix.vocab().words().to_vec())?,
        rows,
        header,
    ))
}

impl SparseEmbeddings {
    fn from_rows(words: WordIndex, rows: Vec<Vec<(u32, f64)>>, header: SppmiHeader) -> Self {
        let norms = rows.iter().map(|r| row_norm(r)).collect();
        SparseEmbeddings {
            words,
            rows,
            norms,
            header,
        }
    }

    pub fn header(&self) -> &SppmiHeader {
        &self.header
    }

    /// Record the window the underlying counts were collected with.
    pub fn with_window(mut self, window: usize) -> Self {
        self.header.window = Some(window);
        self
    }

    pub fn words(&self) -> &WordIndex {
        &self.words
    }

    /// Stored row of a word as `(context id, weight)` pairs in context order.
    pub fn row(&self, word: &str) -> Result<&[(u32, f64)]> {
        let id = self
            .words
            .id(word)
            .ok_or_else(|| Error::OutOfVocabulary(vec![word.to_owned()]))?;
        Ok(&self.rows[id])
    }

    pub fn row_by_id(&self, id: usize) -> &[(u32, f64)] {
        &self.rows[id]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Dense `|V|×|V|` copy, row-major.
    pub fn densify(&self) -> Vec<Vec<f64>> {
        let n = self.words.len();
        self.rows
            .iter()
            .map(|row| {
                let mut dense = vec![0.0; n];
                for &(c, v) in row {
                    dense[c as usize] = v;
                }
                dense
            })
            .collect()
    }

    /// Write the header, the word list, then `word<TAB>context<TAB>weight` triples.
    pub fn write_tsv<W: Write>(&self, mut writer: W) -> Result<()> {
        let window = self
            .header
            .window
            .map_or_else(|| "-".to_owned(), |w| w.to_string());
        writeln!(
            writer,
            "#sppmi\tshift_k={}\twindow={}\tN={}\twords={}",
            self.header.shift_k,
            window,
            self.header.grand_total,
            self.words.len()
        )?;
        for word in self.words.words() {
            writeln!(writer, "#w\t{word}")?;
        }
        for (w, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                writeln!(
                    writer,
                    "{}\t{}\t{}",
                    self.words.word(w),
                    self.words.word(c as usize),
                    v
                )?;
            }
        }
        writer.flush()?;
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let (_, header_line) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing #sppmi header"))?;
        let header_line = header_line?;
        let mut fields = header_line.split('\t');
        if fields.next() != Some("#sppmi") {
            return Err(Error::parse(1, "expected `#sppmi` header"));
        }
        let mut shift_k = None;
        let mut window = None;
        let mut grand_total = None;
        let mut n_words = None;
        for field in fields {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::parse(1, format!("malformed header field `{field}`")))?;
            let bad = || Error::parse(1, format!("invalid value for `{key}`"));
            match key {
                "shift_k" => shift_k = Some(value.parse::<f64>().map_err(|_| bad())?),
                "window" if value == "-" => {}
                "window" => window = Some(value.parse::<usize>().map_err(|_| bad())?),
                "N" => grand_total = Some(value.parse::<u64>().map_err(|_| bad())?),
                "words" => n_words = Some(value.parse::<usize>().map_err(|_| bad())?),
                _ => {}
            }
        }
        let (Some(shift_k), Some(grand_total), Some(n_words)) = (shift_k, grand_total, n_words)
        else {
            return Err(Error::parse(1, "header must name shift_k, N and words"));
        };

        let mut words = Vec::with_capacity(n_words);
        let mut triples = Vec::new();
        for (i, line) in lines {
            let line_no = i + 1;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            match fields[..] {
                ["#w", word] => {
                    if !triples.is_empty() {
                        return Err(Error::parse(line_no, "word list must precede weights"));
                    }
                    words.push(word.to_owned());
                }
                [w, c, v] => {
                    let value: f64 = v
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("invalid weight `{v}`")))?;
                    if !value.is_finite() || value <= 0.0 {
                        return Err(Error::parse(line_no, "weights must be positive and finite"));
                    }
                    triples.push((line_no, w.to_owned(), c.to_owned(), value));
                }
                _ => {
                    return Err(Error::parse(
                        line_no,
                        "expected `#w<TAB>word` or `word<TAB>context<TAB>weight`",
                    ))
                }
            }
        }
        if words.len() != n_words {
            return Err(Error::parse(
                1,
                format!("header declares {n_words} words, found {}", words.len()),
            ));
        }
        let index = WordIndex::new(words).map_err(|e| Error::parse(1, e.to_string()))?;
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); index.len()];
        for (line_no, w, c, value) in triples {
            let lookup = |word: &str| {
                index
                    .id(word)
                    .ok_or_else(|| Error::parse(line_no, format!("`{word}` not in word list")))
            };
            let (w, c) = (lookup(&w)?, lookup(&c)?);
            rows[w].push((c as u32, value));
        }
        for (w, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|&(c, _)| c);
            if row.windows(2).any(|p| p[0].0 == p[1].0) {
                return Err(Error::Invalid(format!(
                    "duplicate cell in row `{}`",
                    index.word(w)
                )));
            }
        }
        let header = SppmiHeader {
            shift_k,
            window,
            grand_total,
        };
        Ok(Self::from_rows(index, rows, header))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_tsv(BufWriter::new(file))
            .map_err(|e| e.in_file(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_tsv(BufReader::new(file)).map_err(|e| e.in_file(path))
    }
}

impl EmbeddingSpace for SparseEmbeddings {
    fn len(&self) -> usize {
        self.words.len()
    }

    fn dim(&self) -> usize {
        self.words.len()
    }

    fn word(&self, id: usize) -> &str {
        self.words.word(id)
    }

    fn id(&self, word: &str) -> Option<usize> {
        self.words.id(word)
    }

    fn dense_row(&self, id: usize) -> Vec<f64> {
        let mut dense = vec![0.0; self.words.len()];
        for &(c, v) in &self.rows[id] {
            dense[c as usize] = v;
        }
        dense
    }

    fn row_norm(&self, id: usize) -> f64 {
        self.norms[id]
    }

    fn dot_row(&self, id: usize, query: &[f64]) -> f64 {
        self.rows[id]
            .iter()
            .map(|&(c, v)| v * query[c as usize])
            .sum()
    }
}
