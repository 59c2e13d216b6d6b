//! Query layer shared by dense and sparse embeddings: cosine similarity,
//! nearest neighbours, analogy arithmetic and the word2vec text format.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered, duplicate-free word list with reverse lookup.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct WordIndex {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl WordIndex {
    pub fn new(words: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::Invalid(format!("duplicate word `{w}`")));
            }
        }
        Ok(WordIndex { words, index })
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

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

/// Read access to a collection of word vectors, one row per word.
///
/// Implementations only need to expose rows, norms and a dot product against
/// a dense query; ranking and similarity are provided on top of that.
pub trait EmbeddingSpace: Sync {
    fn len(&self) -> usize;

    fn dim(&self) -> usize;

    fn word(&self, id: usize) -> &str;

    fn id(&self, word: &str) -> Option<usize>;

    /// Row `id` as a dense vector of length `dim()`.
    fn dense_row(&self, id: usize) -> Vec<f64>;

    fn row_norm(&self, id: usize) -> f64;

    fn dot_row(&self, id: usize, query: &[f64]) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn contains(&self, word: &str) -> bool {
        self.id(word).is_some()
    }

    fn vector(&self, word: &str) -> Result<Vec<f64>> {
        self.id(word)
            .map(|id| self.dense_row(id))
            .ok_or_else(|| Error::OutOfVocabulary(vec![word.to_owned()]))
    }

    /// Cosine similarity between two vocabulary words.
    fn similarity(&self, a: &str, b: &str) -> Result<Cosine> {
        let (va, vb) = lookup_pair(self, a, b)?;
        cosine(&self.dense_row(va), &self.dense_row(vb))
    }
}

fn lookup_pair<S: EmbeddingSpace + ?Sized>(space: &S, a: &str, b: &str) -> Result<(usize, usize)> {
    match (space.id(a), space.id(b)) {
        (Some(x), Some(y)) => Ok((x, y)),
        (x, y) => {
            let mut missing = Vec::new();
            if x.is_none() {
                missing.push(a.to_owned());
            }
            if y.is_none() {
                missing.push(b.to_owned());
            }
            Err(Error::OutOfVocabulary(missing))
        }
    }
}

/// A cosine value; `zero_vector` is set when either input had zero norm,
/// in which case `value` is 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cosine {
    pub value: f64,
    pub zero_vector: bool,
}

pub fn cosine(a: &[f64], b: &[f64]) -> Result<Cosine> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = norm(a);
    let nb = norm(b);
    Ok(cosine_from_parts(dot, na, nb))
}

fn cosine_from_parts(dot: f64, na: f64, nb: f64) -> Cosine {
    if na == 0.0 || nb == 0.0 {
        Cosine {
            value: 0.0,
            zero_vector: true,
        }
    } else {
        Cosine {
            value: (dot / (na * nb)).clamp(-1.0, 1.0),
            zero_vector: false,
        }
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub word: String,
    pub similarity: f64,
}

/// How the analogy query vector `A − B + D` is assembled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalogyOptions {
    /// Drop the three query words from the candidates.
    pub exclude_query_words: bool,
    /// Unit-normalize A, B and D before combining them.
    pub normalize_inputs: bool,
}

impl Default for AnalogyOptions {
    fn default() -> Self {
        AnalogyOptions {
            exclude_query_words: true,
            normalize_inputs: true,
        }
    }
}

fn by_similarity_then_word(a: &(usize, f64, &str), b: &(usize, f64, &str)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.2.cmp(b.2))
}

/// Rank every row by cosine to `query`, skipping `exclude`.
///
/// Ties are broken by ascending word order.
pub fn nearest_to_vector<S: EmbeddingSpace + ?Sized>(
    space: &S,
    query: &[f64],
    top_n: usize,
    exclude: &[usize],
) -> Result<Vec<Neighbor>> {
    if query.len() != space.dim() {
        return Err(Error::DimensionMismatch {
            left: query.len(),
            right: space.dim(),
        });
    }
    if top_n == 0 {
        return Ok(Vec::new());
    }
    let qnorm = norm(query);
    let mut scored: Vec<(usize, f64, &str)> = (0..space.len())
        .filter(|id| !exclude.contains(id))
        .map(|id| {
            let sim = cosine_from_parts(space.dot_row(id, query), space.row_norm(id), qnorm);
            (id, sim.value, space.word(id))
        })
        .collect();
    if top_n < scored.len() {
        scored.select_nth_unstable_by(top_n - 1, by_similarity_then_word);
        scored.truncate(top_n);
    }
    scored.sort_by(by_similarity_then_word);
    Ok(scored
        .into_iter()
        .map(|(_, similarity, word)| Neighbor {
            word: word.to_owned(),
            similarity,
        })
        .collect())
}

/// The `top_n` words closest to `word`, excluding the word itself.
pub fn nearest_neighbors<S: EmbeddingSpace + ?Sized>(
    space: &S,
    word: &str,
    top_n: usize,
) -> Result<Vec<Neighbor>> {
    let id = space
        .id(word)
        .ok_or_else(|| Error::OutOfVocabulary(vec![word.to_owned()]))?;
    nearest_to_vector(space, &space.dense_row(id), top_n, &[id])
}

/// Words maximizing cosine with `A − B + D`.
pub fn analogy_query<S: EmbeddingSpace + ?Sized>(
    space: &S,
    a: &str,
    b: &str,
    d: &str,
    top_n: usize,
    options: AnalogyOptions,
) -> Result<Vec<Neighbor>> {
    let ids: Vec<Option<usize>> = [a, b, d].iter().map(|w| space.id(w)).collect();
    let missing: Vec<String> = [a, b, d]
        .iter()
        .zip(&ids)
        .filter(|(_, id)| id.is_none())
        .map(|(w, _)| w.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::OutOfVocabulary(missing));
    }
    let ids: Vec<usize> = ids.into_iter().flatten().collect();
    let query = analogy_vector(space, ids[0], ids[1], ids[2], options.normalize_inputs);
    let exclude = if options.exclude_query_words {
        ids
    } else {
        Vec::new()
    };
    nearest_to_vector(space, &query, top_n, &exclude)
}

pub(crate) fn analogy_vector<S: EmbeddingSpace + ?Sized>(
    space: &S,
    a: usize,
    b: usize,
    d: usize,
    normalize: bool,
) -> Vec<f64> {
    let scaled = |id: usize| {
        let row = space.dense_row(id);
        let n = space.row_norm(id);
        if normalize && n > 0.0 {
            row.into_iter().map(|x| x / n).collect()
        } else {
            row
        }
    };
    let (va, vb, vd) = (scaled(a), scaled(b), scaled(d));
    va.iter()
        .zip(&vb)
        .zip(&vd)
        .map(|((x, y), z)| x - y + z)
        .collect()
}

/// Implicit embeddings: a dense `|V|×dim` matrix with cached row norms.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseEmbeddings {
    words: WordIndex,
    dim: usize,
    data: Vec<f64>,
    norms: Vec<f64>,
}

impl DenseEmbeddings {
    /// `data` is row-major with `words.len() * dim` entries.
    pub fn new(words: Vec<String>, dim: usize, data: Vec<f64>) -> Result<Self> {
        let words = WordIndex::new(words)?;
        if data.len() != words.len() * dim {
            return Err(Error::DimensionMismatch {
                left: data.len(),
                right: words.len() * dim,
            });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!(
                "row `{}` contains a non-finite value",
                words.word(pos / dim.max(1))
            )));
        }
        let norms = if dim == 0 {
            vec![0.0; words.len()]
        } else {
            data.chunks(dim).map(norm).collect()
        };
        Ok(DenseEmbeddings {
            words,
            dim,
            data,
            norms,
        })
    }

    pub fn from_rows(rows: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let dim = rows.first().map_or(0, |(_, v)| v.len());
        let mut words = Vec::with_capacity(rows.len());
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (word, v) in rows {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: v.len(),
                    right: dim,
                });
            }
            words.push(word);
            data.extend(v);
        }
        Self::new(words, dim, data)
    }

    pub fn words(&self) -> &WordIndex {
        &self.words
    }

    pub fn row(&self, id: usize) -> &[f64] {
        &self.data[id * self.dim..(id + 1) * self.dim]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Write the word2vec text format: a `|V| dim` header, then
    /// `word v1 … v_dim` with six decimals per value.
    pub fn write_text<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "{} {}", self.words.len(), self.dim)?;
        for (id, word) in self.words.words().iter().enumerate() {
            write!(writer, "{word}")?;
            for v in self.row(id) {
                write!(writer, " {v:.6}")?;
            }
            writeln!(writer)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing `count dim` header"))??;
        let parts: Vec<&str> = header.split_whitespace().collect();
        let (n_words, dim) = match parts[..] {
            [n, d] => match (n.parse::<usize>(), d.parse::<usize>()) {
                (Ok(n), Ok(d)) => (n, d),
                _ => return Err(Error::parse(1, "header values must be integers")),
            },
            _ => return Err(Error::parse(1, "expected `count dim` header")),
        };

        let mut words = Vec::with_capacity(n_words);
        let mut data = Vec::with_capacity(n_words * dim);
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            if words.len() == n_words {
                return Err(Error::parse(
                    line_no,
                    format!("more rows than the {n_words} declared in the header"),
                ));
            }
            let mut fields = line.split_whitespace();
            let word = fields.next().unwrap_or_default();
            let start = data.len();
            for field in fields {
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("invalid number `{field}`")))?;
                data.push(v);
            }
            let found = data.len() - start;
            if found != dim {
                return Err(Error::parse(
                    line_no,
                    format!("expected {dim} values, found {found}"),
                ));
            }
            words.push(word.to_owned());
        }
        if words.len() != n_words {
            return Err(Error::parse(
                1,
                format!("header declares {n_words} rows, found {}", words.len()),
            ));
        }
        Self::new(words, dim, data).map_err(|e| Error::parse(1, e.to_string()))
    }

    pub fn save_text(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_text(BufWriter::new(file))
            .map_err(|e| e.in_file(path))
    }

    pub fn load_text(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_text(BufReader::new(file)).map_err(|e| e.in_file(path))
    }
}

impl EmbeddingSpace for DenseEmbeddings {
    fn len(&self) -> usize {
        self.words.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn word(&self, id: usize) -> &str {
        self.words.word(id)
    }

    fn id(&self, word: &str) -> Option<usize> {
        self.words.id(word)
    }

    fn dense_row(&self, id: usize) -> Vec<f64> {
        self.row(id).to_vec()
    }

    fn row_norm(&self, id: usize) -> f64 {
        self.norms[id]
    }

    fn dot_row(&self, id: usize, query: &[f64]) -> f64 {
        self.row(id).iter().zip(query).map(|(x, y)| x * y).sum()
    }
}
