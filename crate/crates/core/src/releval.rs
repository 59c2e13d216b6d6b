//! Relation identification benchmark: categorized word tuples, the
//! questions generated from every ordered pair of tuples, and scoring.
//!
//! For tuples `(A, B)` and `(C, D)` of one category the question asks for
//! the word maximizing `cos(v, A − B + D)`; it is answered correctly when
//! that word is `C`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedspace::{analogy_vector, nearest_to_vector, AnalogyOptions, EmbeddingSpace};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationKind {
    Syntactic,
    Semantic,
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RelationKind::Syntactic => "syntactic",
            RelationKind::Semantic => "semantic",
        })
    }
}

impl FromStr for RelationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "syntactic" => Ok(RelationKind::Syntactic),
            "semantic" => Ok(RelationKind::Semantic),
            other => Err(Error::Invalid(format!(
                "unknown relation kind `{other}` (expected syntactic or semantic)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalogyCategory {
    pub name: String,
    pub kind: RelationKind,
    pub tuples: Vec<(String, String)>,
}

impl AnalogyCategory {
    /// Checks that tuples are distinct and never pair a word with itself.
    pub fn new(
        name: impl Into<String>,
        kind: RelationKind,
        tuples: Vec<(String, String)>,
    ) -> Result<Self> {
        let name = name.into();
        let mut seen = HashSet::new();
        for (l, r) in &tuples {
            if l == r {
                return Err(Error::Invalid(format!(
                    "{name}: tuple ({l}, {r}) repeats a word"
                )));
            }
            if !seen.insert((l, r)) {
                return Err(Error::Invalid(format!(
                    "{name}: duplicate tuple ({l}, {r})"
                )));
            }
        }
        Ok(AnalogyCategory { name, kind, tuples })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalogyQuestion {
    pub a: String,
    pub b: String,
    /// The expected answer.
    pub c: String,
    pub d: String,
    pub category: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GeneratedQuestions {
    pub questions: Vec<AnalogyQuestion>,
    /// Ordered tuple pairs whose four words were not pairwise distinct.
    pub dropped: usize,
}

fn questions_for(category: &AnalogyCategory) -> GeneratedQuestions {
    let mut out = GeneratedQuestions::default();
    for (i, (a, b)) in category.tuples.iter().enumerate() {
        for (j, (c, d)) in category.tuples.iter().enumerate() {
            if i == j {
                continue;
            }
            let words = [a, b, c, d];
            let distinct = (0..4).all(|x| (x + 1..4).all(|y| words[x] != words[y]));
            if !distinct {
                out.dropped += 1;
                continue;
            }
            out.questions.push(AnalogyQuestion {
                a: a.clone(),
                b: b.clone(),
                c: c.clone(),
                d: d.clone(),
                category: category.name.clone(),
            });
        }
    }
    out
}

/// One question per ordered pair of distinct tuples (`n·(n−1)` before
/// dropping questions whose words are not pairwise distinct).
pub fn generate_questions(category: &AnalogyCategory) -> Result<GeneratedQuestions> {
    if category.tuples.len() < 2 {
        return Err(Error::Invalid(format!(
            "category `{}` needs at least 2 tuples, has {}",
            category.name,
            category.tuples.len()
        )));
    }
    Ok(questions_for(category))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryResult {
    pub name: String,
    pub kind: RelationKind,
    pub tuples: usize,
    pub generated: usize,
    pub dropped: usize,
    pub attempted: usize,
    pub correct: usize,
    pub skipped_oov: usize,
    /// `correct / attempted`; absent when nothing could be attempted.
    pub accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub categories: Vec<CategoryResult>,
    pub generated: usize,
    pub attempted: usize,
    pub correct: usize,
    pub skipped_oov: usize,
    /// Micro-average over attempted questions; the headline number.
    pub accuracy: Option<f64>,
    /// Unweighted mean over categories with at least one attempted question.
    pub macro_accuracy: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

#[derive(Clone, Copy)]
enum Outcome {
    Skipped,
    Wrong,
    Correct,
}

fn answer<S: EmbeddingSpace + ?Sized>(
    space: &S,
    q: &AnalogyQuestion,
    options: AnalogyOptions,
) -> Outcome {
    let ids = [&q.a, &q.b, &q.d, &q.c].map(|w| space.id(w));
    let [Some(a), Some(b), Some(d), Some(c)] = ids else {
        return Outcome::Skipped;
    };
    let query = analogy_vector(space, a, b, d, options.normalize_inputs);
    let exclude = if options.exclude_query_words {
        vec![a, b, d]
    } else {
        Vec::new()
    };
    match nearest_to_vector(space, &query, 1, &exclude) {
        Ok(top) if top.first().is_some_and(|n| space.id(&n.word) == Some(c)) => Outcome::Correct,
        _ => Outcome::Wrong,
    }
}

/// Score every generated question; questions touching an out-of-vocabulary
/// word are skipped and counted separately.
pub fn evaluate_relations<S: EmbeddingSpace + ?Sized>(
    space: &S,
    categories: &[AnalogyCategory],
    options: AnalogyOptions,
) -> RelationReport {
    let mut results = Vec::with_capacity(categories.len());
    for category in categories {
        let generated = questions_for(category);
        let outcomes: Vec<Outcome> = generated
            .questions
            .par_iter()
            .map(|q| answer(space, q, options))
            .collect();
        let correct = outcomes
            .iter()
            .filter(|o| matches!(o, Outcome::Correct))
            .count();
        let skipped = outcomes
            .iter()
            .filter(|o| matches!(o, Outcome::Skipped))
            .count();
        let attempted = outcomes.len() - skipped;
        results.push(CategoryResult {
            name: category.name.clone(),
            kind: category.kind,
            tuples: category.tuples.len(),
            generated: outcomes.len(),
            dropped: generated.dropped,
            attempted,
            correct,
            skipped_oov: skipped,
            accuracy: ratio(correct, attempted),
        });
    }

    let generated = results.iter().map(|r| r.generated).sum();
    let attempted = results.iter().map(|r| r.attempted).sum();
    let correct = results.iter().map(|r| r.correct).sum();
    let skipped_oov = results.iter().map(|r| r.skipped_oov).sum();
    let scored: Vec<f64> = results.iter().filter_map(|r| r.accuracy).collect();
    let macro_accuracy =
        (!scored.is_empty()).then(|| scored.iter().sum::<f64>() / scored.len() as f64);
    RelationReport {
        categories: results,
        generated,
        attempted,
        correct,
        skipped_oov,
        accuracy: ratio(correct, attempted),
        macro_accuracy,
    }
}

fn fmt_accuracy(acc: Option<f64>) -> String {
    acc.map_or_else(|| "NA".to_owned(), |a| format!("{a:.6}"))
}

impl RelationReport {
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "category\tkind\tattempted\tcorrect\tskipped\taccuracy")?;
        for c in &self.categories {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}",
                c.name,
                c.kind,
                c.attempted,
                c.correct,
                c.skipped_oov,
                fmt_accuracy(c.accuracy)
            )?;
        }
        writeln!(
            w,
            "overall\tmicro\t{}\t{}\t{}\t{}",
            self.attempted,
            self.correct,
            self.skipped_oov,
            fmt_accuracy(self.accuracy)
        )?;
        writeln!(
            w,
            "overall\tmacro\t{}\t{}\t{}\t{}",
            self.attempted,
            self.correct,
            self.skipped_oov,
            fmt_accuracy(self.macro_accuracy)
        )?;
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, self).map_err(|e| Error::Invalid(e.to_string()))?;
        writeln!(w)?;
        Ok(())
    }
}

/// Parse the tuple file format:
///
/// ```text
/// : capitals semantic
/// parijs<TAB>frankrijk
/// berlijn<TAB>duitsland
/// ```
pub fn read_tuples<R: BufRead>(reader: R) -> Result<Vec<AnalogyCategory>> {
    let mut categories: Vec<AnalogyCategory> = Vec::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(header) = trimmed.strip_prefix(':') {
            let parts: Vec<&str> = header.split_whitespace().collect();
            let Some((kind, name)) = parts.split_last().filter(|(_, n)| !n.is_empty()) else {
                return Err(Error::parse(
                    line_no,
                    "expected `: <name> <syntactic|semantic>`",
                ));
            };
            let kind: RelationKind = kind
                .parse()
                .map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
            let name = name.join(" ");
            if categories.iter().any(|c| c.name == name) {
                return Err(Error::parse(
                    line_no,
                    format!("category `{name}` defined twice"),
                ));
            }
            categories.push(AnalogyCategory {
                name,
                kind,
                tuples: Vec::new(),
            });
            seen.clear();
            continue;
        }
        let Some(category) = categories.last_mut() else {
            return Err(Error::parse(
                line_no,
                "tuple before any `: <name> <kind>` header",
            ));
        };
        let fields: Vec<&str> = if trimmed.contains('\t') {
            trimmed.split('\t').map(str::trim).collect()
        } else {
            trimmed.split_whitespace().collect()
        };
        let [left, right] = fields[..] else {
            return Err(Error::parse(line_no, "expected `left<TAB>right`"));
        };
        if left.is_empty() || right.is_empty() || left == right {
            return Err(Error::parse(
                line_no,
                format!("invalid tuple ({left}, {right})"),
            ));
        }
        if !seen.insert((left.to_owned(), right.to_owned())) {
            return Err(Error::parse(
                line_no,
                format!("duplicate tuple ({left}, {right})"),
            ));
        }
        category.tuples.push((left.to_owned(), right.to_owned()));
    }
    Ok(categories)
}

pub fn parse_tuple_file(path: &Path) -> Result<Vec<AnalogyCategory>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_tuples(BufReader::new(file)).map_err(|e| e.in_file(path))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VetReport {
    /// `(category, offending tuples)` for every category with at least one.
    pub offending: Vec<(String, Vec<(String, String)>)>,
}

impl VetReport {
    pub fn is_clean(&self) -> bool {
        self.offending.is_empty()
    }

    pub fn count(&self) -> usize {
        self.offending.iter().map(|(_, t)| t.len()).sum()
    }
}

/// List tuples that use a word outside `allowed`, typically the
/// intersection of all compared models' vocabularies.
pub fn vet_dataset(categories: &[AnalogyCategory], allowed: &BTreeSet<String>) -> VetReport {
    let offending = categories
        .iter()
        .filter_map(|c| {
            let bad: Vec<(String, String)> = c
                .tuples
                .iter()
                .filter(|(l, r)| !allowed.contains(l) || !allowed.contains(r))
                .cloned()
                .collect();
            (!bad.is_empty()).then(|| (c.name.clone(), bad))
        })
        .collect();
    VetReport { offending }
}
