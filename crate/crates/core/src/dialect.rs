//! Dialect identification: assign a post to a province by letting each of
//! its words vote, either for the province name it is most similar to in an
//! embedding space or for the province whose dialect dictionary lists it.
//!
//! Rankings are scored with accuracy and mean reciprocal rank.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::PreprocessConfig;
use crate::embedspace::EmbeddingSpace;
use crate::error::{Error, Result};

/// Province inventory, optional country names and label aliases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetSet {
    provinces: Vec<String>,
    countries: Vec<String>,
    aliases: HashMap<String, String>,
}

impl TargetSet {
    pub fn new(provinces: Vec<String>, countries: Vec<String>) -> Result<Self> {
        Self::with_aliases(provinces, countries, Vec::new())
    }

    /// `aliases` maps alternative spellings onto canonical province or
    /// country names.
    pub fn with_aliases(
        provinces: Vec<String>,
        countries: Vec<String>,
        aliases: Vec<(String, String)>,
    ) -> Result<Self> {
        let provinces: Vec<String> = provinces.iter().map(|p| p.to_lowercase()).collect();
        let countries: Vec<String> = countries.iter().map(|c| c.to_lowercase()).collect();
        if provinces.is_empty() {
            return Err(Error::Config("target set has no provinces".into()));
        }
        let mut seen = HashSet::new();
        for name in provinces.iter().chain(&countries) {
            if !seen.insert(name.as_str()) {
                return Err(Error::Config(format!(
                    "target `{name}` listed twice or as both province and country"
                )));
            }
        }
        let mut alias_map = HashMap::new();
        for (alias, canonical) in aliases {
            let (alias, canonical) = (alias.to_lowercase(), canonical.to_lowercase());
            if !seen.contains(canonical.as_str()) {
                return Err(Error::Config(format!(
                    "alias `{alias}` points at unknown `{canonical}`"
                )));
            }
            if seen.contains(alias.as_str()) && alias != canonical {
                return Err(Error::Config(format!(
                    "alias `{alias}` shadows a target name"
                )));
            }
            alias_map.insert(alias, canonical);
        }
        Ok(TargetSet {
            provinces,
            countries,
            aliases: alias_map,
        })
    }

    pub fn provinces(&self) -> &[String] {
        &self.provinces
    }

    pub fn countries(&self) -> &[String] {
        &self.countries
    }

    pub fn is_province(&self, name: &str) -> bool {
        self.provinces.iter().any(|p| p == name)
    }

    /// Resolve a name or alias to its canonical province, if it is one.
    pub fn canonical_province(&self, name: &str) -> Option<&str> {
        let lower = name.to_lowercase();
        let resolved = self
            .aliases
            .get(&lower)
            .map_or(lower.as_str(), String::as_str);
        self.provinces
            .iter()
            .find(|p| p.as_str() == resolved)
            .map(String::as_str)
    }

    /// Canonical name followed by its aliases, in sorted alias order.
    fn spellings<'a>(&'a self, canonical: &'a str) -> Vec<&'a str> {
        let mut aliases: Vec<&str> = self
            .aliases
            .iter()
            .filter(|(_, c)| c.as_str() == canonical)
            .map(|(a, _)| a.as_str())
            .collect();
        aliases.sort_unstable();
        std::iter::once(canonical).chain(aliases).collect()
    }

    /// Parse a target file: province lines, then an optional `[countries]`
    /// section. A line may list aliases after the name, separated by tabs.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut provinces = Vec::new();
        let mut countries = Vec::new();
        let mut aliases = Vec::new();
        let mut in_countries = false;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            match trimmed {
                "[provinces]" => {
                    in_countries = false;
                    continue;
                }
                "[countries]" => {
                    in_countries = true;
                    continue;
                }
                s if s.starts_with('[') => {
                    return Err(Error::parse(i + 1, format!("unknown section {s}")));
                }
                _ => {}
            }
            let mut names = trimmed.split('\t').map(str::trim).filter(|s| !s.is_empty());
            let name = names.next().unwrap_or_default().to_owned();
            if name.split_whitespace().count() != 1 {
                return Err(Error::parse(
                    i + 1,
                    format!("target `{name}` must be a single token"),
                ));
            }
            aliases.extend(names.map(|a| (a.to_owned(), name.clone())));
            if in_countries {
                countries.push(name);
            } else {
                provinces.push(name);
            }
        }
        Self::with_aliases(provinces, countries, aliases)
            .map_err(|e| Error::parse(1, e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file)).map_err(|e| e.in_file(path))
    }
}

/// Per-province dialect word sets plus a standard-language word list.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialectDictionary {
    pub provinces: BTreeMap<String, BTreeSet<String>>,
    pub standard: BTreeSet<String>,
}

impl DialectDictionary {
    /// Province sets pairwise disjoint and disjoint from the standard set.
    pub fn check_disjoint(&self) -> Result<()> {
        let mut owner: HashMap<&str, &str> = HashMap::new();
        for (province, words) in &self.provinces {
            for w in words {
                if self.standard.contains(w) {
                    return Err(Error::Invalid(format!(
                        "`{w}` is in both the {province} dictionary and the standard list"
                    )));
                }
                if let Some(other) = owner.insert(w, province) {
                    return Err(Error::Invalid(format!(
                        "`{w}` is listed for both {other} and {province}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn province_of(&self, word: &str) -> Option<&str> {
        self.provinces
            .iter()
            .find(|(_, ws)| ws.contains(word))
            .map(|(p, _)| p.as_str())
    }
}

/// Remove words shared by two or more provinces, then every word that also
/// occurs in the standard-language list.
pub fn dedup_dictionaries(
    raw: BTreeMap<String, BTreeSet<String>>,
    standard: BTreeSet<String>,
) -> DialectDictionary {
    let mut owners: HashMap<String, usize> = HashMap::new();
    for words in raw.values() {
        for w in words {
            *owners.entry(w.clone()).or_insert(0) += 1;
        }
    }
    let provinces = raw
        .into_iter()
        .map(|(province, words)| {
            let kept = words
                .into_iter()
                .filter(|w| owners[w] == 1 && !standard.contains(w))
                .collect();
            (province, kept)
        })
        .collect();
    DialectDictionary {
        provinces,
        standard,
    }
}

/// Read `province<TAB>word` lines into raw (not yet deduplicated) sets.
/// Province names are resolved through the target set's aliases.
pub fn read_dictionary<R: BufRead>(
    reader: R,
    targets: &TargetSet,
) -> Result<BTreeMap<String, BTreeSet<String>>> {
    let mut raw: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let Some((province, word)) = line.split_once('\t') else {
            return Err(Error::parse(i + 1, "expected `province<TAB>word`"));
        };
        let canonical = targets
            .canonical_province(province.trim())
            .ok_or_else(|| Error::parse(i + 1, format!("unknown province `{province}`")))?;
        let word = word.trim().to_lowercase();
        if word.is_empty() || word.contains(char::is_whitespace) {
            return Err(Error::parse(
                i + 1,
                "dictionary entries must be single tokens",
            ));
        }
        raw.entry(canonical.to_owned()).or_default().insert(word);
    }
    Ok(raw)
}

/// One word per line.
pub fn read_word_list<R: BufRead>(reader: R) -> Result<BTreeSet<String>> {
    let mut words = BTreeSet::new();
    for line in reader.lines() {
        let line = line?;
        let w = line.trim();
        if !w.is_empty() {
            words.insert(w.to_lowercase());
        }
    }
    Ok(words)
}

/// Load and deduplicate a dictionary pair from disk.
pub fn load_dictionary(
    dialects: &Path,
    standard: &Path,
    targets: &TargetSet,
) -> Result<DialectDictionary> {
    let open = |p: &Path| {
        File::open(p)
            .map(BufReader::new)
            .map_err(|e| Error::io(p, e))
    };
    let raw = read_dictionary(open(dialects)?, targets).map_err(|e| e.in_file(dialects))?;
    let standard_words = read_word_list(open(standard)?).map_err(|e| e.in_file(standard))?;
    Ok(dedup_dictionaries(raw, standard_words))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledPost {
    pub label: String,
    pub tokens: Vec<String>,
}

/// Read `province<TAB>post text`; tokens go through the token-level
/// preprocessing filters (the sentence-length rule is not applied).
pub fn read_posts<R: BufRead>(
    reader: R,
    preprocess: &PreprocessConfig,
) -> Result<Vec<LabeledPost>> {
    let mut posts = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let Some((label, text)) = line.split_once('\t') else {
            return Err(Error::parse(i + 1, "expected `province<TAB>post text`"));
        };
        let tokens = text
            .split_whitespace()
            .filter_map(|t| preprocess.normalize_token(t))
            .collect();
        posts.push(LabeledPost {
            label: label.trim().to_lowercase(),
            tokens,
        });
    }
    Ok(posts)
}

pub fn load_posts(path: &Path, preprocess: &PreprocessConfig) -> Result<Vec<LabeledPost>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_posts(BufReader::new(file), preprocess).map_err(|e| e.in_file(path))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Vote for the most similar province name.
    #[serde(rename = "PROV")]
    Prov,
    /// Like `Prov`, but country names also attract votes, which are discarded.
    #[serde(rename = "CO")]
    Co,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Prov => "PROV",
            Method::Co => "CO",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "PROV" => Ok(Method::Prov),
            "CO" => Ok(Method::Co),
            _ => Err(Error::Config(format!(
                "unknown method `{s}` (expected PROV or CO)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProvinceVotes {
    pub province: String,
    pub votes: usize,
    /// Sum of the winning similarities behind the votes (0 for dictionaries).
    pub similarity: f64,
}

/// Where the words of a post went.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteTally {
    pub province_votes: usize,
    pub country_votes: usize,
    /// Words unknown to the resource.
    pub unknown: usize,
    /// Words whose vector has zero norm and therefore no nearest target.
    pub zero_vector: usize,
}

impl VoteTally {
    pub fn total(&self) -> usize {
        self.province_votes + self.country_votes + self.unknown + self.zero_vector
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    /// Provinces with at least one vote, best first.
    pub ranked: Vec<ProvinceVotes>,
    pub tally: VoteTally,
}

impl Ranking {
    fn from_votes(votes: BTreeMap<&str, (usize, f64)>, tally: VoteTally) -> Self {
        let mut ranked: Vec<ProvinceVotes> = votes
            .into_iter()
            .map(|(p, (votes, similarity))| ProvinceVotes {
                province: p.to_owned(),
                votes,
                similarity,
            })
            .collect();
        ranked.sort_by(|a, b| {
            b.votes
                .cmp(&a.votes)
                .then_with(|| b.similarity.total_cmp(&a.similarity))
                .then_with(|| a.province.cmp(&b.province))
        });
        Ranking { ranked, tally }
    }

    /// No word voted for any province.
    pub fn abstains(&self) -> bool {
        self.ranked.is_empty()
    }

    pub fn top(&self) -> Option<&str> {
        self.ranked.first().map(|p| p.province.as_str())
    }

    /// 1-based rank of `province`; provinces without votes follow the voted
    /// ones in lexicographic order.
    pub fn rank_of(&self, province: &str, all: &[String]) -> Option<usize> {
        if let Some(pos) = self.ranked.iter().position(|p| p.province == province) {
            return Some(pos + 1);
        }
        let voted: HashSet<&str> = self.ranked.iter().map(|p| p.province.as_str()).collect();
        let mut rest: Vec<&str> = all
            .iter()
            .map(String::as_str)
            .filter(|p| !voted.contains(p))
            .collect();
        rest.sort_unstable();
        rest.iter()
            .position(|p| *p == province)
            .map(|pos| self.ranked.len() + pos + 1)
    }
}

pub trait DialectClassifier: Sync {
    fn classify(&self, post: &[String]) -> Ranking;
}

struct Target {
    name: String,
    is_country: bool,
    vector: Vec<f64>,
    norm: f64,
}

/// PROV / CO classification over any embedding space.
pub struct EmbeddingClassifier<'a, S: EmbeddingSpace + ?Sized> {
    space: &'a S,
    targets: Vec<Target>,
}

impl<'a, S: EmbeddingSpace + ?Sized> EmbeddingClassifier<'a, S> {
    /// Fails when a target name (or any alias of it) is missing from the
    /// space, or when CO is requested without countries.
    pub fn new(space: &'a S, targets: &TargetSet, method: Method) -> Result<Self> {
        if method == Method::Co && targets.countries().is_empty() {
            return Err(Error::Config(
                "method CO requires a [countries] section".into(),
            ));
        }
        let names = targets.provinces().iter().map(|p| (p, false));
        let names: Vec<(&String, bool)> = match method {
            Method::Prov => names.collect(),
            Method::Co => names
                .chain(targets.countries().iter().map(|c| (c, true)))
                .collect(),
        };
        let mut missing = Vec::new();
        let mut resolved = Vec::with_capacity(names.len());
        for (name, is_country) in names {
            let row = targets
                .spellings(name)
                .into_iter()
                .find_map(|s| space.id(s));
            match row {
                Some(row) if space.row_norm(row) > 0.0 => resolved.push(Target {
                    name: name.clone(),
                    is_country,
                    vector: space.dense_row(row),
                    norm: space.row_norm(row),
                }),
                Some(_) => {
                    return Err(Error::Invalid(format!("target `{name}` has a zero vector")));
                }
                None => missing.push(name.clone()),
            }
        }
        if !missing.is_empty() {
            return Err(Error::MissingTargets(missing));
        }
        resolved.sort_by(|a, b| a.name.cmp(&b.name));
        Ok(EmbeddingClassifier {
            space,
            targets: resolved,
        })
    }

    /// Nearest target of one vocabulary row, ties to the smaller name.
    fn nearest_target(&self, row: usize) -> (usize, f64) {
        let wn = self.space.row_norm(row);
        let mut best = (0, f64::NEG_INFINITY);
        for (i, t) in self.targets.iter().enumerate() {
            let sim = self.space.dot_row(row, &t.vector) / (wn * t.norm);
            if sim > best.1 {
                best = (i, sim);
            }
        }
        best
    }
}

impl<S: EmbeddingSpace + ?Sized> DialectClassifier for EmbeddingClassifier<'_, S> {
    fn classify(&self, post: &[String]) -> Ranking {
        let mut tally = VoteTally::default();
        let mut votes: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
        for word in post {
            let Some(row) = self.space.id(word) else {
                tally.unknown += 1;
                continue;
            };
            if self.space.row_norm(row) == 0.0 {
                tally.zero_vector += 1;
                continue;
            }
            let (best, sim) = self.nearest_target(row);
            let target = &self.targets[best];
            if target.is_country {
                tally.country_votes += 1;
            } else {
                tally.province_votes += 1;
                let entry = votes.entry(&target.name).or_insert((0, 0.0));
                entry.0 += 1;
                entry.1 += sim;
            }
        }
        Ranking::from_votes(votes, tally)
    }
}

/// Dictionary lookup: a word votes for the province whose set contains it.
pub struct DictionaryClassifier<'a> {
    owner: HashMap<&'a str, &'a str>,
}

impl<'a> DictionaryClassifier<'a> {
    pub fn new(dict: &'a DialectDictionary, targets: &TargetSet) -> Result<Self> {
        dict.check_disjoint()?;
        let mut owner = HashMap::new();
        for (province, words) in &dict.provinces {
            if !targets.is_province(province) {
                return Err(Error::Config(format!(
                    "dictionary province `{province}` is not in the target set"
                )));
            }
            for w in words {
                owner.insert(w.as_str(), province.as_str());
            }
        }
        Ok(DictionaryClassifier { owner })
    }
}

impl DialectClassifier for DictionaryClassifier<'_> {
    fn classify(&self, post: &[String]) -> Ranking {
        let mut tally = VoteTally::default();
        let mut votes: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
        for word in post {
            match self.owner.get(word.as_str()) {
                Some(province) => {
                    tally.province_votes += 1;
                    votes.entry(province).or_insert((0, 0.0)).0 += 1;
                }
                None => tally.unknown += 1,
            }
        }
        Ranking::from_votes(votes, tally)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProvinceResult {
    pub province: String,
    pub posts: usize,
    pub correct: usize,
    pub abstained: usize,
    pub accuracy: Option<f64>,
    pub mrr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DialectReport {
    pub posts: usize,
    pub correct: usize,
    pub abstained: usize,
    pub accuracy: f64,
    pub mrr: f64,
    pub per_province: Vec<ProvinceResult>,
    /// Fraction of unique test tokens known to the resource, by resource part.
    pub coverage: BTreeMap<String, f64>,
}

/// Per-post outcome of an evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostOutcome {
    pub label: String,
    pub rank: usize,
    pub correct: bool,
    pub abstained: bool,
}

/// Rank the label of every post; abstaining posts count as incorrect and get
/// the rank of the label in the lexicographic fallback order.
pub fn score_posts<C: DialectClassifier + ?Sized>(
    classifier: &C,
    targets: &TargetSet,
    posts: &[LabeledPost],
) -> Result<Vec<PostOutcome>> {
    if posts.is_empty() {
        return Err(Error::Invalid("no posts to evaluate".into()));
    }
    posts
        .par_iter()
        .map(|post| {
            let label = targets
                .canonical_province(&post.label)
                .ok_or_else(|| Error::UnknownLabel(post.label.clone()))?;
            let ranking = classifier.classify(&post.tokens);
            let rank = ranking
                .rank_of(label, targets.provinces())
                .expect("label is a target province");
            let abstained = ranking.abstains();
            Ok(PostOutcome {
                label: label.to_owned(),
                rank,
                correct: !abstained && rank == 1,
                abstained,
            })
        })
        .collect()
}

/// Accuracy, MRR and a per-province breakdown.
pub fn evaluate_dialect<C: DialectClassifier + ?Sized>(
    classifier: &C,
    targets: &TargetSet,
    posts: &[LabeledPost],
) -> Result<DialectReport> {
    Ok(summarize(
        &score_posts(classifier, targets, posts)?,
        targets,
    ))
}

pub fn summarize(outcomes: &[PostOutcome], targets: &TargetSet) -> DialectReport {
    let mut per: BTreeMap<&str, (usize, usize, usize, f64)> = targets
        .provinces()
        .iter()
        .map(|p| (p.as_str(), (0, 0, 0, 0.0)))
        .collect();
    let mut rr_total = 0.0;
    for o in outcomes {
        let rr = 1.0 / o.rank as f64;
        rr_total += rr;
        let entry = per.entry(o.label.as_str()).or_default();
        entry.0 += 1;
        entry.1 += o.correct as usize;
        entry.2 += o.abstained as usize;
        entry.3 += rr;
    }
    let n = outcomes.len();
    let correct = outcomes.iter().filter(|o| o.correct).count();
    let per_province = per
        .into_iter()
        .map(|(p, (posts, correct, abstained, rr))| ProvinceResult {
            province: p.to_owned(),
            posts,
            correct,
            abstained,
            accuracy: (posts > 0).then(|| correct as f64 / posts as f64),
            mrr: (posts > 0).then(|| rr / posts as f64),
        })
        .collect();
    DialectReport {
        posts: n,
        correct,
        abstained: outcomes.iter().filter(|o| o.abstained).count(),
        accuracy: if n == 0 {
            0.0
        } else {
            correct as f64 / n as f64
        },
        mrr: if n == 0 { 0.0 } else { rr_total / n as f64 },
        per_province,
        coverage: BTreeMap::new(),
    }
}

fn unique_tokens(posts: &[LabeledPost]) -> BTreeSet<&str> {
    posts
        .iter()
        .flat_map(|p| p.tokens.iter().map(String::as_str))
        .collect()
}

/// Fraction of unique post tokens for which `known` holds.
pub fn coverage_by(posts: &[LabeledPost], known: impl Fn(&str) -> bool) -> f64 {
    let unique = unique_tokens(posts);
    if unique.is_empty() {
        return 0.0;
    }
    unique.iter().filter(|w| known(w)).count() as f64 / unique.len() as f64
}

pub fn space_coverage<S: EmbeddingSpace + ?Sized>(space: &S, posts: &[LabeledPost]) -> f64 {
    coverage_by(posts, |w| space.contains(w))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DictionaryCoverage {
    pub dialect: f64,
    pub standard: f64,
}

pub fn dictionary_coverage(dict: &DialectDictionary, posts: &[LabeledPost]) -> DictionaryCoverage {
    DictionaryCoverage {
        dialect: coverage_by(posts, |w| dict.provinces.values().any(|s| s.contains(w))),
        standard: coverage_by(posts, |w| dict.standard.contains(w)),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_owned(), |x| format!("{x:.6}"))
}

impl DialectReport {
    /// Columns: `scope name items hits abstained accuracy mrr`. Coverage rows
    /// put the covered fraction in the accuracy column.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "scope\tname\titems\thits\tabstained\taccuracy\tmrr")?;
        for p in &self.per_province {
            writeln!(
                w,
                "province\t{}\t{}\t{}\t{}\t{}\t{}",
                p.province,
                p.posts,
                p.correct,
                p.abstained,
                fmt_opt(p.accuracy),
                fmt_opt(p.mrr)
            )?;
        }
        writeln!(
            w,
            "overall\tall\t{}\t{}\t{}\t{:.6}\t{:.6}",
            self.posts, self.correct, self.abstained, self.accuracy, self.mrr
        )?;
        for (kind, value) in &self.coverage {
            writeln!(w, "coverage\t{kind}\t\t\t\t{value:.6}\t")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut w, self).map_err(|e| Error::Invalid(e.to_string()))?;
        writeln!(w)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedspace::DenseEmbeddings;

    fn words(ws: &[&str]) -> Vec<String> {
        ws.iter().map(|s| s.to_string()).collect()
    }

    fn set(ws: &[&str]) -> BTreeSet<String> {
        ws.iter().map(|s| s.to_string()).collect()
    }

    fn targets() -> TargetSet {
        TargetSet::new(
            words(&["antwerpen", "limburg", "utrecht"]),
            words(&["nederland"]),
        )
        .unwrap()
    }

    #[test]
    fn dedup_removes_shared_and_standard_words() {
        let raw: BTreeMap<String, BTreeSet<String>> = [
            ("p1".to_string(), set(&["x", "y"])),
            ("p2".to_string(), set(&["x", "z"])),
        ]
        .into();
        let d = dedup_dictionaries(raw, BTreeSet::new());
        assert_eq!(d.provinces["p1"], set(&["y"]));
        assert_eq!(d.provinces["p2"], set(&["z"]));

        let raw: BTreeMap<String, BTreeSet<String>> = [("p1".to_string(), set(&["y"]))].into();
        let d = dedup_dictionaries(raw, set(&["y"]));
        assert!(d.provinces["p1"].is_empty());

        let raw: BTreeMap<String, BTreeSet<String>> = [
            ("p1".to_string(), set(&["a"])),
            ("p2".to_string(), set(&["b"])),
        ]
        .into();
        let d = dedup_dictionaries(raw.clone(), BTreeSet::new());
        assert_eq!(d.provinces, raw);
        d.check_disjoint().unwrap();
    }

    fn space() -> DenseEmbeddings {
        DenseEmbeddings::from_rows(vec![
            ("antwerpen".into(), vec![1.0, 0.1]),
            ("limburg".into(), vec![-1.0, 0.0]),
            ("utrecht".into(), vec![0.0, 1.0]),
            ("nederland".into(), vec![0.0, -1.0]),
            ("pintje".into(), vec![1.0, 0.0]),
            ("frietje".into(), vec![0.9, 0.2]),
            ("vlaai".into(), vec![-1.0, 0.1]),
            ("gewoon".into(), vec![0.1, -1.0]),
            ("leeg".into(), vec![0.0, 0.0]),
        ])
        .unwrap()
    }

    #[test]
    fn prov_majority_vote() {
        let s = space();
        let c = EmbeddingClassifier::new(&s, &targets(), Method::Prov).unwrap();
        let r = c.classify(&words(&["pintje", "frietje", "vlaai"]));
        assert_eq!(r.top(), Some("antwerpen"));
        assert_eq!(r.ranked[0].votes, 2);
        assert_eq!(r.ranked[1].province, "limburg");
        // pintje (1,0) vs antwerpen (1,0.1): cos ≈ 0.995
        let expected = 1.0 / (1.01f64).sqrt();
        let single = c.classify(&words(&["pintje"]));
        assert!((single.ranked[0].similarity - expected).abs() < 1e-12);
    }

    #[test]
    fn co_discards_country_votes() {
        let s = space();
        let c = EmbeddingClassifier::new(&s, &targets(), Method::Co).unwrap();
        let r = c.classify(&words(&["gewoon", "nederland"]));
        assert!(r.abstains());
        assert_eq!(r.tally.country_votes, 2);
        let r = c.classify(&words(&["gewoon", "pintje", "onbekend", "leeg"]));
        assert_eq!(r.top(), Some("antwerpen"));
        assert_eq!(r.tally.total(), 4);
        assert_eq!(r.tally.zero_vector, 1);
        assert_eq!(r.tally.unknown, 1);
    }

    #[test]
    fn setup_errors() {
        let s = space();
        let t = TargetSet::new(words(&["antwerpen", "zeeland", "drenthe"]), vec![]).unwrap();
        match EmbeddingClassifier::new(&s, &t, Method::Prov) {
            Err(Error::MissingTargets(m)) => assert_eq!(m, words(&["zeeland", "drenthe"])),
            _ => panic!("expected missing targets"),
        }
        let no_countries = TargetSet::new(words(&["antwerpen"]), vec![]).unwrap();
        assert!(matches!(
            EmbeddingClassifier::new(&s, &no_countries, Method::Co),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn alias_resolves_target_row() {
        let s = space();
        let t = TargetSet::with_aliases(
            words(&["antw"]),
            vec![],
            vec![("antwerpen".into(), "antw".into())],
        )
        .unwrap();
        let c = EmbeddingClassifier::new(&s, &t, Method::Prov).unwrap();
        assert_eq!(c.classify(&words(&["pintje"])).top(), Some("antw"));
        assert_eq!(t.canonical_province("Antwerpen"), Some("antw"));
    }

    #[test]
    fn dictionary_votes() {
        let raw: BTreeMap<String, BTreeSet<String>> = [
            ("antwerpen".to_string(), set(&["pintje", "schoon"])),
            ("limburg".to_string(), set(&["vlaai"])),
        ]
        .into();
        let d = dedup_dictionaries(raw, set(&["schoon"]));
        let c = DictionaryClassifier::new(&d, &targets()).unwrap();
        let r = c.classify(&words(&["pintje", "pintje", "vlaai", "schoon"]));
        assert_eq!(r.top(), Some("antwerpen"));
        assert_eq!(r.tally.province_votes, 3);
        assert_eq!(r.tally.total(), 4);
        assert!(c.classify(&words(&["schoon", "huis"])).abstains());
    }

    #[test]
    fn fallback_ranks_are_lexicographic() {
        let r = Ranking::from_votes([("utrecht", (1, 0.0))].into(), VoteTally::default());
        let all = words(&["utrecht", "limburg", "antwerpen"]);
        assert_eq!(r.rank_of("utrecht", &all), Some(1));
        assert_eq!(r.rank_of("antwerpen", &all), Some(2));
        assert_eq!(r.rank_of("limburg", &all), Some(3));
        let abstain = Ranking::from_votes(BTreeMap::new(), VoteTally::default());
        assert_eq!(abstain.rank_of("antwerpen", &all), Some(1));
    }

    #[test]
    fn abstaining_posts_are_incorrect() {
        let raw: BTreeMap<String, BTreeSet<String>> =
            [("limburg".to_string(), set(&["vlaai"]))].into();
        let d = dedup_dictionaries(raw, BTreeSet::new());
        let c = DictionaryClassifier::new(&d, &targets()).unwrap();
        let posts = vec![LabeledPost {
            label: "antwerpen".into(),
            tokens: words(&["niets"]),
        }];
        let report = evaluate_dialect(&c, &targets(), &posts).unwrap();
        assert_eq!(report.accuracy, 0.0);
        assert_eq!(report.abstained, 1);
        assert_eq!(report.mrr, 1.0);
    }

    #[test]
    fn unknown_label_is_an_error() {
        let d = DialectDictionary::default();
        let c = DictionaryClassifier::new(&d, &targets()).unwrap();
        let posts = vec![LabeledPost {
            label: "gelderland".into(),
            tokens: vec![],
        }];
        assert!(matches!(
            evaluate_dialect(&c, &targets(), &posts),
            Err(Error::UnknownLabel(_))
        ));
        assert!(evaluate_dialect(&c, &targets(), &[]).is_err());
    }

    #[test]
    fn coverage_fractions() {
        let posts = vec![LabeledPost {
            label: "utrecht".into(),
            tokens: words(&["pintje", "vlaai", "pintje", "huis", "fiets"]),
        }];
        let s = space();
        assert!((space_coverage(&s, &posts) - 0.5).abs() < 1e-12);
        let d = DialectDictionary {
            provinces: [("limburg".to_string(), set(&["vlaai"]))].into(),
            standard: set(&["huis", "fiets"]),
        };
        let cov = dictionary_coverage(&d, &posts);
        assert!((cov.dialect - 0.25).abs() < 1e-12);
        assert!((cov.standard - 0.5).abs() < 1e-12);
        assert_eq!(coverage_by(&posts, |_| false), 0.0);
    }

    #[test]
    fn target_file_format() {
        let text =
            "# provinces\nantwerpen\toost-antwerpen\nlimburg\n\n[countries]\nnederland\nbelgië\n";
        let t = TargetSet::read(text.as_bytes()).unwrap();
        assert_eq!(t.provinces(), &words(&["antwerpen", "limburg"])[..]);
        assert_eq!(t.countries().len(), 2);
        assert_eq!(t.canonical_province("oost-antwerpen"), Some("antwerpen"));
        assert!(TargetSet::read("a\n[countries]\na\n".as_bytes()).is_err());
    }

    #[test]
    fn posts_are_normalized() {
        let cfg = PreprocessConfig::default();
        let posts = read_posts("Antwerpen\tEen PINTJE !!\n".as_bytes(), &cfg).unwrap();
        assert_eq!(posts[0].label, "antwerpen");
        assert_eq!(posts[0].tokens, words(&["een", "pintje"]));
        assert!(read_posts("geen tab\n".as_bytes(), &cfg).is_err());
    }
}
