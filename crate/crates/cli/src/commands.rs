//! The pipeline steps behind each subcommand.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use distsem_core::dialect::{
    dictionary_coverage, load_dictionary, load_posts, read_dictionary, space_coverage,
};
use distsem_core::{
    analogy_query, build_sppmi, build_vocabulary, count_cooccurrences, dedup_dictionaries,
    evaluate_dialect, evaluate_relations, nearest_neighbors, parse_tuple_file, train, CoocMatrix,
    CorpusFiles, DenseEmbeddings, DialectReport, DictionaryClassifier, EmbeddingClassifier,
    EmbeddingSpace, Error, Neighbor, Normalized, PreprocessConfig, RelationReport,
    SparseEmbeddings, SppmiConfig, TargetSet, Vocabulary,
};
use log::info;
use serde::Serialize;

use crate::artifact::{corpus_digest, create, ensure_parent, report_paths, Metadata};
use crate::config::{ModelConfig, PipelineConfig};
use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PreprocessStats {
    pub kept: usize,
    pub dropped: usize,
}

/// Normalize every line of `inputs` into `output`, one sentence per line.
/// Blank lines are not sentences and are not counted.
pub fn preprocess(
    inputs: &[PathBuf],
    output: &Path,
    config: &PreprocessConfig,
) -> CliResult<PreprocessStats> {
    config.validate()?;
    let mut stats = PreprocessStats::default();
    let mut out = create(output)?;
    for path in inputs {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.is_empty() {
                continue;
            }
            let kept = distsem_core::normalize_sentence(&tokens, config);
            if kept.is_empty() {
                stats.dropped += 1;
            } else {
                stats.kept += 1;
                writeln!(out, "{}", kept.join(" ")).map_err(|e| Error::io(output, e))?;
            }
        }
    }
    out.flush().map_err(|e| Error::io(output, e))?;
    Ok(stats)
}

fn require_corpus(config: &PipelineConfig) -> CliResult<CorpusFiles> {
    if config.corpus.is_empty() {
        return Err(CliError::usage(
            "no corpus given (corpus.paths or --corpus)",
        ));
    }
    Ok(CorpusFiles::new(config.corpus.iter().cloned()))
}

/// The configured vocabulary: loaded from `vocab.path` or counted.
pub fn vocabulary(config: &PipelineConfig) -> CliResult<Vocabulary> {
    if let Some(path) = &config.vocab.path {
        return Ok(Vocabulary::load(path)?);
    }
    let corpus = require_corpus(config)?;
    Ok(build_vocabulary(
        &corpus,
        &config.preprocess,
        config.vocab.max_size(),
        config.vocab.min_count,
    )?)
}

pub fn vocab(config: &PipelineConfig, output: &Path) -> CliResult<Vocabulary> {
    let vocab = vocabulary(config)?;
    ensure_parent(output)?;
    vocab.save(output)?;
    info!(
        "vocabulary of {} words written to {}",
        vocab.len(),
        output.display()
    );
    Ok(vocab)
}

pub fn cooc(config: &PipelineConfig, output: &Path) -> CliResult<CoocMatrix> {
    let corpus = require_corpus(config)?;
    let vocab = Arc::new(vocabulary(config)?);
    let source = Normalized {
        inner: &corpus,
        config: &config.preprocess,
    };
    let matrix = count_cooccurrences(&source, vocab, &config.cooc_config(), config.seed)?;
    ensure_parent(output)?;
    matrix.save(output)?;
    info!(
        "{} nonzero cells written to {}",
        matrix.nnz(),
        output.display()
    );
    Ok(matrix)
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub artifact: PathBuf,
    pub metadata: PathBuf,
    pub meta: Metadata,
}

/// Train the configured model and write `<algorithm>-<hash>` plus its
/// metadata sidecar into the output directory (or to `artifact` if given).
pub fn train_model(config: &PipelineConfig, artifact: Option<&Path>) -> CliResult<TrainOutcome> {
    let corpus = require_corpus(config)?;
    let digest = corpus_digest(&config.corpus)?;
    let hash = crate::artifact::config_hash(config)?;
    let vocab = Arc::new(vocabulary(config)?);
    let source = Normalized {
        inner: &corpus,
        config: &config.preprocess,
    };
    info!(
        "training {} on {} words (config {hash})",
        config.model.algorithm(),
        vocab.len()
    );
    let target = |name: String| {
        let path = artifact.map_or_else(|| config.output_dir.join(name), Path::to_path_buf);
        ensure_parent(&path).map(|_| path)
    };
    let (path, outputs) = match &config.model {
        ModelConfig::Sgns(_) => {
            let path = target(format!("sgns-{hash}.vec"))?;
            let (embeddings, report) = train(&source, vocab, &config.sgns_config())?;
            embeddings.save_text(&path)?;
            (path, serde_json::to_value(&report)?)
        }
        ModelConfig::Sppmi(p) => {
            let path = target(format!("sppmi-{hash}.tsv"))?;
            let matrix = count_cooccurrences(&source, vocab, &config.cooc_config(), config.seed)?;
            let mut sppmi = build_sppmi(&matrix, &SppmiConfig { shift_k: p.shift_k })?;
            if !p.dynamic_window {
                sppmi = sppmi.with_window(p.window);
            }
            sppmi.save(&path)?;
            let outputs = serde_json::json!({
                "words": sppmi.len(),
                "nonzero_cells": sppmi.nnz(),
                "cooccurrence_cells": matrix.nnz(),
                "grand_total": matrix.grand_total(),
            });
            (path, outputs)
        }
    };
    let meta = Metadata::new("train", &path, config, digest, outputs)?;
    let metadata = Metadata::sidecar_path(&path);
    meta.save(&metadata)?;
    Ok(TrainOutcome {
        artifact: path,
        metadata,
        meta,
    })
}

/// A loaded embedding file of either kind.
pub enum Space {
    Dense(DenseEmbeddings),
    Sparse(SparseEmbeddings),
}

impl Space {
    pub fn as_dyn(&self) -> &dyn EmbeddingSpace {
        match self {
            Space::Dense(d) => d,
            Space::Sparse(s) => s,
        }
    }
}

fn sniff_sparse(path: &Path) -> CliResult<bool> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut first = String::new();
    BufReader::new(file)
        .read_line(&mut first)
        .map_err(|e| Error::io(path, e))?;
    Ok(first.starts_with("#sppmi"))
}

/// Load `path` as `kind` (`dense`, `sparse` or `auto`).
pub fn load_space(path: &Path, kind: &str) -> CliResult<Space> {
    let sparse = match kind {
        "dense" => false,
        "sparse" => true,
        "auto" => sniff_sparse(path)?,
        other => return Err(Error::Config(format!("`{other}` is not an embedding kind")).into()),
    };
    Ok(if sparse {
        Space::Sparse(SparseEmbeddings::load(path)?)
    } else {
        Space::Dense(DenseEmbeddings::load_text(path)?)
    })
}

fn write_reports(
    prefix: &Path,
    tsv: impl FnOnce(&mut dyn Write) -> distsem_core::Result<()>,
    json: impl FnOnce(&mut dyn Write) -> distsem_core::Result<()>,
) -> CliResult<(PathBuf, PathBuf)> {
    let (tsv_path, json_path) = report_paths(prefix);
    let mut w = create(&tsv_path)?;
    tsv(&mut w).map_err(|e| e.in_file(&tsv_path))?;
    w.flush().map_err(|e| Error::io(&tsv_path, e))?;
    let mut w = create(&json_path)?;
    json(&mut w).map_err(|e| e.in_file(&json_path))?;
    w.flush().map_err(|e| Error::io(&json_path, e))?;
    Ok((tsv_path, json_path))
}

pub fn eval_relations(
    embeddings: &Path,
    dataset: &Path,
    prefix: &Path,
    config: &PipelineConfig,
) -> CliResult<RelationReport> {
    let categories = parse_tuple_file(dataset)?;
    let space = load_space(embeddings, resource_kind(config, "auto"))?;
    let report = evaluate_relations(space.as_dyn(), &categories, config.eval.analogy_options());
    write_reports(prefix, |w| report.write_tsv(w), |w| report.write_json(w))?;
    Ok(report)
}

fn resource_kind<'a>(config: &'a PipelineConfig, fallback: &'a str) -> &'a str {
    match config.eval.resource.as_str() {
        "auto" => fallback,
        other => other,
    }
}

fn is_dictionary(path: &Path) -> CliResult<bool> {
    // dictionaries are `province<TAB>word` lines; embeddings start with a
    // `count dim` header or the sppmi header
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut first = String::new();
    BufReader::new(file)
        .read_line(&mut first)
        .map_err(|e| Error::io(path, e))?;
    let first = first.trim();
    let header = first.split_whitespace().count() == 2
        && first.split_whitespace().all(|t| t.parse::<usize>().is_ok());
    Ok(!header && !first.starts_with("#sppmi"))
}

pub fn eval_dialect(
    resource: &Path,
    posts: &Path,
    targets: &Path,
    prefix: &Path,
    config: &PipelineConfig,
) -> CliResult<DialectReport> {
    let targets = TargetSet::load(targets)?;
    let posts = load_posts(posts, &config.preprocess)?;
    let kind = match config.eval.resource.as_str() {
        "auto" if is_dictionary(resource)? => "dictionary",
        other => other,
    };
    let report = if kind == "dictionary" {
        let dict = match &config.eval.standard {
            Some(standard) => load_dictionary(resource, standard, &targets)?,
            None => {
                let file = File::open(resource).map_err(|e| Error::io(resource, e))?;
                let raw = read_dictionary(BufReader::new(file), &targets)
                    .map_err(|e| e.in_file(resource))?;
                dedup_dictionaries(raw, Default::default())
            }
        };
        let classifier = DictionaryClassifier::new(&dict, &targets)?;
        let mut report = evaluate_dialect(&classifier, &targets, &posts)?;
        let cov = dictionary_coverage(&dict, &posts);
        report.coverage.insert("dialect".into(), cov.dialect);
        report.coverage.insert("standard".into(), cov.standard);
        report
    } else {
        let space = load_space(resource, kind)?;
        let classifier = EmbeddingClassifier::new(space.as_dyn(), &targets, config.eval.method)?;
        let mut report = evaluate_dialect(&classifier, &targets, &posts)?;
        report
            .coverage
            .insert("space".into(), space_coverage(space.as_dyn(), &posts));
        report
    };
    write_reports(prefix, |w| report.write_tsv(w), |w| report.write_json(w))?;
    Ok(report)
}

/// Nearest neighbours of each word, or the answers to `a − b + d`.
pub fn nn(
    embeddings: &Path,
    words: &[String],
    analogy: bool,
    top_n: usize,
    config: &PipelineConfig,
) -> CliResult<Vec<(String, Vec<Neighbor>)>> {
    let space = load_space(embeddings, resource_kind(config, "auto"))?;
    let space = space.as_dyn();
    if analogy {
        let [a, b, d] = words else {
            return Err(CliError::usage(
                "--analogy takes exactly three words: A B D",
            ));
        };
        let hits = analogy_query(space, a, b, d, top_n, config.eval.analogy_options())?;
        return Ok(vec![(format!("{a} - {b} + {d}"), hits)]);
    }
    words
        .iter()
        .map(|w| Ok((w.clone(), nearest_neighbors(space, w, top_n)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preprocess_counts_and_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.txt");
        std::fs::write(
            &input,
            "De kat zat op de mat .\n\nHallo daar jij hond\nEen twee drie vier vijf\n",
        )
        .unwrap();
        let once = dir.path().join("once.txt");
        let stats = preprocess(&[input], &once, &PreprocessConfig::default()).unwrap();
        assert_eq!(
            stats,
            PreprocessStats {
                kept: 2,
                dropped: 1
            }
        );
        let twice = dir.path().join("twice.txt");
        let again = preprocess(
            std::slice::from_ref(&once),
            &twice,
            &PreprocessConfig::default(),
        )
        .unwrap();
        assert_eq!(
            again,
            PreprocessStats {
                kept: 2,
                dropped: 0
            }
        );
        assert_eq!(
            std::fs::read(&once).unwrap(),
            std::fs::read(&twice).unwrap()
        );

        let empty = dir.path().join("empty.txt");
        std::fs::write(&empty, "").unwrap();
        let out = dir.path().join("empty.out");
        let stats = preprocess(&[empty], &out, &PreprocessConfig::default()).unwrap();
        assert_eq!(stats, PreprocessStats::default());
        assert!(std::fs::read(&out).unwrap().is_empty());
    }
}
