//! Flat `key = value` configuration with `[section]` headers.
//!
//! Keys are addressed as `section.key`; keys before the first header have no
//! prefix. Values given on the command line are merged last and win.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use distsem_core::{
    AnalogyOptions, CoocConfig, Error, Method, PreprocessConfig, SgnsConfig, SppmiConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str, source: &str) -> CliResult<Self> {
        let mut settings = Settings::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                source_name: source.to_owned(),
                line: i + 1,
                message,
            };
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| parse_err(format!("unterminated section header `{line}`")))?;
                section = name.trim().to_owned();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(parse_err("empty key".into()).into());
            }
            let full = if section.is_empty() {
                key.to_owned()
            } else {
                format!("{section}.{key}")
            };
            settings.values.insert(full, value.trim().to_owned());
        }
        Ok(settings)
    }

    /// Read a settings file, or the `config` object of a metadata sidecar
    /// (any `.json` file), which re-creates the run that produced it.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if path.extension().is_some_and(|e| e == "json") {
            let meta: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| Error::Parse {
                    source_name: path.display().to_string(),
                    line: e.line(),
                    message: e.to_string(),
                })?;
            let config: PipelineConfig = serde_json::from_value(meta["config"].clone())
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            return Ok(config.to_settings());
        }
        Settings::parse(&text, &path.display().to_string())
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.values.insert(key.into(), value.into());
    }

    pub fn set_opt<T: ToString>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.set(key, v.to_string());
        }
    }

    /// `key=value` as given to `--set`.
    pub fn set_pair(&mut self, pair: &str) -> CliResult<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("--set expects key=value, got `{pair}`")))?;
        self.set(k.trim(), v.trim());
        Ok(())
    }

    pub fn merge(&mut self, other: &Settings) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn remove_prefix(&mut self, prefix: &str) -> BTreeMap<String, String> {
        let keys: Vec<String> = self
            .values
            .keys()
            .filter(|k| k.starts_with(prefix))
            .cloned()
            .collect();
        keys.into_iter()
            .map(|k| {
                let v = self.values.remove(&k).unwrap_or_default();
                (k[prefix.len()..].to_owned(), v)
            })
            .collect()
    }

    /// Canonical text form, one `key = value` per line in key order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

/// Typed reads that remember which keys were consumed or defaulted.
struct Reader<'a> {
    settings: &'a Settings,
    used: BTreeSet<String>,
    defaulted: Vec<String>,
}

impl<'a> Reader<'a> {
    fn raw(&mut self, key: &str) -> Option<&'a str> {
        self.used.insert(key.to_owned());
        let v = self.settings.get(key);
        if v.is_none() {
            self.defaulted.push(key.to_owned());
        }
        v
    }

    fn value<T: FromStr>(&mut self, key: &str, default: T) -> CliResult<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|e| Error::Config(format!("{key}: cannot parse `{v}`: {e}")).into()),
        }
    }

    fn flag(&mut self, key: &str, default: bool) -> CliResult<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" | "on" => Ok(true),
                "false" | "no" | "0" | "off" => Ok(false),
                _ => Err(Error::Config(format!("{key}: expected true or false, got `{v}`")).into()),
            },
        }
    }

    fn list(&mut self, key: &str) -> Vec<String> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_owned)
                    .collect()
            })
            .unwrap_or_default()
    }

    fn path(&mut self, key: &str) -> Option<PathBuf> {
        self.raw(key).filter(|v| !v.is_empty()).map(PathBuf::from)
    }

    fn finish(self) -> CliResult<Vec<String>> {
        let unknown: Vec<&str> = self
            .settings
            .iter()
            .map(|(k, _)| k)
            .filter(|k| !self.used.contains(*k) && !k.starts_with("grid."))
            .collect();
        if !unknown.is_empty() {
            return Err(
                Error::Config(format!("unknown setting(s): {}", unknown.join(", "))).into(),
            );
        }
        Ok(self.defaulted)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "lowercase")]
pub enum ModelConfig {
    Sgns(SgnsParams),
    Sppmi(SppmiParams),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SgnsParams {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_lr: f64,
    pub final_lr_fraction: f64,
    pub subsample_threshold: f64,
    pub unigram_power: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SppmiParams {
    pub window: usize,
    pub dynamic_window: bool,
    pub shift_k: f64,
}

impl ModelConfig {
    pub fn algorithm(&self) -> &'static str {
        match self {
            ModelConfig::Sgns(_) => "sgns",
            ModelConfig::Sppmi(_) => "sppmi",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VocabConfig {
    /// Zero means unlimited.
    pub max_size: usize,
    pub min_count: u64,
    /// Use a saved vocabulary instead of counting the corpus.
    pub path: Option<PathBuf>,
}

impl VocabConfig {
    pub fn max_size(&self) -> Option<usize> {
        (self.max_size > 0).then_some(self.max_size)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub relations: Option<PathBuf>,
    pub posts: Option<PathBuf>,
    pub targets: Option<PathBuf>,
    pub dictionary: Option<PathBuf>,
    pub standard: Option<PathBuf>,
    pub method: Method,
    /// `dense`, `sparse`, `dictionary`, or `auto` (by file contents).
    pub resource: String,
    pub normalize_analogy: bool,
}

impl EvalConfig {
    pub fn analogy_options(&self) -> AnalogyOptions {
        AnalogyOptions {
            exclude_query_words: true,
            normalize_inputs: self.normalize_analogy,
        }
    }
}

/// Every setting of a run, defaults materialized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed: u64,
    pub workers: usize,
    pub output_dir: PathBuf,
    pub corpus: Vec<PathBuf>,
    pub preprocess: PreprocessConfig,
    pub vocab: VocabConfig,
    pub model: ModelConfig,
    pub eval: EvalConfig,
    /// Keys that were not given and took their default.
    #[serde(default)]
    pub defaulted: Vec<String>,
}

const SGNS_ONLY: &[&str] = &[
    "model.dim",
    "model.negatives",
    "model.epochs",
    "model.initial_lr",
    "model.final_lr_fraction",
    "model.subsample_threshold",
    "model.unigram_power",
];
const SPPMI_ONLY: &[&str] = &["model.shift_k", "model.dynamic_window"];

impl PipelineConfig {
    pub fn from_settings(settings: &Settings) -> CliResult<Self> {
        let mut r = Reader {
            settings,
            used: BTreeSet::new(),
            defaulted: Vec::new(),
        };
        let seed = r.value("seed", 1u64)?;
        let workers = r.value("workers", 1usize)?;
        if workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()).into());
        }
        let output_dir = r.path("output_dir").unwrap_or_else(|| PathBuf::from("out"));
        let corpus = r
            .list("corpus.paths")
            .into_iter()
            .map(PathBuf::from)
            .collect();

        let base = PreprocessConfig::default();
        let preprocess = PreprocessConfig {
            lowercase: r.flag("preprocess.lowercase", base.lowercase)?,
            drop_nonalnum_tokens: r
                .flag("preprocess.drop_nonalnum_tokens", base.drop_nonalnum_tokens)?,
            min_sentence_tokens: r
                .value("preprocess.min_sentence_tokens", base.min_sentence_tokens)?,
            drop_single_char: r.flag("preprocess.drop_single_char", base.drop_single_char)?,
            single_char_exceptions: match r.raw("preprocess.single_char_exceptions") {
                None => base.single_char_exceptions,
                Some(v) => v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_owned)
                    .collect(),
            },
        };
        preprocess.validate()?;

        let algorithm = r.value("model.algorithm", "sgns".to_string())?;
        let model = match algorithm.as_str() {
            "sgns" => {
                reject(settings, SPPMI_ONLY, "sgns")?;
                let d = SgnsConfig::default();
                let p = SgnsParams {
                    dim: r.value("model.dim", d.dim)?,
                    window: r.value("model.window", d.window)?,
                    negatives: r.value("model.negatives", d.negatives)?,
                    epochs: r.value("model.epochs", d.epochs)?,
                    initial_lr: r.value("model.initial_lr", d.initial_lr)?,
                    final_lr_fraction: r.value("model.final_lr_fraction", d.final_lr_fraction)?,
                    subsample_threshold: r
                        .value("model.subsample_threshold", d.subsample_threshold)?,
                    unigram_power: r.value("model.unigram_power", d.unigram_power)?,
                };
                ModelConfig::Sgns(p)
            }
            "sppmi" => {
                reject(settings, SGNS_ONLY, "sppmi")?;
                let c = CoocConfig::default();
                ModelConfig::Sppmi(SppmiParams {
                    window: r.value("model.window", c.window)?,
                    dynamic_window: r.flag("model.dynamic_window", c.dynamic_window)?,
                    shift_k: r.value("model.shift_k", SppmiConfig::default().shift_k)?,
                })
            }
            other => {
                return Err(Error::Config(format!(
                    "model.algorithm: unknown algorithm `{other}` (expected sgns or sppmi)"
                ))
                .into())
            }
        };

        let default_min_count = match model {
            ModelConfig::Sgns(_) => 5,
            ModelConfig::Sppmi(_) => 1,
        };
        let vocab = VocabConfig {
            max_size: r.value("vocab.max_size", 50_000usize)?,
            min_count: r.value("vocab.min_count", default_min_count)?,
            path: r.path("vocab.path"),
        };

        let method: String = r.value("eval.method", "prov".to_string())?;
        let method: Method = method
            .parse()
            .map_err(|e: Error| Error::Config(format!("eval.method: {e}")))?;
        let resource = r.value("eval.resource", "auto".to_string())?;
        if !["auto", "dense", "sparse", "dictionary"].contains(&resource.as_str()) {
            return Err(Error::Config(format!(
                "eval.resource: expected auto, dense, sparse or dictionary, got `{resource}`"
            ))
            .into());
        }
        let eval = EvalConfig {
            relations: r.path("eval.relations"),
            posts: r.path("eval.posts"),
            targets: r.path("eval.targets"),
            dictionary: r.path("eval.dictionary"),
            standard: r.path("eval.standard"),
            method,
            resource,
            normalize_analogy: r.flag("eval.normalize_analogy", true)?,
        };

        let config = PipelineConfig {
            seed,
            workers,
            output_dir,
            corpus,
            preprocess,
            vocab,
            model,
            eval,
            defaulted: Vec::new(),
        };
        let defaulted = r.finish()?;
        let config = PipelineConfig {
            defaulted,
            ..config
        };
        config.validate_model()?;
        Ok(config)
    }

    fn validate_model(&self) -> CliResult<()> {
        match &self.model {
            ModelConfig::Sgns(_) => self.sgns_config().validate()?,
            ModelConfig::Sppmi(p) => {
                self.cooc_config().validate()?;
                SppmiConfig { shift_k: p.shift_k }.validate()?;
            }
        }
        Ok(())
    }

    pub fn sgns_config(&self) -> SgnsConfig {
        let ModelConfig::Sgns(p) = &self.model else {
            return SgnsConfig::default();
        };
        SgnsConfig {
            dim: p.dim,
            window: p.window,
            negatives: p.negatives,
            epochs: p.epochs,
            initial_lr: p.initial_lr,
            final_lr_fraction: p.final_lr_fraction,
            subsample_threshold: p.subsample_threshold,
            unigram_power: p.unigram_power,
            seed: self.seed,
            workers: self.workers,
        }
    }

    pub fn cooc_config(&self) -> CoocConfig {
        match &self.model {
            ModelConfig::Sppmi(p) => CoocConfig {
                window: p.window,
                dynamic_window: p.dynamic_window,
            },
            ModelConfig::Sgns(p) => CoocConfig {
                window: p.window,
                dynamic_window: true,
            },
        }
    }

    /// Settings that reproduce this configuration.
    pub fn to_settings(&self) -> Settings {
        let mut s = Settings::new();
        s.set("seed", self.seed.to_string());
        s.set("workers", self.workers.to_string());
        s.set("output_dir", self.output_dir.display().to_string());
        s.set("corpus.paths", join_paths(&self.corpus));
        let p = &self.preprocess;
        s.set("preprocess.lowercase", p.lowercase.to_string());
        s.set(
            "preprocess.drop_nonalnum_tokens",
            p.drop_nonalnum_tokens.to_string(),
        );
        s.set(
            "preprocess.min_sentence_tokens",
            p.min_sentence_tokens.to_string(),
        );
        s.set(
            "preprocess.drop_single_char",
            p.drop_single_char.to_string(),
        );
        s.set(
            "preprocess.single_char_exceptions",
            p.single_char_exceptions
                .iter()
                .cloned()
                .collect::<Vec<_>>()
                .join(","),
        );
        s.set("vocab.max_size", self.vocab.max_size.to_string());
        s.set("vocab.min_count", self.vocab.min_count.to_string());
        s.set_opt("vocab.path", self.vocab.path.as_ref().map(|p| p.display()));
        s.set("model.algorithm", self.model.algorithm());
        match &self.model {
            ModelConfig::Sgns(m) => {
                s.set("model.dim", m.dim.to_string());
                s.set("model.window", m.window.to_string());
                s.set("model.negatives", m.negatives.to_string());
                s.set("model.epochs", m.epochs.to_string());
                s.set("model.initial_lr", m.initial_lr.to_string());
                s.set("model.final_lr_fraction", m.final_lr_fraction.to_string());
                s.set(
                    "model.subsample_threshold",
                    m.subsample_threshold.to_string(),
                );
                s.set("model.unigram_power", m.unigram_power.to_string());
            }
            ModelConfig::Sppmi(m) => {
                s.set("model.window", m.window.to_string());
                s.set("model.dynamic_window", m.dynamic_window.to_string());
                s.set("model.shift_k", m.shift_k.to_string());
            }
        }
        let e = &self.eval;
        s.set_opt("eval.relations", e.relations.as_ref().map(|p| p.display()));
        s.set_opt("eval.posts", e.posts.as_ref().map(|p| p.display()));
        s.set_opt("eval.targets", e.targets.as_ref().map(|p| p.display()));
        s.set_opt(
            "eval.dictionary",
            e.dictionary.as_ref().map(|p| p.display()),
        );
        s.set_opt("eval.standard", e.standard.as_ref().map(|p| p.display()));
        s.set("eval.method", e.method.to_string().to_lowercase());
        s.set("eval.resource", e.resource.clone());
        s.set("eval.normalize_analogy", e.normalize_analogy.to_string());
        s
    }
}

fn reject(settings: &Settings, keys: &[&str], algorithm: &str) -> CliResult<()> {
    let bad: Vec<&str> = keys
        .iter()
        .copied()
        .filter(|k| settings.get(k).is_some())
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{} do(es) not apply to {algorithm}",
            bad.join(", ")
        ))
        .into())
    }
}

fn join_paths(paths: &[PathBuf]) -> String {
    paths
        .iter()
        .map(|p| p.display().to_string())
        .collect::<Vec<_>>()
        .join(",")
}
