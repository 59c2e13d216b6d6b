use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands;
use crate::config::{PipelineConfig, Settings};
use crate::error::{CliError, CliResult};
use crate::sweep::{run_sweep, SweepGrid};

#[derive(Debug, Parser)]
#[command(
    name = "distsem",
    version,
    about = "Build and evaluate distributional word representations"
)]
pub struct Cli {
    /// Settings file (`key = value` with `[section]` headers) or a metadata
    /// sidecar of an earlier run.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Random seed (default 1).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Training threads; only 1 gives bit-identical reruns.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Override any setting, e.g. `--set model.epochs=3`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lowercase, filter tokens and drop short sentences.
    Preprocess {
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        /// Sentences with fewer tokens are dropped (default 5).
        #[arg(long)]
        min_sentence_tokens: Option<usize>,
        #[arg(long)]
        drop_single_char: bool,
    },
    /// Count word frequencies into a vocabulary file.
    Vocab {
        #[arg(long, num_args = 1..)]
        corpus: Vec<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        max_size: Option<usize>,
        #[arg(long)]
        min_count: Option<u64>,
    },
    /// Count windowed co-occurrences.
    Cooc {
        #[arg(long, num_args = 1..)]
        corpus: Vec<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        vocab: Option<PathBuf>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        dynamic_window: bool,
    },
    /// Train SGNS or SPPMI embeddings and write them with a metadata sidecar.
    Train {
        /// sgns or sppmi.
        #[arg(long)]
        algorithm: Option<String>,
        #[arg(long, num_args = 1..)]
        corpus: Vec<PathBuf>,
        /// Saved vocabulary to use instead of counting the corpus.
        #[arg(long)]
        vocab: Option<PathBuf>,
        /// Directory for hash-named artifacts (default `out`).
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Exact artifact path instead of a config-hash name.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        negatives: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        /// SPPMI shift; 1 gives plain PPMI.
        #[arg(long)]
        shift_k: Option<f64>,
        #[arg(long)]
        min_count: Option<u64>,
        #[arg(long)]
        max_size: Option<usize>,
    },
    /// Score an embedding file on a relation (analogy) dataset.
    EvalRelations {
        /// word2vec text file or SPPMI TSV.
        #[arg(long)]
        embeddings: PathBuf,
        /// Relation tuples: `: name syntactic|semantic` headers, then `left<TAB>right`.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Report prefix; writes PREFIX.tsv and PREFIX.json.
        #[arg(long)]
        output: PathBuf,
        /// Use A − B + D without normalizing the three inputs.
        #[arg(long)]
        raw_analogy: bool,
    },
    /// Classify labelled posts by province.
    EvalDialect {
        /// Embedding file or `province<TAB>word` dictionary.
        #[arg(long)]
        resource: PathBuf,
        /// `province<TAB>post text` lines.
        #[arg(long)]
        posts: Option<PathBuf>,
        /// Province names, then an optional `[countries]` section.
        #[arg(long)]
        targets: Option<PathBuf>,
        /// Report prefix; writes PREFIX.tsv and PREFIX.json.
        #[arg(long)]
        output: PathBuf,
        /// PROV or CO.
        #[arg(long)]
        method: Option<String>,
        /// auto, dense, sparse or dictionary.
        #[arg(long)]
        kind: Option<String>,
        /// Standard-language word list removed from dictionaries.
        #[arg(long)]
        standard: Option<PathBuf>,
    },
    /// Nearest neighbours of words, or analogy answers with --analogy A B D.
    Nn {
        #[arg(long)]
        embeddings: PathBuf,
        #[arg(long, default_value_t = 10)]
        top: usize,
        /// Treat the three words as A B D and answer A − B + D.
        #[arg(long)]
        analogy: bool,
        #[arg(required = true)]
        words: Vec<String>,
    },
    /// Train and evaluate every combination of a settings grid.
    Sweep {
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Artifacts and `leaderboard.tsv` / `leaderboard.json` go here.
        #[arg(long)]
        output_dir: PathBuf,
        /// Combinations trained at once (default 1).
        #[arg(long)]
        parallelism: Option<usize>,
        /// `key=v1,v2,...`; adds to `[grid]` entries from the config file.
        #[arg(long = "grid", value_name = "KEY=VALUES")]
        grid: Vec<String>,
    },
}

fn paths(v: &[PathBuf]) -> Option<String> {
    (!v.is_empty()).then(|| {
        v.iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()
            .join(",")
    })
}

fn display(p: &Option<PathBuf>) -> Option<String> {
    p.as_ref().map(|p| p.display().to_string())
}

impl Cli {
    /// Config file first, then command-specific flags, then `--set`.
    fn settings(&self) -> CliResult<Settings> {
        let mut s = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::new(),
        };
        let mut flags = Settings::new();
        flags.set_opt("seed", self.seed);
        flags.set_opt("workers", self.workers);
        match &self.command {
            Command::Preprocess {
                min_sentence_tokens,
                drop_single_char,
                ..
            } => {
                flags.set_opt("preprocess.min_sentence_tokens", *min_sentence_tokens);
                if *drop_single_char {
                    flags.set("preprocess.drop_single_char", "true");
                }
            }
            Command::Vocab {
                corpus,
                max_size,
                min_count,
                ..
            } => {
                flags.set_opt("corpus.paths", paths(corpus));
                flags.set_opt("vocab.max_size", *max_size);
                flags.set_opt("vocab.min_count", *min_count);
            }
            Command::Cooc {
                corpus,
                vocab,
                window,
                dynamic_window,
                ..
            } => {
                flags.set("model.algorithm", "sppmi");
                flags.set_opt("corpus.paths", paths(corpus));
                flags.set_opt("vocab.path", display(vocab));
                flags.set_opt("model.window", *window);
                if *dynamic_window {
                    flags.set("model.dynamic_window", "true");
                }
            }
            Command::Train {
                algorithm,
                corpus,
                vocab,
                output_dir,
                dim,
                window,
                negatives,
                epochs,
                shift_k,
                min_count,
                max_size,
                ..
            } => {
                flags.set_opt("model.algorithm", algorithm.clone());
                flags.set_opt("corpus.paths", paths(corpus));
                flags.set_opt("vocab.path", display(vocab));
                flags.set_opt("output_dir", display(output_dir));
                flags.set_opt("model.dim", *dim);
                flags.set_opt("model.window", *window);
                flags.set_opt("model.negatives", *negatives);
                flags.set_opt("model.epochs", *epochs);
                flags.set_opt("model.shift_k", *shift_k);
                flags.set_opt("vocab.min_count", *min_count);
                flags.set_opt("vocab.max_size", *max_size);
            }
            Command::EvalRelations {
                dataset,
                raw_analogy,
                ..
            } => {
                flags.set_opt("eval.relations", display(dataset));
                if *raw_analogy {
                    flags.set("eval.normalize_analogy", "false");
                }
            }
            Command::EvalDialect {
                posts,
                targets,
                method,
                kind,
                standard,
                ..
            } => {
                flags.set_opt("eval.posts", display(posts));
                flags.set_opt("eval.targets", display(targets));
                flags.set_opt("eval.method", method.clone());
                flags.set_opt("eval.resource", kind.clone());
                flags.set_opt("eval.standard", display(standard));
            }
            Command::Nn { .. } => {}
            Command::Sweep {
                dataset,
                parallelism,
                grid,
                ..
            } => {
                flags.set_opt("eval.relations", display(dataset));
                flags.set_opt("sweep.parallelism", *parallelism);
                for g in grid {
                    let (k, v) = g.split_once('=').ok_or_else(|| {
                        CliError::usage(format!("--grid expects key=v1,v2, got `{g}`"))
                    })?;
                    flags.set(format!("grid.{}", k.trim()), v.trim());
                }
            }
        }
        for pair in &self.set {
            flags.set_pair(pair)?;
        }
        s.merge(&flags);
        Ok(s)
    }
}

fn need(value: Option<PathBuf>, what: &str) -> CliResult<PathBuf> {
    value.ok_or_else(|| CliError::usage(format!("missing {what}")))
}

/// Execute a parsed command line, writing human-readable results to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    let mut settings = cli.settings()?;
    let sweep_settings = settings.remove_prefix("sweep.");
    let config = PipelineConfig::from_settings(&settings)?;
    let io = |e: std::io::Error| CliError::from(distsem_core::Error::from(e));
    match &cli.command {
        Command::Preprocess { input, output, .. } => {
            let stats = commands::preprocess(input, output, &config.preprocess)?;
            writeln!(out, "kept {} dropped {}", stats.kept, stats.dropped).map_err(io)?;
        }
        Command::Vocab { output, .. } => {
            let v = commands::vocab(&config, output)?;
            writeln!(out, "{} words, {} tokens", v.len(), v.total_tokens()).map_err(io)?;
        }
        Command::Cooc { output, .. } => {
            let m = commands::cooc(&config, output)?;
            writeln!(out, "{} cells, total {}", m.nnz(), m.grand_total()).map_err(io)?;
        }
        Command::Train { output, .. } => {
            let t = commands::train_model(&config, output.as_deref())?;
            writeln!(out, "{}", t.artifact.display()).map_err(io)?;
            writeln!(out, "{}", t.metadata.display()).map_err(io)?;
        }
        Command::EvalRelations {
            embeddings, output, ..
        } => {
            let dataset = need(config.eval.relations.clone(), "--dataset")?;
            let r = commands::eval_relations(embeddings, &dataset, output, &config)?;
            let fmt = |x: Option<f64>| x.map_or_else(|| "NA".into(), |v| format!("{v:.4}"));
            writeln!(
                out,
                "attempted {} skipped {} accuracy {} macro {}",
                r.attempted,
                r.skipped_oov,
                fmt(r.accuracy),
                fmt(r.macro_accuracy)
            )
            .map_err(io)?;
        }
        Command::EvalDialect {
            resource, output, ..
        } => {
            let posts = need(config.eval.posts.clone(), "--posts")?;
            let targets = need(config.eval.targets.clone(), "--targets")?;
            let r = commands::eval_dialect(resource, &posts, &targets, output, &config)?;
            writeln!(
                out,
                "posts {} abstained {} accuracy {:.4} mrr {:.4}",
                r.posts, r.abstained, r.accuracy, r.mrr
            )
            .map_err(io)?;
        }
        Command::Nn {
            embeddings,
            top,
            analogy,
            words,
        } => {
            for (query, hits) in commands::nn(embeddings, words, *analogy, *top, &config)? {
                writeln!(out, "{query}").map_err(io)?;
                for h in hits {
                    writeln!(out, "  {:.4}\t{}", h.similarity, h.word).map_err(io)?;
                }
            }
        }
        Command::Sweep { output_dir, .. } => {
            let dataset = need(config.eval.relations.clone(), "--dataset")?;
            let parallelism = match sweep_settings.get("parallelism") {
                None => 1,
                Some(v) => v.parse().map_err(|_| {
                    distsem_core::Error::Config(format!("sweep.parallelism: cannot parse `{v}`"))
                })?,
            };
            if let Some(k) = sweep_settings.keys().find(|k| *k != "parallelism") {
                return Err(
                    distsem_core::Error::Config(format!("unknown setting sweep.{k}")).into(),
                );
            }
            let grid = SweepGrid::from_settings(&settings)?;
            let (board, path) = run_sweep(&settings, &grid, parallelism, &dataset, output_dir)?;
            let failed = board.rows.iter().filter(|r| r.status != "ok").count();
            writeln!(
                out,
                "{} runs, {} failed, leaderboard {}",
                board.rows.len(),
                failed,
                path.display()
            )
            .map_err(io)?;
        }
    }
    Ok(())
}
