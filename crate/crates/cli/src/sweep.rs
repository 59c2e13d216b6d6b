//! Grid search over training settings, ranked by relation accuracy.

use std::io::Write;
use std::path::{Path, PathBuf};

use distsem_core::Error;
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::artifact::{create, report_paths, write_json};
use crate::commands::{eval_relations, train_model};
use crate::config::{PipelineConfig, Settings};
use crate::error::{CliError, CliResult};

/// Value lists per setting key; combinations are taken in key order with the
/// last key varying fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepGrid {
    pub params: Vec<(String, Vec<String>)>,
}

impl SweepGrid {
    /// Collect `grid.<key> = v1, v2, ...` entries.
    pub fn from_settings(settings: &Settings) -> CliResult<Self> {
        let params: Vec<(String, Vec<String>)> = settings
            .iter()
            .filter_map(|(k, v)| k.strip_prefix("grid.").map(|k| (k.to_owned(), v)))
            .map(|(k, v)| {
                let values: Vec<String> = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_owned)
                    .collect();
                (k, values)
            })
            .collect();
        let grid = SweepGrid { params };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.params.is_empty() {
            return Err(
                Error::Config("sweep grid is empty (add `grid.<key> = values`)".into()).into(),
            );
        }
        if let Some((k, _)) = self.params.iter().find(|(_, v)| v.is_empty()) {
            return Err(Error::Config(format!("grid.{k} lists no values")).into());
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.params.iter().map(|(_, v)| v.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn combinations(&self) -> Vec<Vec<(String, String)>> {
        let mut out: Vec<Vec<(String, String)>> = vec![Vec::new()];
        for (key, values) in &self.params {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |v| {
                        let mut next = prefix.clone();
                        next.push((key.clone(), v.clone()));
                        next
                    })
                })
                .collect();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// `key=value` pairs of this combination joined by spaces.
    pub config: String,
    pub status: String,
    pub accuracy: Option<f64>,
    pub macro_accuracy: Option<f64>,
    pub attempted: Option<usize>,
    pub artifact: Option<String>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub rows: Vec<SweepRow>,
}

impl Leaderboard {
    /// Scored rows by accuracy descending then config; unscored and failed
    /// rows follow in config order.
    fn sort(&mut self) {
        self.rows.sort_by(|a, b| match (a.accuracy, b.accuracy) {
            (Some(x), Some(y)) => y.total_cmp(&x).then_with(|| a.config.cmp(&b.config)),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => a.config.cmp(&b.config),
        });
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "rank\tstatus\taccuracy\tmacro_accuracy\tattempted\tconfig\tartifact\terror"
        )?;
        let opt = |x: Option<f64>| x.map_or_else(|| "NA".into(), |v| format!("{v:.6}"));
        for (i, r) in self.rows.iter().enumerate() {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                i + 1,
                r.status,
                opt(r.accuracy),
                opt(r.macro_accuracy),
                r.attempted.map_or_else(|| "NA".into(), |a| a.to_string()),
                r.config,
                r.artifact.as_deref().unwrap_or(""),
                r.error.as_deref().unwrap_or("").replace(['\t', '\n'], " ")
            )?;
        }
        Ok(())
    }
}

fn run_one(base: &Settings, combo: &[(String, String)], dataset: &Path) -> SweepRow {
    let label = combo
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ");
    let attempt = || -> CliResult<SweepRow> {
        let mut settings = base.clone();
        for (k, v) in combo {
            settings.set(k.clone(), v.clone());
        }
        let config = PipelineConfig::from_settings(&settings)?;
        let trained = train_model(&config, None)?;
        let prefix = trained.artifact.with_extension("relations");
        let report = eval_relations(&trained.artifact, dataset, &prefix, &config)?;
        Ok(SweepRow {
            config: label.clone(),
            status: "ok".into(),
            accuracy: report.accuracy,
            macro_accuracy: report.macro_accuracy,
            attempted: Some(report.attempted),
            artifact: Some(trained.artifact.display().to_string()),
            error: None,
        })
    };
    match attempt() {
        Ok(row) => {
            info!("{label}: accuracy {:?}", row.accuracy);
            row
        }
        Err(e) => {
            warn!("{label}: {e}");
            SweepRow {
                config: label,
                status: "failed".into(),
                accuracy: None,
                macro_accuracy: None,
                attempted: None,
                artifact: None,
                error: Some(e.to_string()),
            }
        }
    }
}

/// Train and evaluate every combination, at most `parallelism` at a time,
/// and write `leaderboard.tsv` / `leaderboard.json` under `output_dir`.
pub fn run_sweep(
    base: &Settings,
    grid: &SweepGrid,
    parallelism: usize,
    dataset: &Path,
    output_dir: &Path,
) -> CliResult<(Leaderboard, PathBuf)> {
    grid.validate()?;
    if parallelism == 0 {
        return Err(Error::Config("parallelism must be at least 1".into()).into());
    }
    let mut base = base.clone();
    base.remove_prefix("grid.");
    base.set("output_dir", output_dir.display().to_string());
    let combos = grid.combinations();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        combos
            .par_iter()
            .map(|c| run_one(&base, c, dataset))
            .collect()
    });
    let mut board = Leaderboard { rows };
    board.sort();
    let (tsv, json) = report_paths(&output_dir.join("leaderboard"));
    let mut w = create(&tsv)?;
    board
        .write_tsv(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(&tsv, e))?;
    write_json(&json, &board)?;
    Ok((board, tsv))
}
