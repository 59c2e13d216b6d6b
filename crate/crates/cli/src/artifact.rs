//! Content-hash naming and metadata sidecars.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use distsem_core::Error;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::CliResult;

/// SHA-256 over the bytes of every file in order, with each file's length
/// mixed in so that moving bytes across a file boundary changes the digest.
pub fn corpus_digest(paths: &[PathBuf]) -> CliResult<String> {
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    for path in paths {
        let mut file = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
        let mut len = 0u64;
        loop {
            let n = file.read(&mut buf).map_err(|e| Error::io(path, e))?;
            if n == 0 {
                break;
            }
            hasher.update(&buf[..n]);
            len += n as u64;
        }
        hasher.update(len.to_le_bytes());
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Short hash of everything that determines a model; evaluation settings and
/// the output directory do not take part.
pub fn config_hash(config: &PipelineConfig) -> CliResult<String> {
    #[derive(Serialize)]
    struct Identity<'a> {
        seed: u64,
        workers: usize,
        corpus: &'a [PathBuf],
        preprocess: &'a distsem_core::PreprocessConfig,
        vocab: &'a crate::config::VocabConfig,
        model: &'a crate::config::ModelConfig,
    }
    let bytes = serde_json::to_vec(&Identity {
        seed: config.seed,
        workers: config.workers,
        corpus: &config.corpus,
        preprocess: &config.preprocess,
        vocab: &config.vocab,
        model: &config.model,
    })?;
    Ok(hex::encode(&Sha256::digest(&bytes)[..8]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub artifact: String,
    pub config_hash: String,
    pub corpus_sha256: String,
    pub config: PipelineConfig,
    pub outputs: serde_json::Value,
}

impl Metadata {
    pub fn new(
        command: &str,
        artifact: &Path,
        config: &PipelineConfig,
        corpus_sha256: String,
        outputs: serde_json::Value,
    ) -> CliResult<Self> {
        Ok(Metadata {
            tool: env!("CARGO_PKG_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            command: command.to_owned(),
            artifact: artifact
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            config_hash: config_hash(config)?,
            corpus_sha256,
            config: config.clone(),
            outputs,
        })
    }

    pub fn sidecar_path(artifact: &Path) -> PathBuf {
        let mut name = artifact.as_os_str().to_owned();
        name.push(".meta.json");
        PathBuf::from(name)
    }

    pub fn save(&self, path: &Path) -> CliResult<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(
            serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::Parse {
                source_name: path.display().to_string(),
                line: e.line(),
                message: e.to_string(),
            })?,
        )
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Make the parent directory of `path` if it is missing.
pub fn ensure_parent(path: &Path) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(())
}

/// Create a file for writing, making parent directories as needed.
pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    ensure_parent(path)?;
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

/// `prefix.tsv` and `prefix.json`.
pub fn report_paths(prefix: &Path) -> (PathBuf, PathBuf) {
    let with = |ext: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(ext);
        PathBuf::from(s)
    };
    (with(".tsv"), with(".json"))
}
