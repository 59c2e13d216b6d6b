//! Helpers for driving the `distsem` binary from tests.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use distsem_core::AnalogyCategory;

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    pub fn ok(&self) -> &Self {
        assert_eq!(
            self.code, 0,
            "stdout:\n{}\nstderr:\n{}",
            self.stdout, self.stderr
        );
        self
    }
}

pub fn distsem<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let out = Command::new(env!("CARGO_BIN_EXE_distsem"))
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("spawn distsem");
    Output {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn write(path: &Path, text: &str) -> PathBuf {
    fs::write(path, text).unwrap();
    path.to_path_buf()
}

pub fn write_relations(path: &Path, categories: &[AnalogyCategory]) -> PathBuf {
    let mut text = String::new();
    for c in categories {
        writeln!(text, ": {} {}", c.name, c.kind).unwrap();
        for (l, r) in &c.tuples {
            writeln!(text, "{l}\t{r}").unwrap();
        }
    }
    write(path, &text)
}

/// Value after `key` in a line of `key value key value ...` output.
pub fn field(line: &str, key: &str) -> String {
    let parts: Vec<&str> = line.split_whitespace().collect();
    let at = parts
        .iter()
        .position(|p| *p == key)
        .unwrap_or_else(|| panic!("no `{key}` in `{line}`"));
    parts[at + 1].to_owned()
}

pub fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Five posts scored against a small dictionary; by hand the label ranks are
/// 1, 4, 2, 2, 1, so accuracy is 2/5 and MRR is (1 + 1/4 + 1/2 + 1/2 + 1)/5.
pub fn dictionary_fixture(dir: &Path) -> (PathBuf, PathBuf, PathBuf, PathBuf) {
    let targets = write(
        &dir.join("targets.txt"),
        "antwerpen\ngroningen\nlimburg\nutrecht\nzeeland\n",
    );
    let dict = write(
        &dir.join("dict.tsv"),
        "antwerpen\tpintje\nantwerpen\tsjiek\ngroningen\tmoi\ngroningen\twicht\n\
         limburg\thoes\nlimburg\tsjoen\nlimburg\tsjiek\nutrecht\tstoep\nzeeland\tkreke\n",
    );
    let standard = write(&dir.join("standard.txt"), "stoep\n");
    let posts = write(
        &dir.join("posts.tsv"),
        "groningen\tmoi wicht een pintje\n\
         utrecht\tstoep hoes sjoen pintje moi\n\
         zeeland\tkreke hoes sjoen\n\
         limburg\tmoi hoes\n\
         antwerpen\tpintje pintje sjiek\n",
    );
    (targets, dict, standard, posts)
}
