mod support;

use std::fs;
use std::path::Path;

use support::*;
use tempfile::tempdir;

fn base_config(dir: &Path) -> std::path::PathBuf {
    let corpus = fixture("mini_corpus.txt");
    write(
        &dir.join("sweep.conf"),
        &format!(
            "[corpus]\npaths = {}\n[model]\nalgorithm = sppmi\n[vocab]\nmin_count = 2\n",
            corpus.display()
        ),
    )
}

fn sweep(dir: &Path, grid: &[&str], parallelism: &str) -> Output {
    let config = base_config(dir);
    let out_dir = dir.join("sweep");
    let dataset = fixture("relations.txt");
    let mut args: Vec<std::ffi::OsString> = vec![
        "--config".into(),
        config.into(),
        "sweep".into(),
        "--dataset".into(),
        dataset.into(),
        "--output-dir".into(),
        out_dir.into(),
        "--parallelism".into(),
        parallelism.into(),
    ];
    for g in grid {
        args.push("--grid".into());
        args.push(g.into());
    }
    distsem(args)
}

fn leaderboard(dir: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(dir.join("sweep/leaderboard.tsv"))
        .unwrap()
        .lines()
        .map(|l| l.split('\t').map(str::to_owned).collect())
        .collect()
}

#[test]
fn single_cell_grid() {
    let dir = tempdir().unwrap();
    let out = sweep(dir.path(), &["model.window=2"], "1");
    out.ok();
    assert!(out.stdout.starts_with("1 runs, 0 failed"), "{}", out.stdout);
    let rows = leaderboard(dir.path());
    assert_eq!(rows[0][0], "rank");
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][1], "ok");
    assert_eq!(rows[1][5], "model.window=2");
    assert!(Path::new(&rows[1][6]).exists());

    // the same run by hand
    let config = base_config(dir.path());
    let trained = distsem([
        "--config".as_ref(),
        config.as_os_str(),
        "train".as_ref(),
        "--window".as_ref(),
        "2".as_ref(),
        "--output-dir".as_ref(),
        dir.path().join("manual").as_os_str(),
    ]);
    trained.ok();
    let artifact = trained.stdout.lines().next().unwrap().to_owned();
    assert_eq!(
        Path::new(&artifact).file_name(),
        Path::new(&rows[1][6]).file_name()
    );
    assert_eq!(fs::read(&artifact).unwrap(), fs::read(&rows[1][6]).unwrap());
    let eval = distsem([
        "eval-relations".as_ref(),
        "--embeddings".as_ref(),
        artifact.as_ref(),
        "--dataset".as_ref(),
        fixture("relations.txt").as_os_str(),
        "--output".as_ref(),
        dir.path().join("manual/rel").as_os_str(),
    ]);
    eval.ok();
    let report = json(&dir.path().join("manual/rel.json"));
    let board = json(&dir.path().join("sweep/leaderboard.json"));
    assert!(report["accuracy"].is_number(), "{report}");
    assert_eq!(board["rows"][0]["accuracy"], report["accuracy"]);
    assert_eq!(board["rows"][0]["attempted"], report["attempted"]);
}

#[test]
fn two_by_two_grid_is_ranked_by_accuracy() {
    let dir = tempdir().unwrap();
    let out = sweep(dir.path(), &["model.window=2,4", "model.shift_k=1,5"], "2");
    out.ok();
    let rows = leaderboard(dir.path());
    assert_eq!(rows.len(), 5);
    let acc: Vec<f64> = rows[1..].iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(acc.windows(2).all(|w| w[0] >= w[1]), "{acc:?}");
    let mut configs: Vec<&str> = rows[1..].iter().map(|r| r[5].as_str()).collect();
    configs.sort_unstable();
    assert_eq!(
        configs,
        [
            "model.shift_k=1 model.window=2",
            "model.shift_k=1 model.window=4",
            "model.shift_k=5 model.window=2",
            "model.shift_k=5 model.window=4",
        ]
    );
    let board = json(&dir.path().join("sweep/leaderboard.json"));
    assert_eq!(board["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn a_failing_combination_is_reported_not_fatal() {
    let dir = tempdir().unwrap();
    let out = sweep(dir.path(), &["model.shift_k=1,5,0.5,10"], "3");
    out.ok();
    assert!(out.stdout.starts_with("4 runs, 1 failed"), "{}", out.stdout);
    let rows = leaderboard(dir.path());
    let ok = rows[1..].iter().filter(|r| r[1] == "ok").count();
    assert_eq!(ok, 3);
    let last = rows.last().unwrap();
    assert_eq!(last[1], "failed");
    assert_eq!(last[5], "model.shift_k=0.5");
    assert_eq!(last[2], "NA");
    assert!(last[7].contains("shift_k"), "{last:?}");
}

#[test]
fn empty_grid_is_a_usage_error() {
    let dir = tempdir().unwrap();
    let out = sweep(dir.path(), &[], "1");
    assert_eq!(out.code, 1, "{}", out.stderr);
}
