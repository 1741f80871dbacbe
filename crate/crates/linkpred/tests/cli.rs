mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::{release_chain, FAST};

fn linkpred(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linkpred")).args(args).output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn retrospective_then_predict() {
    let releases = release_chain(15, 1);
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("fast.conf");
    fs::write(&conf, FAST).unwrap();
    let out = dir.path().join("run");
    let stdout = ok(&linkpred(&[
        "retrospective",
        "--config",
        p(&conf),
        "--train",
        p(&releases.t0),
        "--validation",
        p(&releases.t1),
        "--test",
        p(&releases.t2),
        "--out-dir",
        p(&out),
        "--seed",
        "3",
        "--workers",
        "2",
        "--set",
        "predictors=AMF,AMFP,AJ",
    ]));
    assert!(stdout.contains("AMFP"), "{stdout}");
    assert!(!stdout.contains("Ensemble"));
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("seed = 3") && manifest.contains("workers = 2"), "{manifest}");

    let predictions = dir.path().join("pred.csv");
    let stdout = ok(&linkpred(&[
        "predict",
        "--model",
        p(&out.join("embeddings_amfp.tsv")),
        "--graph",
        p(&releases.t2),
        "--top-n",
        "5",
        "--output",
        p(&predictions),
    ]));
    assert!(stdout.contains("wrote 5 predictions"), "{stdout}");
    assert_eq!(fs::read_to_string(&predictions).unwrap().lines().count(), 6);
}

#[test]
fn crossval_and_sweep() {
    let releases = release_chain(15, 2);
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("fast.conf");
    fs::write(&conf, FAST).unwrap();

    let out = dir.path().join("cv");
    let stdout = ok(&linkpred(&["crossval", "--config", p(&conf), "--graph", p(&releases.t2), "--folds", "2", "--out-dir", p(&out)]));
    assert!(stdout.contains("±"), "{stdout}");
    assert!(fs::read_to_string(out.join("manifest.txt")).unwrap().contains("folds = 2"));

    let out = dir.path().join("sweep");
    let stdout = ok(&linkpred(&[
        "sweep-alpha",
        "--config",
        p(&conf),
        "--protocol",
        "holdout",
        "--graph",
        p(&releases.t2),
        "--out-dir",
        p(&out),
    ]));
    assert_eq!(fs::read_to_string(out.join("alpha_sweep.csv")).unwrap().lines().count(), 4, "{stdout}");
}

#[test]
fn errors_name_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let out = linkpred(&["holdout", "--graph", p(&missing), "--out-dir", p(dir.path())]);
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.starts_with("error: ") && stderr.contains("nope.csv"), "{stderr}");

    let out = linkpred(&["holdout", "--set", "k=zero"]);
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("invalid configuration"));

    let out = linkpred(&["retrospective", "--out-dir", p(dir.path())]);
    assert!(!out.status.success());
}
