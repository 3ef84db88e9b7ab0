use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use evcoref::pipeline::synthetic_config;

fn evcoref(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evcoref"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path) -> PathBuf {
    let cfg = synthetic_config(dir, 5).unwrap();
    let path = dir.join("config.toml");
    fs::write(&path, cfg.to_toml()).unwrap();
    path
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn stages_run_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let cfg = config.to_str().unwrap();
    let out = dir.path().join("staged");
    let out_s = out.to_str().unwrap();
    for stage in ["ingest", "train", "eval-pairwise", "cluster", "score"] {
        let o = evcoref(&[stage, "--config", cfg, "--out", out_s, "--jobs", "2"]);
        assert_eq!(code(&o), 0, "{stage}: {}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["corpus.jsonl", "model_wd.json", "model_cd.json", "pairwise_cd.csv", "clusters_cd.json", "scores_wd.csv"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let scores = fs::read_to_string(out.join("scores_wd.csv")).unwrap();
    assert!(scores.starts_with("metric,recall,precision,f1\n"));
}

#[test]
fn run_all_writes_manifest_and_honours_scope() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let cfg = config.to_str().unwrap();
    let o = evcoref(&["run-all", "--config", cfg, "--seed", "9"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = fs::read_to_string(dir.path().join("out/manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 9"));

    let wd_only = dir.path().join("wd_only");
    let w = wd_only.to_str().unwrap();
    assert_eq!(code(&evcoref(&["ingest", "--config", cfg, "--out", w])), 0);
    assert_eq!(code(&evcoref(&["train", "--config", cfg, "--out", w, "--scope", "wd"])), 0);
    assert!(wd_only.join("model_wd.json").is_file());
    assert!(!wd_only.join("model_cd.json").exists());
    let o = evcoref(&["eval-pairwise", "--config", cfg, "--out", w, "--scope", "wd", "--threshold", "0.7"]);
    assert_eq!(code(&o), 0);
    assert!(fs::read_to_string(wd_only.join("pairwise_wd.csv")).unwrap().contains("0.7"));
}

#[test]
fn usage_and_config_errors_exit_1() {
    assert_eq!(code(&evcoref(&["frobnicate"])), 1);
    assert_eq!(code(&evcoref(&["train"])), 1);
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let cfg = config.to_str().unwrap();
    assert_eq!(code(&evcoref(&["cluster", "--config", cfg, "--scope", "xd"])), 1);
    assert_eq!(code(&evcoref(&["cluster", "--config", cfg, "--threshold", "1.5"])), 1);
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "seed = \"many\"\n").unwrap();
    assert_eq!(code(&evcoref(&["ingest", "--config", bad.to_str().unwrap()])), 1);
}

#[test]
fn missing_data_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let cfg = config.to_str().unwrap();
    // No ingest yet, so the canonical corpus is absent.
    let o = evcoref(&["train", "--config", cfg]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn divergent_training_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = synthetic_config(dir.path(), 5).unwrap();
    cfg.train.wd.learning_rate = 1e300;
    cfg.train.cd.learning_rate = 1e300;
    let path = dir.path().join("config.toml");
    fs::write(&path, cfg.to_toml()).unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(code(&evcoref(&["ingest", "--config", p])), 0);
    let o = evcoref(&["train", "--config", p]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}
