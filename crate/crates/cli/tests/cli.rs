use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cocreate-sim"));
    c.env("COCREATE_SIM_THREADS", "1");
    c
}

fn tiny_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/tiny.toml")
}

fn run(args: &[&str]) -> Output {
    bin()
        .args(args)
        .arg("--quiet")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_config(dir: &Path, edit: impl Fn(String) -> String) -> PathBuf {
    let text = fs::read_to_string(tiny_config()).unwrap();
    let path = dir.join("run.toml");
    fs::write(&path, edit(text)).unwrap();
    path
}

#[test]
fn missing_required_field_is_a_config_error_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |t| t.replace("budget = 12.0\n", ""));
    let out = run(&[
        "train",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("budget"), "{}", stderr(&out));
}

#[test]
fn invalid_value_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |t| t.replace("alpha1 = 0.5", "alpha1 = 0.7"));
    let out = run(&[
        "train",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(!dir.path().join("o").exists());
}

#[test]
fn missing_checkpoint_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "evaluate",
        "--config",
        tiny_config().to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--checkpoint",
        dir.path().join("nope.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
    assert!(stderr(&out).contains("nope.json"));
}

#[test]
fn exploding_learning_rate_reports_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |t| {
        t.replace(
            "[ppo]\n",
            "[ppo]\nactor_lr = 1e300\ncritic_lr = 1e300\nmax_grad_norm = 1e300\n",
        )
    });
    let out = run(&[
        "train",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 5, "{}", stderr(&out));
}

#[test]
fn training_is_reproducible_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&[
            "train",
            "--config",
            tiny_config().to_str().unwrap(),
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    for name in ["curve_seed7.csv", "checkpoint_seed7.json"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn evaluate_writes_totals_with_aggregate_and_manifest_hashes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let o = out_dir.to_str().unwrap();
    let cfg = tiny_config();
    let c = cfg.to_str().unwrap();
    assert_eq!(
        code(&run(&["train", "--config", c, "--seed", "3", "--out", o])),
        0
    );
    let ev = run(&["evaluate", "--config", c, "--seed", "3", "--out", o]);
    assert_eq!(code(&ev), 0, "{}", stderr(&ev));

    let totals = fs::read_to_string(out_dir.join("totals_seed3.csv")).unwrap();
    let lines: Vec<&str> = totals.lines().collect();
    assert_eq!(lines[0], "user_id,total_reward");
    assert_eq!(lines.len(), 1 + 4 + 1);
    let values: Vec<f64> = lines[1..5]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let agg: f64 = lines[5]
        .strip_prefix("aggregate,")
        .unwrap()
        .parse()
        .unwrap();
    assert!((agg - values.iter().sum::<f64>()).abs() < 1e-9);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "evaluate");
    assert_eq!(manifest["seeds"], serde_json::json!([3]));
    let artifacts = manifest["artifacts"].as_array().unwrap();
    assert!(!artifacts.is_empty());
    for a in artifacts {
        let bytes = fs::read(out_dir.join(a["path"].as_str().unwrap())).unwrap();
        assert_eq!(
            a["sha256"].as_str().unwrap(),
            hex::encode(Sha256::digest(&bytes))
        );
    }
}

#[test]
fn evaluate_rejects_checkpoint_of_another_shape() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("run");
    let c = tiny_config();
    assert_eq!(
        code(&run(&[
            "train",
            "--config",
            c.to_str().unwrap(),
            "--seed",
            "1",
            "--out",
            o.to_str().unwrap()
        ])),
        0
    );
    let other = write_config(dir.path(), |t| t.replace("n_users = 4", "n_users = 5"));
    let ev = run(&[
        "evaluate",
        "--config",
        other.to_str().unwrap(),
        "--out",
        dir.path().join("ev").to_str().unwrap(),
        "--checkpoint",
        o.join("checkpoint_seed1.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&ev), 4, "{}", stderr(&ev));
    assert!(
        stderr(&ev).contains("dimension mismatch"),
        "{}",
        stderr(&ev)
    );
}

#[test]
fn sweep_skips_invalid_points() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |t| t.replace("seeds = [0, 1]", "seeds = [0]"));
    let o = dir.path().join("sweep");
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        o.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(o.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "param,value,seed,mean_total_reward");
    assert_eq!(rows.len(), 2, "{csv}");
    assert!(rows[1].starts_with("alpha1,0.3,0,"));
}

const LIFELOG_HEADER: &str = "participant_id,date,readiness,calories,fatigue,mood,srpe\n";

#[test]
fn ingest_keeps_the_last_duplicate_row() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("log.csv");
    let body = "a,2024-01-01,4,,,,\n\
                a,2024-01-02,6,,,,\n\
                a,2024-01-02,8,,,,\n";
    fs::write(&input, format!("{LIFELOG_HEADER}{body}")).unwrap();
    let o = dir.path().join("ingest");
    let out = run(&[
        "ingest",
        "--input",
        input.to_str().unwrap(),
        "--out",
        o.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let profiles: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(o.join("profiles.json")).unwrap()).unwrap();
    assert_eq!(profiles["a"]["readiness_mean"], 6.0);
    let corr = fs::read_to_string(o.join("correlations.csv")).unwrap();
    assert!(corr.starts_with("indicator,r,n\n"));
}

#[test]
fn ingest_of_empty_file_fails_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.csv");
    fs::write(&input, "").unwrap();
    let o = dir.path().join("ingest");
    let out = run(&[
        "ingest",
        "--input",
        input.to_str().unwrap(),
        "--out",
        o.to_str().unwrap(),
    ]);
    assert_ne!(code(&out), 0);
    assert!(!o.join("profiles.json").exists());
    assert!(!o.join("manifest.json").exists());
}
