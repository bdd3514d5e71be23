//! End-to-end runs of the `histrule` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn histrule(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_histrule"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    histrule(args).status.code().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fit_writes_deterministic_model() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for out in [&a, &b] {
        let o = histrule(&[
            "fit", "--family", "linear", "--gamma", "1", "--d", "1", "--n", "1000", "--s", "0.125", "--seed", "7",
            "--out", path_str(out),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stdout).contains("occupied cells: 16"));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn fit_rejects_zero_width() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("points.csv");
    fs::write(&data, "0.5,1\n-0.5,-1\n").unwrap();
    assert_eq!(code(&["fit", "--data", path_str(&data), "--d", "1", "--s", "0"]), 2);
    assert_eq!(code(&["fit", "--data", path_str(&data), "--d", "1"]), 2);
    assert_eq!(code(&["fit", "--data", "/nonexistent/points.csv", "--s", "0.5"]), 2);
}

#[test]
fn predict_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("train.csv");
    fs::write(&data, "# one cell, separable\n0.1,1\n0.4,1\n0.9,1\n").unwrap();
    let model = dir.path().join("model.txt");
    assert_eq!(
        code(&["fit", "--data", path_str(&data), "--s", "1", "--out", path_str(&model)]),
        0
    );
    let labels = dir.path().join("labels.txt");
    let o = histrule(&["predict", "--model", path_str(&model), "--data", path_str(&data), "--out", path_str(&labels)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("empirical risk: 0"));
    let written = fs::read_to_string(&labels).unwrap();
    assert_eq!(written.lines().count(), 3);
    assert!(written.lines().all(|l| l == "1"));

    let wide = dir.path().join("wide.csv");
    fs::write(&wide, "0.1,0.2,1\n0.3,0.4,-1\n").unwrap();
    assert_eq!(code(&["predict", "--model", path_str(&model), "--data", path_str(&wide)]), 2);
}

#[test]
fn verify_exit_codes() {
    let o = histrule(&["verify", "--family", "linear", "--gamma", "1", "--d", "2", "--checks", "lemma-sets,tube,variance,erm"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 4);

    let o = histrule(&["verify", "--family", "far_noise", "--checks", "lower-control"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("FAIL lower-control"));

    assert_eq!(code(&["verify", "--checks", "tube,bogus"]), 2);
    assert_eq!(
        code(&["verify", "--checks", "upper-control,risk-split,approx-error", "--n", "5000", "--trials", "10"]),
        0
    );
}

#[test]
fn rates_exponent_table() {
    let o = histrule(&["rates", "--exponents-only", "--alpha", "1", "--gamma", "1", "--d", "2", "--q", "1", "--family", "power_mass"]);
    assert_eq!(o.status.code(), Some(0));
    let table = String::from_utf8_lossy(&o.stdout);
    let row = |name: &str| {
        table
            .lines()
            .find(|l| l.split_whitespace().next() == Some(name))
            .unwrap()
            .to_string()
    };
    assert!(row("ours").contains("0.4444"));
    assert!(row("svm").contains("0.4000"));
    assert!(row("bicodade_uniform").contains("[log]"));
    assert_eq!(table.lines().count(), 8);
}

#[test]
fn rates_out_of_regime_beta() {
    let o = histrule(&["rates", "--exponents-only", "--beta", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("beta <= kappa/gamma"));
}

#[test]
fn rates_outputs_are_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.csv");
    let many = dir.path().join("many.csv");
    let common = ["rates", "--ns", "256,512,1024", "--reps", "6", "--seed", "3"];
    let mut a = common.to_vec();
    a.extend(["--threads", "1", "--out", path_str(&one)]);
    let mut b = common.to_vec();
    b.extend(["--threads", "3", "--out", path_str(&many)]);
    assert_eq!(code(&a), 0);
    assert_eq!(code(&b), 0);
    assert_eq!(fs::read(&one).unwrap(), fs::read(&many).unwrap());
    assert_eq!(
        fs::read(one.with_extension("json")).unwrap(),
        fs::read(many.with_extension("json")).unwrap()
    );
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(one.with_extension("json")).unwrap()).unwrap();
    assert!((summary["theoretical_exponent"].as_f64().unwrap() - 4.0 / 7.0).abs() < 1e-12);
    assert_eq!(summary["mode"], "fixed_schedule");
    let csv = fs::read_to_string(&one).unwrap();
    assert_eq!(csv.lines().next(), Some("n,mean_excess,std_excess,reps"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn rates_config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    fs::write(
        &cfg,
        r#"{"family": {"kind": "linear", "d": 1, "gamma": 1}, "mode": "tvhr", "ns": [64, 128], "reps": 3, "seed": 5}"#,
    )
    .unwrap();
    let out = dir.path().join("tv.csv");
    assert_eq!(code(&["rates", "--config", path_str(&cfg), "--out", path_str(&out)]), 0);
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(summary["mode"], "tvhr");
    // flags win over the file
    assert_eq!(
        code(&["rates", "--config", path_str(&cfg), "--mode", "fixed_schedule", "--out", path_str(&out)]),
        0
    );
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(summary["mode"], "fixed_schedule");

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"reps": 3, "unknown_key": 1}"#).unwrap();
    assert_eq!(code(&["rates", "--config", path_str(&bad)]), 2);
    assert_eq!(code(&["rates", "--config", "/nonexistent/config.json"]), 2);
    assert_eq!(code(&["rates", "--ns", "512,256"]), 2);
}

#[test]
fn help_version_and_usage_errors() {
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&["rates", "--help"]), 0);
    assert_eq!(code(&[]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["fit", "--family", "quadratic", "--s", "0.5", "--n", "10"]), 2);
}
