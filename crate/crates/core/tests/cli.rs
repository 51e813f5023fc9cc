use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_fairlens");

fn german() -> String {
    format!("{}/data/german.csv", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(BIN).current_dir(dir).args(args).output().unwrap()
}

fn tiny_csv(dir: &Path, positives: usize) -> String {
    let mut text = String::from("a,b,y\n");
    for i in 0..12 {
        let y = u8::from(i < positives);
        let b = if i % 2 == 0 { "x" } else { "z" };
        text.push_str(&format!("{i},{b},{y}\n"));
    }
    let path = dir.join("tiny.csv");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(run(&["--version"], dir.path()).status.code(), Some(0));
}

#[test]
fn bad_arguments_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["audit", "--k"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["audit", "--model", "svm"], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["audit", "--target", "classification"], dir.path()).status.code(), Some(1));
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let data = german();
    let unknown = run(
        &["audit", "--data", &data, "--target", "classification", "--sensitive", "nosuch=x"],
        dir.path(),
    );
    assert_eq!(unknown.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("nosuch"));

    let k1 = run(
        &["audit", "--data", &data, "--target", "classification", "--sensitive", "foreignworker=no", "--k", "1"],
        dir.path(),
    );
    assert_eq!(k1.status.code(), Some(1));

    let missing = run(&["audit", "--data", "does-not-exist.csv", "--target", "y"], dir.path());
    assert_eq!(missing.status.code(), Some(1));

    let threads = Command::new(BIN)
        .current_dir(dir.path())
        .env("FAIRLENS_THREADS", "many")
        .args(["audit", "--data", &data, "--target", "classification"])
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(1));
    assert!(!dir.path().join("fairlens-out").exists());
}

#[test]
fn pipeline_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let data = tiny_csv(dir.path(), 1);
    let out = run(&["audit", "--data", &data, "--target", "y", "--sensitive", "b=x"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn audit_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let data = german();
    let out = run(
        &[
            "audit",
            "--data",
            &data,
            "--target",
            "classification",
            "--sensitive",
            "foreignworker=no,telephone=yes, registered under the customers name",
            "--model",
            "lr",
            "--reps",
            "2",
            "--n-samples",
            "200",
            "--pool-size",
            "30",
            "--out",
            "report",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let root = dir.path().join("report");
    for f in [
        "config.json",
        "summary.json",
        "tables/accuracy.csv",
        "tables/explanations_lr_0.csv",
        "tables/explanations_lr_1.csv",
        "runs/0/record.json",
        "runs/1/record.json",
        "plotdata/metric_points.csv",
        "plotdata/metric_points_per_seed.csv",
    ] {
        assert!(root.join(f).is_file(), "missing {f}");
    }
    let accuracy = std::fs::read_to_string(root.join("tables/accuracy.csv")).unwrap();
    assert!(accuracy.starts_with("row,LR\nOriginal,"));
    let config: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(root.join("config.json")).unwrap()).unwrap();
    assert_eq!(config["repetitions"], 2);
    assert_eq!(config["sensitive"]["telephone"][0], "yes, registered under the customers name");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = serde_json::json!({
        "data": german(),
        "target": "classification",
        "sensitive": {"foreignworker": ["no"]},
        "repetitions": 5,
        "lime": {"n_samples": 200},
        "pool_size": 20
    });
    std::fs::write(dir.path().join("run.json"), cfg.to_string()).unwrap();
    let out = run(&["audit", "--config", "run.json", "--reps", "1", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("o/runs/0/record.json").is_file());
    assert!(!dir.path().join("o/runs/1").exists());

    std::fs::write(dir.path().join("bad.json"), r#"{"data": "x.csv", "colour": 1}"#).unwrap();
    assert_eq!(run(&["audit", "--config", "bad.json"], dir.path()).status.code(), Some(1));
}

#[test]
fn explain_prints_ranked_contributions_and_saves_model() {
    let dir = tempfile::tempdir().unwrap();
    let data = german();
    let out = run(
        &[
            "explain",
            "--data",
            &data,
            "--target",
            "classification",
            "--row",
            "3",
            "--n-samples",
            "500",
            "--save-model",
            "lr.json",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let e: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let contributions = e["contributions"].as_array().unwrap();
    assert_eq!(contributions.len(), 20);
    let magnitudes: Vec<f64> = contributions.iter().map(|c| c["value"].as_f64().unwrap().abs()).collect();
    assert!(magnitudes.windows(2).all(|w| w[0] >= w[1]));

    let again = run(
        &["explain", "--data", &data, "--target", "classification", "--row", "3", "--n-samples", "500", "--load-model", "lr.json"],
        dir.path(),
    );
    assert_eq!(again.stdout, out.stdout);

    let far = run(&["explain", "--data", &data, "--target", "classification", "--row", "1000"], dir.path());
    assert_eq!(far.status.code(), Some(1));
}

#[test]
fn metrics_from_predictions_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = tiny_csv(dir.path(), 6);
    let mut preds = String::from("prediction\n");
    for i in 0..12 {
        preds.push_str(if i < 3 || i == 11 { "1\n" } else { "0\n" });
    }
    std::fs::write(dir.path().join("p.csv"), preds).unwrap();
    let out = run(
        &["metrics", "--data", &data, "--target", "y", "--predictions", "p.csv", "--sensitive", "b=x", "--pe-mode", "conventional"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // Rows 0,2,4,... are privileged (b = x): predictions 1,1,0,0,0,0.
    // Rows 1,3,5,... are unprivileged: predictions 1,0,0,0,0,1.
    let m = &v[0];
    assert_eq!(m["feature"], "b");
    assert!((m["dp"].as_f64().unwrap() - (2.0 / 6.0 - 2.0 / 6.0)).abs() < 1e-12);
    assert!((m["di"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    // Unprivileged: labels 1,1,1,0,0,0 so TP 1, FN 2, FP 1, TN 2.
    // Privileged: labels 1,1,1,0,0,0 so TP 2, FN 1, FP 0, TN 3.
    assert!((m["eo"].as_f64().unwrap() - (1.0 / 3.0 - 2.0 / 3.0)).abs() < 1e-12);
    assert!((m["pe"].as_f64().unwrap() - (1.0 / 3.0)).abs() < 1e-12);

    let short = dir.path().join("short.csv");
    std::fs::write(&short, "prediction\n1\n").unwrap();
    let bad = run(
        &["metrics", "--data", &data, "--target", "y", "--predictions", "short.csv", "--sensitive", "b=x"],
        dir.path(),
    );
    assert_eq!(bad.status.code(), Some(1));
}
