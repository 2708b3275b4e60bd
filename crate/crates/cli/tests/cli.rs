use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn karnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_karnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn xor_demo_writes_surface_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = karnet(&["xor-demo", "--seed", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let surface = std::fs::read_to_string(dir.path().join("surface.csv")).unwrap();
    let mut lines = surface.lines();
    assert_eq!(lines.next(), Some("x1,x2,two_layer,five_layer"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 101 * 101);
    assert!(rows.iter().all(|r| r.len() == 4 && r.iter().all(|v| v.is_finite())));
    let report = read_json(&dir.path().join("report.json"));
    assert_eq!(report["two_layer"]["outputs"].as_array().unwrap().len(), 4);
}

#[test]
fn train_then_eval_reproduces_training_scores() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let train = karnet(&["train", "--layers", "12", "--seed", "3", "--out", d]);
    assert_eq!(code(&train), 0, "{}", String::from_utf8_lossy(&train.stderr));
    let eval_dir = dir.path().join("eval");
    let weights = dir.path().join("weights.json");
    let report = dir.path().join("report.json");
    let eval = karnet(&[
        "eval",
        "--weights",
        weights.to_str().unwrap(),
        "--scaling",
        report.to_str().unwrap(),
        "--out",
        eval_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&eval), 0, "{}", String::from_utf8_lossy(&eval.stderr));
    let trained = read_json(&report);
    let scored = read_json(&eval_dir.join("report.json"));
    assert_eq!(trained["evaluation"], scored["evaluation"]);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    std::fs::write(&cfg, "# small sweep\ngrid = 10-12\ntrials = 2\nseed = 5\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = karnet(&[
        "iris-sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--trials",
        "1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&out_dir.join("report.json"));
    assert_eq!(report["config"]["trials"], 1);
    assert_eq!(report["config"]["seed"], 5);
    assert_eq!(report["rows"].as_array().unwrap().len(), 3);
    let csv = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn cv_report_aggregates_match_fold_rows() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = karnet(&["cv", "--trials", "2", "--folds", "3", "--layers", "8", "--out", d]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.path().join("report.json"));
    let folds = report["folds"].as_array().unwrap();
    assert_eq!(folds.len(), 6);
    let mean = folds.iter().map(|f| f["accuracy"].as_f64().unwrap()).sum::<f64>() / 6.0;
    assert!((mean - report["mean_accuracy"].as_f64().unwrap()).abs() <= 1e-12);
}

#[test]
fn gradient_check_passes_by_default() {
    let dir = tempfile::tempdir().unwrap();
    let out = karnet(&["gradient-check", "--nets", "5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(read_json(&dir.path().join("report.json"))["passed"], true);
}

#[test]
fn exit_codes_follow_error_category() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();

    assert_eq!(code(&karnet(&["train", "--trainer", "newton", "--out", d])), 2);
    assert_eq!(code(&karnet(&["train", "--layers", "0", "--out", d])), 2);
    assert_eq!(code(&karnet(&["cv", "--folds", "1", "--out", d])), 2);
    assert_eq!(code(&karnet(&["train", "--data", "/no/such/file.csv", "--out", d])), 3);

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a,b,label\n1,2,x\n3,oops,y\n").unwrap();
    let out = karnet(&["train", "--data", bad.to_str().unwrap(), "--out", d]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 3"));

    let one_class = dir.path().join("one.csv");
    std::fs::write(&one_class, "1,2,x\n3,4,x\n").unwrap();
    let out = karnet(&["train", "--data", one_class.to_str().unwrap(), "--header", "false", "--out", d]);
    assert_eq!(code(&out), 3);

    assert_eq!(code(&karnet(&["gradient-check", "--tolerance", "0", "--nets", "2", "--out", d])), 4);
}

#[test]
fn custom_csv_with_label_first() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("blobs.csv");
    let mut text = String::from("label,x,y\n");
    for i in 0..20 {
        let t = i as f64 / 20.0;
        text.push_str(&format!("low,{},{}\n", 0.1 + 0.1 * t, 0.2 - 0.1 * t));
        text.push_str(&format!("high,{},{}\n", 0.9 - 0.1 * t, 0.8 + 0.1 * t));
    }
    std::fs::write(&data, text).unwrap();
    let out = karnet(&[
        "train",
        "--data",
        data.to_str().unwrap(),
        "--label-col",
        "0",
        "--layers",
        "4",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.path().join("report.json"));
    assert_eq!(report["evaluation"]["error_rate"], 0.0);
}
