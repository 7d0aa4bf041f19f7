use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const FAST: &str = "version = 1\n\n[discovery]\nmin_len = 15\nmax_len = 25\nlength_step = 5\nposition_stride = 3\n\n[forest]\nn_trees = 50\n";

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shapelet"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

/// synth -> discover -> transform on the training data.
fn pipeline(dir: &Path) {
    fs::write(dir.join("run.toml"), FAST).unwrap();
    ok(dir, &["--config", "run.toml", "--seed", "3", "synth", "-o", "train.csv", "--per-class", "12"]);
    ok(dir, &["--config", "run.toml", "discover", "-i", "train.csv", "-o", "s.json"]);
    ok(dir, &["--config", "run.toml", "transform", "-i", "train.csv", "--shapelets", "s.json", "-o", "t.csv"]);
}

#[test]
fn one_day_stream_becomes_288_rows() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut stream = String::new();
    for i in 0..24 * 3600 * 20 {
        stream.push_str(if i % 2 == 0 { "0.5\n" } else { "-0.25\n" });
    }
    fs::write(d.join("day.txt"), stream).unwrap();
    fs::write(
        d.join("seg.toml"),
        "version = 1\n[preprocess]\nsteps = [{ op = \"segment\", window_seconds = 300.0 }]\n",
    )
    .unwrap();
    ok(d, &["--config", "seg.toml", "preprocess", "-i", "day.txt", "-o", "out.csv", "--sample-rate", "20"]);
    let rows = csv_rows(&d.join("out.csv"));
    assert_eq!(rows.len(), 288);
    assert!(rows.iter().all(|r| r.len() == 6001 && r[0] == "?"));
    let meta = json(&d.join("out.csv.meta.json"));
    assert_eq!(meta["kind"], "dataset");
    assert_eq!(meta["rows"], 288);
}

#[test]
fn preprocess_without_steps_copies_the_stream() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("s.txt"), "1.5\n\n-2\n0.125\n").unwrap();
    ok(d, &["preprocess", "-i", "s.txt", "-o", "out.csv", "--label", "quiet"]);
    assert_eq!(fs::read_to_string(d.join("out.csv")).unwrap(), "quiet,1.5,-2,0.125\n");
}

#[test]
fn preprocess_reports_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("empty.txt"), "").unwrap();
    let out = run(d, &["preprocess", "-i", "empty.txt", "-o", "out.csv"]);
    assert_eq!(code(&out), 4);
    assert!(!d.join("out.csv").exists());

    fs::write(d.join("bad.txt"), "1\n2\nthree\n").unwrap();
    let out = run(d, &["preprocess", "-i", "bad.txt", "-o", "out.csv"]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.txt:3"));

    let out = run(d, &["preprocess", "-i", "missing.txt", "-o", "out.csv"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn preprocess_chain_on_labelled_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut csv = String::new();
    for (label, n) in [("A", 5), ("B", 2)] {
        for _ in 0..n {
            csv.push_str(label);
            for i in 0..40 {
                csv.push_str(&format!(",{}", (i as f64 * 0.7).sin()));
            }
            csv.push('\n');
        }
    }
    fs::write(d.join("d.csv"), csv).unwrap();
    fs::write(
        d.join("p.toml"),
        "version = 1\nseed = 4\n[preprocess]\nsteps = [\n  { op = \"decimate\", factor = 2 },\n  { op = \"rms_envelope\", window = 3, side = \"both\" },\n  { op = \"balance\" },\n]\n",
    )
    .unwrap();
    ok(d, &["--config", "p.toml", "preprocess", "--format", "dataset", "-i", "d.csv", "-o", "out.csv"]);
    let rows = csv_rows(&d.join("out.csv"));
    assert_eq!(rows.len(), 8);
    assert_eq!(rows.iter().filter(|r| r[0] == "A").count(), 4);
    assert!(rows.iter().all(|r| r.len() == 21));
}

#[test]
fn discover_writes_report_and_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("run.toml"), FAST).unwrap();
    ok(d, &["--config", "run.toml", "--seed", "8", "synth", "-o", "train.csv", "--per-class", "52", "--length", "80"]);
    let report = ok(d, &["--config", "run.toml", "discover", "-i", "train.csv", "-o", "s.json"]);
    assert!(report.contains("rank,class,ig,threshold,margin,source,offset,length"));
    let art = json(&d.join("s.json"));
    assert_eq!(art["format"], "shapelet-set");
    assert_eq!(art["version"], 1);
    let shapelets = art["shapelet_set"]["shapelets"].as_array().unwrap();
    for class in ["A", "B"] {
        assert!(shapelets.iter().any(|s| s["class_label"] == class), "no shapelet for {class}");
    }
    assert_eq!(art["config"]["discovery"]["min_len"], 15);
    assert_eq!(art["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn discover_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("one.csv"), "A,1,2,3,4,5\nA,2,3,4,5,1\n").unwrap();
    let out = run(d, &["discover", "-i", "one.csv", "-o", "s.json"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("single-class"));
    assert!(!d.join("s.json").exists());

    fs::write(d.join("strict.toml"), "version = 1\n[discovery]\nquality_threshold = 1.0\nmin_len = 10\nmax_len = 10\n").unwrap();
    ok(d, &["--seed", "5", "synth", "-o", "noise.csv", "--per-class", "15", "--amplitude", "0"]);
    let out = run(d, &["--config", "strict.toml", "discover", "-i", "noise.csv", "-o", "s.json"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));

    fs::write(d.join("bad.toml"), "version = 1\n[discovery]\nmin_length = 3\n").unwrap();
    assert_eq!(code(&run(d, &["--config", "bad.toml", "discover", "-i", "noise.csv", "-o", "s.json"])), 4);
}

#[test]
fn transform_layout() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    pipeline(d);
    let art = json(&d.join("s.json"));
    let shapelets = art["shapelet_set"]["shapelets"].as_array().unwrap();
    let rows = csv_rows(&d.join("t.csv"));
    assert_eq!(rows.len(), 25);
    assert_eq!(rows[0].len(), shapelets.len() + 1);
    assert_eq!(rows[0].last().unwrap(), "label");
    for (j, s) in shapelets.iter().enumerate() {
        let source: usize = s["source_id"].as_str().unwrap().parse().unwrap();
        assert_eq!(rows[1 + source][j], "0", "shapelet {j} at its own source");
    }

    fs::write(d.join("empty.csv"), "").unwrap();
    ok(d, &["transform", "-i", "empty.csv", "--shapelets", "s.json", "-o", "e.csv"]);
    let text = fs::read_to_string(d.join("e.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with(&rows[0].join(",")));
}

#[test]
fn transform_of_1716_series_with_8_shapelets() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("r8.toml"), format!("{FAST}\n").replace("[forest]", "r = 8\n\n[forest]")).unwrap();
    ok(d, &["--config", "r8.toml", "synth", "-o", "train.csv", "--per-class", "10"]);
    ok(d, &["--config", "r8.toml", "--seed", "1", "synth", "-o", "big.csv", "--per-class", "858"]);
    ok(d, &["--config", "r8.toml", "discover", "-i", "train.csv", "-o", "s.json"]);
    ok(d, &["--config", "r8.toml", "transform", "-i", "big.csv", "--shapelets", "s.json", "-o", "t.csv"]);
    let rows = csv_rows(&d.join("t.csv"));
    assert_eq!(rows.len(), 1 + 1716);
    assert!(rows.iter().all(|r| r.len() == 9));
}

#[test]
fn train_predict_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    pipeline(d);
    ok(d, &["--config", "run.toml", "train", "-i", "t.csv", "--shapelets", "s.json", "-o", "m.json"]);
    let model = json(&d.join("m.json"));
    assert_eq!(model["format"], "forest-model");
    assert_eq!(model["model"]["trees"].as_array().unwrap().len(), 50);

    let with = ["--shapelets", "s.json", "--model", "m.json"];
    ok(d, &[&["predict", "-i", "t.csv", "-o", "p.csv"][..], &with].concat());
    let rows = csv_rows(&d.join("p.csv"));
    assert_eq!(rows[0], ["row", "label", "prob(A)", "prob(B)"]);
    for r in &rows[1..] {
        let (a, b): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
        assert!((a + b - 1.0).abs() < 1e-8);
        assert_eq!(r[1], if a >= b { "A" } else { "B" });
    }
    let meta = json(&d.join("p.csv.meta.json"));
    assert_eq!(meta["kind"], "predictions");
    assert_eq!(meta["model_sha256"].as_str().unwrap().len(), 64);

    // trees fit the training set exactly, so the confusion matrix is diagonal
    ok(d, &[&["evaluate", "-i", "t.csv", "-o", "e.json"][..], &with].concat());
    let e = json(&d.join("e.json"));
    assert_eq!(e["evaluation"]["accuracy"], 1.0);
    assert_eq!(e["evaluation"]["confusion"]["counts"], serde_json::json!([[12, 0], [0, 12]]));
    assert_eq!(e["evaluation"]["per_class"]["A"]["precision"], 1.0);
    assert_eq!(e["evaluation"]["probability_bands"]["all"].as_array().unwrap().len(), 10);
}

#[test]
fn mismatched_artifacts_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    pipeline(d);
    ok(d, &["--config", "run.toml", "train", "-i", "t.csv", "--shapelets", "s.json", "-o", "m.json"]);

    // a second shapelet set from different data
    ok(d, &["--config", "run.toml", "--seed", "99", "synth", "-o", "other.csv", "--per-class", "12"]);
    ok(d, &["--config", "run.toml", "discover", "-i", "other.csv", "-o", "s2.json"]);
    let out = run(d, &["train", "-i", "t.csv", "--shapelets", "s2.json", "-o", "m2.json"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("fingerprint"));

    ok(d, &["--config", "run.toml", "transform", "-i", "train.csv", "--shapelets", "s2.json", "-o", "t2.csv"]);
    let out = run(d, &["predict", "-i", "t2.csv", "--shapelets", "s2.json", "--model", "m.json", "-o", "p.csv"]);
    assert_eq!(code(&out), 2);
    assert!(!d.join("p.csv").exists());

    let mut text = fs::read_to_string(d.join("t.csv")).unwrap();
    let extra = text.lines().nth(1).unwrap().to_owned();
    text.push_str(&extra);
    fs::write(d.join("t.csv"), text).unwrap();
    let out = run(d, &["train", "-i", "t.csv", "--shapelets", "s.json", "-o", "m3.json"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn seed_and_config_shape_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    pipeline(d);
    ok(d, &["--config", "run.toml", "--seed", "1", "train", "-i", "t.csv", "--shapelets", "s.json", "-o", "a.json"]);
    ok(d, &["--config", "run.toml", "--seed", "1", "--threads", "3", "train", "-i", "t.csv", "--shapelets", "s.json", "-o", "b.json"]);
    ok(d, &["--config", "run.toml", "--seed", "2", "train", "-i", "t.csv", "--shapelets", "s.json", "-o", "c.json"]);
    let (a, b, c) = (fs::read(d.join("a.json")).unwrap(), fs::read(d.join("b.json")).unwrap(), fs::read(d.join("c.json")).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, c);
    let (ja, jc) = (json(&d.join("a.json")), json(&d.join("c.json")));
    assert_ne!(ja["config_hash"], jc["config_hash"]);
    assert_eq!(ja["config"]["forest"]["seed"], 1);
}
