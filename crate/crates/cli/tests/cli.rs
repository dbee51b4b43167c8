use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SMALL: &str = r#"
[synth]
n_genuine = 15
n_fan = 30
n_bot = 20
seed = 3

[synth.genuine]
posts_per_account = 4

[pipeline]
seq_len = 20

[pipeline.model]
embed_dim = 8
conv_filters = 8
conv_kernel = 3
lstm_units = 4

[pipeline.train]
epochs = 2

[pipeline.lda]
k = 4
iters = 20

[pipeline.benchmark.forest]
n_trees = 10
"#;

struct Workspace {
    dir: TempDir,
    config: PathBuf,
}

impl Workspace {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        let config = dir.path().join("config.toml");
        fs::write(&config, SMALL).unwrap();
        Self { dir, config }
    }

    fn out(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    fn run(&self, args: &[&str]) -> Output {
        let out = self.out();
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_impostor"));
        cmd.args(args)
            .arg("--config")
            .arg(&self.config)
            .arg("--out-dir")
            .arg(&out)
            .env("RUST_LOG", "warn");
        cmd.output().unwrap()
    }

    fn ok(&self, args: &[&str]) -> Output {
        let o = self.run(args);
        assert!(
            o.status.success(),
            "{args:?} failed: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        o
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.out().join(name)).unwrap()
    }
}

fn first_lines(path: &Path, n: usize) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .take(n)
        .map(|l| format!("{l}\n"))
        .collect()
}

#[test]
fn full_pipeline_writes_every_artifact() {
    let ws = Workspace::new();
    ws.ok(&["synth"]);
    ws.ok(&["identify"]);
    ws.ok(&["cluster"]);
    ws.ok(&["train"]);
    let eval = ws.ok(&["eval"]);
    let table = String::from_utf8(eval.stdout).unwrap();
    assert!(table.contains("RF + TF-IDF"), "{table}");

    let report = ws.read("report.csv");
    let rows: Vec<&str> = report.lines().skip(1).collect();
    assert_eq!(rows.len(), 3, "{report}");
    assert!(rows[2].starts_with("DNN (post + profile)"));

    let similarity = ws.read("similarity.csv");
    assert_eq!(similarity.lines().count(), 1 + 50);
    assert!(similarity.starts_with("candidate,genuine_target,"));
    assert_eq!(ws.read("assignments.csv").lines().count(), 1 + 50);
    assert!(ws.read("elbow.csv").starts_with("k,wcss"));
    assert_eq!(ws.read("history.csv").lines().count(), 1 + 2);

    let sample = ws.dir.path().join("sample.jsonl");
    fs::write(&sample, first_lines(&ws.out().join("posts.jsonl"), 7)).unwrap();
    ws.ok(&["predict", "--input", sample.to_str().unwrap()]);
    let verdicts = ws.read("verdicts.jsonl");
    assert_eq!(verdicts.lines().count(), 7);
    for line in verdicts.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let p = &v["probs"];
        let sum = p["bot"].as_f64().unwrap()
            + p["fan"].as_f64().unwrap()
            + p["genuine"].as_f64().unwrap();
        assert!((sum - 1.0).abs() < 1e-9);
        assert!(["bot", "fan", "genuine"].contains(&v["label"].as_str().unwrap()));
    }

    for cmd in ["synth", "identify", "cluster", "train", "eval", "predict"] {
        let m: serde_json::Value =
            serde_json::from_str(&ws.read(&format!("manifest-{cmd}.json"))).unwrap();
        assert_eq!(m["command"], cmd);
        assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
        assert!(!m["outputs"].as_array().unwrap().is_empty());
    }
}

#[test]
fn predict_on_empty_input_writes_empty_output() {
    let ws = Workspace::new();
    ws.ok(&["synth"]);
    ws.ok(&["train"]);
    let empty = ws.dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    let o = ws.ok(&["predict", "--input", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(ws.read("verdicts.jsonl"), "");
}

#[test]
fn reruns_are_byte_identical() {
    let a = Workspace::new();
    let b = Workspace::new();
    for ws in [&a, &b] {
        ws.ok(&["synth", "--seed", "11"]);
        ws.ok(&["train", "--seed", "11"]);
    }
    for name in [
        "posts.jsonl",
        "profiles.jsonl",
        "model.bin",
        "vocab.tsv",
        "features.json",
        "history.csv",
    ] {
        assert_eq!(
            fs::read(a.out().join(name)).unwrap(),
            fs::read(b.out().join(name)).unwrap(),
            "{name} differs"
        );
    }
    let ma: serde_json::Value = serde_json::from_str(&a.read("manifest-train.json")).unwrap();
    let mb: serde_json::Value = serde_json::from_str(&b.read("manifest-train.json")).unwrap();
    assert_eq!(ma["config_sha256"], mb["config_sha256"]);
    assert_eq!(ma["seeds"]["train"], 11);
}

#[test]
fn exit_codes_follow_failure_kind() {
    let ws = Workspace::new();
    // Inputs missing: configuration error.
    assert_eq!(ws.run(&["identify"]).status.code(), Some(2));

    let bad = ws.dir.path().join("bad.toml");
    fs::write(&bad, "[pipeline]\nthreshold = 2.0\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_impostor"))
        .args(["synth", "--config"])
        .arg(&bad)
        .arg("--out-dir")
        .arg(ws.out())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));

    ws.ok(&["synth"]);
    ws.ok(&["train"]);
    let broken = ws.dir.path().join("broken.jsonl");
    let mut body = first_lines(&ws.out().join("posts.jsonl"), 2);
    body.push_str("{\"post_id\": 5}\n");
    fs::write(&broken, body).unwrap();
    let o = ws.run(&["predict", "--input", broken.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
    assert!(!ws.out().join("verdicts.jsonl").exists());
}
