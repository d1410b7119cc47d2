use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn hdtm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdtm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = hdtm(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Diamond r→a, r→b, a→d, b→d plus a leaf under a. Sorted ids: a=0, b=1, d=2, e=3, r=4.
fn diamond(dir: &Path) -> PathBuf {
    std::fs::write(
        dir.join("docs.jsonl"),
        concat!(
            r#"{"id":"r","title":"Root","text":"home page site","categories":["top"]}"#, "\n",
            r#"{"id":"a","title":"A","text":"alpha alpha beta","categories":["top","x"]}"#, "\n",
            r#"{"id":"b","title":"B","text":"gamma gamma delta","categories":["top","y"]}"#, "\n",
            r#"{"id":"d","title":"D","text":"alpha beta gamma","categories":["x"]}"#, "\n",
            r#"{"id":"e","title":"E","text":"beta beta","categories":[]}"#, "\n",
        ),
    )
    .unwrap();
    std::fs::write(dir.join("edges.tsv"), "r\ta\nr\tb\na\td\nb\td\na\te\n").unwrap();
    let corpus = dir.join("corpus.json");
    ok(&[
        "ingest",
        "--edges",
        s(&dir.join("edges.tsv")),
        "--docs",
        s(&dir.join("docs.jsonl")),
        "--root",
        "r",
        "--out",
        s(&corpus),
    ]);
    corpus
}

fn train(corpus: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["train", "--corpus", s(corpus), "--out", s(out), "--seed", "11"];
    args.extend_from_slice(extra);
    ok(&args)
}

#[test]
fn ingest_is_reproducible_and_reports_stats() {
    let dir = TempDir::new().unwrap();
    let corpus = diamond(dir.path());
    let first = std::fs::read(&corpus).unwrap();
    let again = dir.path().join("again.json");
    let out = ok(&[
        "ingest",
        "--edges",
        s(&dir.path().join("edges.tsv")),
        "--docs",
        s(&dir.path().join("docs.jsonl")),
        "--root",
        "r",
        "--out",
        s(&again),
    ]);
    assert_eq!(first, std::fs::read(&again).unwrap());
    let stats: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stats["documents"], 5);
    assert_eq!(stats["edges"], 5);
    assert!(dir.path().join("corpus.json.manifest.json").exists());
}

#[test]
fn missing_root_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    diamond(dir.path());
    let out = hdtm(&[
        "ingest",
        "--edges",
        s(&dir.path().join("edges.tsv")),
        "--docs",
        s(&dir.path().join("docs.jsonl")),
        "--out",
        s(&dir.path().join("x.json")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_of_range_gamma_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let corpus = diamond(dir.path());
    let out = hdtm(&[
        "train",
        "--corpus",
        s(&corpus),
        "--out",
        s(&dir.path().join("run")),
        "--gamma",
        "1.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma"));
}

#[test]
fn default_schedule_writes_150_samples() {
    let dir = TempDir::new().unwrap();
    let corpus = diamond(dir.path());
    let run = dir.path().join("run");
    train(&corpus, &run, &["--iters", "5000", "--burnin", "2000", "--lag", "20"]);
    let samples = std::fs::read_dir(run.join("samples")).unwrap().count();
    assert_eq!(samples, 150);
    let csv = std::fs::read_to_string(run.join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5001);
    for f in ["map.json", "map.dot", "manifest.json"] {
        assert!(run.join(f).exists(), "{f}");
    }
}

#[test]
fn one_worker_matches_serial() {
    let dir = TempDir::new().unwrap();
    let corpus = diamond(dir.path());
    let schedule = ["--iters", "200", "--burnin", "100", "--lag", "10"];
    train(&corpus, &dir.path().join("serial"), &schedule);
    let mut with_worker = schedule.to_vec();
    with_worker.extend(["--workers", "1"]);
    train(&corpus, &dir.path().join("one"), &with_worker);
    for f in ["map.json", "map.dot", "diagnostics.csv"] {
        assert_eq!(
            std::fs::read(dir.path().join("serial").join(f)).unwrap(),
            std::fs::read(dir.path().join("one").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn identical_runs_have_identical_digests() {
    let dir = TempDir::new().unwrap();
    let corpus = diamond(dir.path());
    let schedule = ["--iters", "100", "--burnin", "50", "--lag", "10", "--workers", "3"];
    let digests = |name: &str| {
        let run = dir.path().join(name);
        train(&corpus, &run, &schedule);
        let m: serde_json::Value =
            serde_json::from_slice(&std::fs::read(run.join("manifest.json")).unwrap()).unwrap();
        let hashes: Vec<String> = m["outputs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|o| o["sha256"].as_str().unwrap().to_owned())
            .collect();
        (m["config_sha256"].clone(), hashes)
    };
    let (ca, a) = digests("a");
    let (_, b) = digests("b");
    assert_eq!(a, b);
    assert_eq!(a.len(), 5 + 3);
    assert!(ca.is_string());
}

/// Twenty samples of the diamond in which `d` (id 2) sits under `b` (id 1)
/// fifteen times and under `a` (id 0) five times.
fn worked_example_samples(dir: &Path) -> PathBuf {
    let samples = dir.join("samples");
    std::fs::create_dir_all(&samples).unwrap();
    for i in 0..20 {
        let parent_of_d = if i < 15 { 1 } else { 0 };
        let body = serde_json::json!({
            "iteration": i + 1,
            "log_likelihood": -1.0,
            "parent": [4, 4, parent_of_d, 0, null],
            "top_words": {}
        });
        std::fs::write(samples.join(format!("sample-{:06}.json", i + 1)), body.to_string()).unwrap();
    }
    samples
}

#[test]
fn certainty_of_worked_example() {
    let dir = TempDir::new().unwrap();
    let corpus = diamond(dir.path());
    let samples = worked_example_samples(dir.path());
    let out = dir.path().join("cert.json");
    ok(&["eval", "certainty", "--corpus", s(&corpus), "--samples", s(&samples), "--out", s(&out)]);
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let d = report["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .find(|n| n["id"] == "d")
        .unwrap();
    assert_eq!(d["parent_samples"], 15);
    assert!((d["certainty"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    let csv = std::fs::read_to_string(dir.path().join("cert.csv")).unwrap();
    assert!(csv.contains("0.333"));
}

#[test]
fn certainty_without_samples_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let corpus = diamond(dir.path());
    let out = hdtm(&["eval", "certainty", "--corpus", s(&corpus), "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn jaccard_with_empty_reference_warns() {
    let dir = TempDir::new().unwrap();
    let corpus = diamond(dir.path());
    let h = dir.path().join("bfs.json");
    ok(&["eval", "baseline", "--corpus", s(&corpus), "--kind", "bfs", "--out", s(&h)]);
    let reference = dir.path().join("empty.jsonl");
    std::fs::write(&reference, "").unwrap();
    let out = ok(&[
        "eval",
        "jaccard",
        "--corpus",
        s(&corpus),
        "--hierarchy",
        s(&h),
        "--reference",
        s(&reference),
        "--out",
        s(&dir.path().join("j.json")),
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn jaccard_uses_corpus_categories() {
    let dir = TempDir::new().unwrap();
    let corpus = diamond(dir.path());
    let h = dir.path().join("bfs.json");
    ok(&["eval", "baseline", "--corpus", s(&corpus), "--kind", "bfs", "--out", s(&h)]);
    let out = dir.path().join("j.json");
    ok(&["eval", "jaccard", "--corpus", s(&corpus), "--hierarchy", s(&h), "--out", s(&out)]);
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    // e has no categories; a: {top,x} vs {top}; b: {top,y} vs {top}; d: {x} vs {top,x}
    assert_eq!(r["empty"], 1);
    let coef: Vec<f64> = r["nodes"].as_array().unwrap().iter().map(|n| n["coefficient"].as_f64().unwrap()).collect();
    assert_eq!(coef, vec![0.5, 0.5, 0.5]);
}

#[test]
fn bfs_baseline_takes_lowest_id_parent() {
    let dir = TempDir::new().unwrap();
    let corpus = diamond(dir.path());
    let out = dir.path().join("bfs.json");
    ok(&["eval", "baseline", "--corpus", s(&corpus), "--kind", "bfs", "--out", s(&out)]);
    let b: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    // d is reached from a (id 0) and b (id 1)
    assert_eq!(b["parent"][2], 0);
    assert!(dir.path().join("bfs.dot").exists());
}

#[test]
fn precision_similarity_and_intrusion() {
    let dir = TempDir::new().unwrap();
    let judgments = dir.path().join("j.jsonl");
    std::fs::write(
        &judgments,
        concat!(
            r#"{"task_id":1,"presented":["a","b","c"],"intruder":"c","selections":["c","c","a","zz"]}"#, "\n",
            r#"{"task_id":2,"presented":["a","b","c"],"intruder":"a","selections":["a"],"model":"bfs"}"#, "\n",
        ),
    )
    .unwrap();
    let out = dir.path().join("mp.json");
    let o = ok(&["eval", "precision", "--judgments", s(&judgments), "--out", s(&out)]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("dropped"));
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert!((r["tasks"][0]["precision"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(r["tasks"][1]["precision"], 1.0);

    let corpus = diamond(dir.path());
    let h = dir.path().join("bfs.json");
    ok(&["eval", "baseline", "--corpus", s(&corpus), "--kind", "random-parent", "--seed", "4", "--out", s(&h)]);
    let sim = dir.path().join("sim.json");
    ok(&["eval", "similarity", "--corpus", s(&corpus), "--hierarchy", s(&h), "--out", s(&sim)]);
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(&sim).unwrap()).unwrap();
    let v = r["similarity"].as_f64().unwrap();
    assert!(v > 0.0 && v < 1.0);

    let tasks = dir.path().join("tasks.jsonl");
    let o = hdtm(&["eval", "intrusion-gen", "--corpus", s(&corpus), "--hierarchy", s(&h), "--out", s(&tasks)]);
    assert_eq!(o.status.code(), Some(1), "diamond has no grouping of four");
}

#[test]
fn intrusion_tasks_are_seeded() {
    let dir = TempDir::new().unwrap();
    let ids = ["r", "a", "b", "c", "d", "e", "f"];
    let docs: String = ids
        .iter()
        .map(|i| format!("{{\"id\":\"{i}\",\"text\":\"w{i}\"}}\n"))
        .collect();
    std::fs::write(dir.path().join("docs.jsonl"), docs).unwrap();
    std::fs::write(dir.path().join("edges.tsv"), "r\ta\nr\tb\nr\tc\nr\td\nr\te\na\tf\n").unwrap();
    let corpus = dir.path().join("c.json");
    ok(&[
        "ingest",
        "--edges",
        s(&dir.path().join("edges.tsv")),
        "--docs",
        s(&dir.path().join("docs.jsonl")),
        "--root",
        "r",
        "--out",
        s(&corpus),
    ]);
    let h = dir.path().join("h.json");
    ok(&["eval", "baseline", "--corpus", s(&corpus), "--kind", "bfs", "--out", s(&h)]);
    let gen = |name: &str| {
        let p = dir.path().join(name);
        ok(&["eval", "intrusion-gen", "--corpus", s(&corpus), "--hierarchy", s(&h), "--count", "4", "--seed", "9", "--out", s(&p)]);
        std::fs::read_to_string(p).unwrap()
    };
    let a = gen("t1.jsonl");
    assert_eq!(a, gen("t2.jsonl"));
    let first: serde_json::Value = serde_json::from_str(a.lines().next().unwrap()).unwrap();
    assert_eq!(first["members"].as_array().unwrap().len(), 5);
    assert_eq!(first["titles"].as_array().unwrap().len(), 6);
}
