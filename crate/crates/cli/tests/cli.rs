use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn toy(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/toy").join(file)
}

fn ktmap(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ktmap"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("KTMAP_LOG", "error")
        .output()
        .unwrap()
}

fn ok(args: &[&str], out: &Path) -> String {
    let o = ktmap(args, out);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn stages_run_one_at_a_time() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let (nodes, edges) = (toy("nodes.jsonl"), toy("edges.csv"));
    let (basic, clinical) = (toy("basic.txt"), toy("clinical.txt"));
    assert_eq!(ok(&["parse", "--nodes", s(&nodes), "--edges", s(&edges)], out).trim(), "40 documents, 207 citations");
    assert!(ok(&["select", "--fraction", "1"], out).contains("selected 40 of 40"));
    assert!(ok(&["fit-degrees", "--bootstrap", "5"], out).contains(", p "));
    assert!(ok(&["score", "--lexicon-basic", s(&basic), "--lexicon-clinical", s(&clinical)], out).contains("40 of 40"));
    assert!(ok(&["fronts"], out).starts_with("2 fronts at level 2"));
    ok(&["metrics"], out);
    let hubs = ok(&["hubs"], out);
    assert!(hubs.starts_with("1 hub candidates"), "{hubs}");
    assert!(hubs.contains("bridge"));
    assert!(ok(&["mainpath"], out).contains(" -> "));
    ok(&["export", "--format", "graphml"], out);
    ok(&["export", "--format", "dot"], out);
    for f in [
        "network.nodes.jsonl", "core.edges.csv", "parse.json", "selection.json", "fit.json", "scores.csv", "fronts.csv",
        "fronts.json", "metrics.csv", "hubs.json", "hub_regions.json", "mainpath.json", "core.graphml", "core.dot",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let graphml = std::fs::read(out.join("core.graphml")).unwrap();
    let g = ktmap::export::read_graphml(graphml.as_slice()).unwrap();
    assert_eq!(g.nodes.len(), 40);
    assert_eq!(g.edges.len(), 207);
    let hub_nodes: Vec<&str> =
        g.nodes.iter().zip(&g.data).filter(|(_, d)| d["hub"] == "true").map(|(n, _)| n.as_str()).collect();
    assert_eq!(hub_nodes, ["bridge"]);
}

#[test]
fn report_from_config_matches_library_run() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(&["report", "--config", s(&toy("config.toml")), "--print"], dir.path());
    assert!(text.contains("fronts (citation mode): 2 at level 2"));
    let cli: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    let mut cfg = ktmap::pipeline::PipelineConfig::from_file(&toy("config.toml")).unwrap();
    let lib_dir = tempfile::tempdir().unwrap();
    cfg.out_dir = lib_dir.path().to_path_buf();
    let lib = ktmap::pipeline::run_pipeline(&cfg).unwrap();
    let mut lib: serde_json::Value = serde_json::from_str(&lib.without_timestamp().to_json()).unwrap();
    lib["config"]["out_dir"] = cli["config"]["out_dir"].clone();
    let mut cli = cli;
    cli["generated_at"] = lib["generated_at"].clone();
    assert_eq!(cli, lib);
}

#[test]
fn simulate_presets_write_a_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert!(ok(&["simulate", "--preset", "planted", "--seed", "2", "--hubs", "3"], out).starts_with("203 documents"));
    let truth: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("ground_truth.json")).unwrap()).unwrap();
    assert_eq!(truth["hubs"].as_array().unwrap().len(), 3);
    assert!(ok(&["simulate", "--preset", "hierarchical", "--iterations", "2"], out).starts_with("25 documents"));
    assert!(ok(&["simulate", "--preset", "random", "--nodes", "50", "--p", "0.1"], out).starts_with("50 documents"));
    ok(&["report", "--nodes", s(&out.join("nodes.jsonl")), "--edges", s(&out.join("edges.csv")), "--fraction", "1"], out);
    assert!(out.join("report.json").exists());
}

#[test]
fn simulate_is_seeded() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    ok(&["simulate", "--preset", "planted", "--seed", "9"], d1.path());
    ok(&["simulate", "--preset", "planted", "--seed", "9", "--threads", "2"], d2.path());
    for f in ["nodes.jsonl", "edges.csv"] {
        assert_eq!(std::fs::read(d1.path().join(f)).unwrap(), std::fs::read(d2.path().join(f)).unwrap());
    }
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["bogus"][..],
        &["simulate"],
        &["simulate", "--preset", "nope"],
        &["select", "--fraction", "abc"],
        &["report", "--config", "/nonexistent/ktmap.toml"],
        &["report", "--nodes", "/nonexistent", "--edges", "/nonexistent"],
        &["simulate", "--preset", "random", "--threads", "0"],
    ] {
        assert_eq!(ktmap(args, dir.path()).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn unknown_export_format_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["report", "--config", s(&toy("config.toml"))], dir.path());
    let o = ktmap(&["export", "--format", "svg"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("supported: graphml, dot"));
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    let o = ktmap(&["parse", "--nodes", s(&empty), "--edges", s(&toy("edges.csv"))], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let run = dir.path().join("run");
    let o = ktmap(&["report", "--nodes", s(&empty), "--edges", s(&toy("edges.csv"))], &run);
    assert_eq!(o.status.code(), Some(2));
    let marker: serde_json::Value = serde_json::from_slice(&std::fs::read(run.join("incomplete.json")).unwrap()).unwrap();
    assert_eq!(marker["failed_stage"], "parse");
    assert!(!run.join("report.json").exists());
    // a later stage without its inputs
    let o = ktmap(&["hubs"], &dir.path().join("nothing"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    let o = ktmap(&["--help"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    for cmd in ["parse", "select", "fit-degrees", "score", "fronts", "metrics", "hubs", "mainpath", "simulate", "report", "export"] {
        assert!(text.contains(cmd), "{cmd}");
    }
}
