use std::path::{Path, PathBuf};

use ktmap::artifacts;
use ktmap::pipeline::{run_pipeline, run_pipeline_full, IncompleteMarker, PipelineConfig, Stage};

fn toy_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/toy")
}

fn toy_config(out: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::from_file(&toy_dir().join("config.toml")).unwrap();
    cfg.out_dir = out.to_path_buf();
    cfg
}

#[test]
fn toy_corpus_has_two_fronts_and_one_bridge_hub() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_pipeline_full(&toy_config(dir.path())).unwrap();
    let r = &out.report;
    assert!(r.complete);
    assert_eq!(r.corpus.documents, 40);
    assert_eq!(r.fronts.level2_count, 2);
    assert!(r.fronts.mean_t_spread.unwrap() >= 0.6, "{:?}", r.fronts.mean_t_spread);
    let hubs: Vec<&str> = r.hubs.iter().map(|h| h.id.as_str()).collect();
    assert_eq!(hubs, ["bridge"]);
    let top = out.tree.labels_at(2);
    let a = out.core.index_of("a01").unwrap();
    let b = out.core.index_of("b01").unwrap();
    assert_ne!(top[a], top[b]);
    for v in 0..out.core.len() {
        let id = out.core.id(v);
        if id.starts_with('a') {
            assert_eq!(top[v], top[a], "{id}");
        } else if id.starts_with('b') {
            assert_eq!(top[v], top[b], "{id}");
        }
    }
    for f in [artifacts::REPORT, artifacts::REPORT_TEXT, artifacts::SCORES, artifacts::FRONTS_TABLE, artifacts::HUBS] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert!(!dir.path().join(artifacts::INCOMPLETE).exists());
}

#[test]
fn raw_terms_are_scored_with_the_lexicon() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_pipeline_full(&toy_config(dir.path())).unwrap();
    let a = out.core.index_of("a01").unwrap();
    let b = out.core.index_of("b01").unwrap();
    assert_eq!(out.profiles[a].score, Some(0.0));
    assert_eq!(out.profiles[b].score, Some(1.0));
}

#[test]
fn reruns_are_identical_apart_from_timestamp() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let r1 = run_pipeline(&toy_config(d1.path())).unwrap();
    let r2 = run_pipeline(&toy_config(d2.path())).unwrap();
    let mut c2 = r2.without_timestamp();
    c2.config.out_dir = r1.config.out_dir.clone();
    let mut c1 = r1.without_timestamp();
    c1.config.out_dir = r1.config.out_dir.clone();
    assert_eq!(c1.to_json(), c2.to_json());
    for f in [artifacts::SCORES, artifacts::FRONTS_TABLE, artifacts::METRICS, artifacts::HUBS, artifacts::MAIN_PATH] {
        assert_eq!(std::fs::read(d1.path().join(f)).unwrap(), std::fs::read(d2.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn empty_nodes_file_fails_at_parse_and_leaves_marker() {
    let dir = tempfile::tempdir().unwrap();
    let nodes = dir.path().join("empty.jsonl");
    std::fs::write(&nodes, "").unwrap();
    let out = dir.path().join("out");
    let mut cfg = toy_config(&out);
    cfg.nodes = nodes;
    let err = run_pipeline(&cfg).unwrap_err();
    assert_eq!(err.stage, Stage::Parse);
    let marker: IncompleteMarker = artifacts::read_json(&out.join(artifacts::INCOMPLETE)).unwrap();
    assert!(!marker.complete);
    assert_eq!(marker.failed_stage, Stage::Parse);
    assert_eq!(marker.completed_stages, [Stage::Config]);
    assert!(!out.join(artifacts::REPORT).exists());
}

#[test]
fn failed_rerun_removes_stale_report() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(&toy_config(dir.path())).unwrap();
    assert!(dir.path().join(artifacts::REPORT).exists());
    let mut cfg = toy_config(dir.path());
    cfg.edges = dir.path().join("bad.csv");
    std::fs::write(&cfg.edges, "citing,cited\na01,nowhere\n").unwrap();
    assert_eq!(run_pipeline(&cfg).unwrap_err().stage, Stage::Parse);
    assert!(!dir.path().join(artifacts::REPORT).exists());
    assert!(dir.path().join(artifacts::INCOMPLETE).exists());
}

#[test]
fn missing_input_fails_at_config_stage() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = toy_config(dir.path());
    cfg.edges = dir.path().join("missing.csv");
    assert_eq!(run_pipeline(&cfg).unwrap_err().stage, Stage::Config);
}

#[test]
fn invalid_config_fails_at_config_stage() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = toy_config(dir.path());
    cfg.fraction = 0.0;
    assert_eq!(run_pipeline(&cfg).unwrap_err().stage, Stage::Config);
}
