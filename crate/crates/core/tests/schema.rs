use std::path::Path;

use ktmap::pipeline::{run_pipeline, PipelineConfig};
use serde_json::Value;

fn validator() -> jsonschema::Validator {
    let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/ktreport.schema.json")).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn toy_report(out: &Path, edit: impl FnOnce(&mut PipelineConfig)) -> Value {
    let base = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/toy");
    let mut cfg = PipelineConfig::from_file(&base.join("config.toml")).unwrap();
    cfg.out_dir = out.to_path_buf();
    edit(&mut cfg);
    run_pipeline(&cfg).unwrap();
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn assert_valid(v: &jsonschema::Validator, report: &Value) {
    let errors: Vec<String> = v.iter_errors(report).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{errors:#?}");
}

#[test]
fn toy_report_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    let report = toy_report(dir.path(), |c| c.bootstrap = 10);
    assert!(report["power_law"]["p_value"].is_number());
    assert_valid(&validator(), &report);
}

#[test]
fn cocitation_report_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    let report = toy_report(dir.path(), |c| c.mode = "cocitation".parse().unwrap());
    assert_eq!(report["fronts"]["mode"], "cocitation");
    assert_valid(&validator(), &report);
}

#[test]
fn report_with_missing_diagnostics_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    let mut report = toy_report(dir.path(), |_| {});
    report["power_law"] = Value::Null;
    report["scaling"] = Value::Null;
    report["assortativity"] = Value::Null;
    assert_valid(&validator(), &report);
}

#[test]
fn schema_rejects_broken_reports() {
    let dir = tempfile::tempdir().unwrap();
    let good = toy_report(dir.path(), |_| {});
    let v = validator();
    let mut r = good.clone();
    r.as_object_mut().unwrap().remove("fronts");
    assert!(!v.is_valid(&r));
    let mut r = good.clone();
    r["hubs"][0]["participation"] = 1.5.into();
    assert!(!v.is_valid(&r));
    let mut r = good.clone();
    r["fronts"]["fronts"][0]["path"] = "0.1".into();
    assert!(!v.is_valid(&r));
    let mut r = good;
    r["extra"] = 1.into();
    assert!(!v.is_valid(&r));
}
