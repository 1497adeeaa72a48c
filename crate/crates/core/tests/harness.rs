use std::path::Path;
use std::process::Command;

use berglab::harness::{ExperimentReport, Table, Verdict};

fn berglab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_berglab")).args(args).env_remove("BERGLAB_OUT_DIR").output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.toml");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn run_bp(dir: &Path, config: &str) -> (i32, serde_json::Value) {
    let cfg = write_config(dir, config);
    let out = dir.join("out");
    let o = berglab(&["bp", "--config", &cfg, "--out", out.to_str().unwrap()]);
    let json = std::fs::read_to_string(out.join("report.json")).unwrap();
    (o.status.code().unwrap(), serde_json::from_str(&json).unwrap())
}

#[test]
fn malformed_config_exits_2_without_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for body in ["p = 2.0\n", "seed = 1\nweight = { type = \"power\" }\n", "seed = [1]\n", "seed = 1\nbogus = 2\n"] {
        let cfg = write_config(dir.path(), body);
        let o = berglab(&["bp", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{body}");
        assert!(!out.exists());
    }
    let o = berglab(&["bp", "--config", "/nonexistent/berglab.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let cfg = write_config(dir.path(), "seed = 1\nweight = { type = \"constant\", value = 1.0 }\n");
    let o = berglab(&["bp", "--config", &cfg, "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bp_of_unit_weight_passes_with_value_one() {
    let dir = tempfile::tempdir().unwrap();
    let (code, json) = run_bp(dir.path(), "seed = 1\nweight = { type = \"constant\", value = 1.0 }\n");
    assert_eq!(code, 0);
    let report: ExperimentReport = serde_json::from_value(json).unwrap();
    let check = report.checks.iter().find(|c| c.name == "[constant(1)]_{B_p}").unwrap();
    assert_eq!(check.value, Some(1.0));
    assert_eq!(check.verdict, Verdict::Pass);
}

#[test]
fn csv_and_json_agree_and_reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = "seed = 11\n";
    let (code, mut first) = run_bp(dir.path(), config);
    assert_eq!(code, 0);
    let report: ExperimentReport = serde_json::from_value(first.clone()).unwrap();
    assert_eq!(report.schema_version, berglab::harness::SCHEMA_VERSION);
    let out = dir.path().join("out");
    let mut tables = report.tables.clone();
    tables.push(report.verdicts_table());
    for t in &tables {
        let csv = std::fs::read_to_string(out.join(format!("{}.csv", t.name))).unwrap();
        assert_eq!(&Table::from_csv(&t.name, &csv).unwrap(), t, "table {}", t.name);
    }
    let (_, mut second) = run_bp(dir.path(), config);
    first.as_object_mut().unwrap().remove("wall_clock");
    second.as_object_mut().unwrap().remove("wall_clock");
    assert_eq!(first, second);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "seed = 1\n");
    let out = dir.path().join("out");
    let o = berglab(&["geometry-check", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "99", "--threads", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["seed"], 99);
    assert_eq!(json["subcommand"], "geometry-check");
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut reference = berglab::harness::ExperimentConfig::load(&dir.join("reference.toml")).unwrap();
    reference.base_dir = ".".into();
    assert_eq!(reference, berglab::harness::ExperimentConfig::reference(7));
    for name in ["unit_weight.toml", "ball_negative_power.toml"] {
        berglab::harness::ExperimentConfig::load(&dir.join(name)).unwrap();
    }
}
