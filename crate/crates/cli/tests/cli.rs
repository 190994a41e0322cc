use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn toy4() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/toy4.json")
}

fn run(args: &[&str], scenario: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_transit-design"))
        .args(args)
        .arg("--scenario")
        .arg(scenario)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn validate_accepts_shipped_scenario() {
    let dir = TempDir::new().unwrap();
    let out = run(&["validate"], &toy4(), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn validate_reports_rule_violations() {
    let dir = TempDir::new().unwrap();
    let mut s = json(&toy4());
    s["routes"][0]["headway_menus"] = serde_json::json!([[7.0, 5.0]]);
    let path = dir.path().join("bad.json");
    std::fs::write(&path, s.to_string()).unwrap();
    let out = run(&["validate"], &path, dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stdout.is_empty());
}

#[test]
fn unparsable_and_missing_scenarios() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{ not json").unwrap();
    assert_eq!(run(&["validate"], &path, dir.path()).status.code(), Some(1));
    let missing = dir.path().join("absent.json");
    assert_eq!(run(&["validate"], &missing, dir.path()).status.code(), Some(2));
}

#[test]
fn solve_writes_artifacts_and_manifest() {
    let dir = TempDir::new().unwrap();
    let out = run(&["solve"], &toy4(), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for file in ["plan.json", "metrics.json", "metrics.csv", "patterns.txt", "model.lp", "model_stats.json"] {
        assert!(dir.path().join(file).exists(), "{file}");
    }
    let manifest = json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["command"], "solve");
    assert_eq!(manifest["status"], "optimal");
    assert_eq!(manifest["scenario_sha256"].as_str().unwrap().len(), 64);
    let metrics = json(&dir.path().join("metrics.json"));
    let objective = manifest["objective"].as_f64().unwrap();
    assert!((metrics["objective"].as_f64().unwrap() - objective).abs() <= 1e-6 * objective);
    assert_eq!(manifest["artifacts"].as_object().unwrap().len(), 6);
    let patterns = std::fs::read_to_string(dir.path().join("patterns.txt")).unwrap();
    assert_eq!(patterns.lines().count(), 2);
}

#[test]
fn evaluate_then_compare_against_the_solution() {
    let dir = TempDir::new().unwrap();
    let solved = dir.path().join("solved");
    assert_eq!(run(&["solve"], &toy4(), &solved).status.code(), Some(0));
    let plan = solved.join("plan.json");

    let evaluated = dir.path().join("evaluated");
    let out = run(&["evaluate", "--plan", plan.to_str().unwrap()], &toy4(), &evaluated);
    assert_eq!(out.status.code(), Some(0));
    let a = json(&solved.join("metrics.json"))["objective"].as_f64().unwrap();
    let b = json(&evaluated.join("metrics.json"))["objective"].as_f64().unwrap();
    assert!((a - b).abs() <= 1e-6 * a);

    let compared = dir.path().join("compared");
    let out = run(&["compare", "--baseline", plan.to_str().unwrap()], &toy4(), &compared);
    assert_eq!(out.status.code(), Some(0));
    let rows = json(&compared.join("comparison.json"));
    let objective = rows["rows"].as_array().unwrap().iter().find(|r| r["metric"] == "objective").unwrap();
    assert!(objective["delta_pct"].as_f64().unwrap().abs() <= 1e-6);
}

#[test]
fn evaluate_rejects_off_menu_plan() {
    let dir = TempDir::new().unwrap();
    let plan = dir.path().join("plan.json");
    std::fs::write(
        &plan,
        r#"{"patterns":[
            {"route":0,"period":0,"pattern":0,"stops":[0,1,2,3,4,5,6,7],"headway":6.0},
            {"route":0,"period":0,"pattern":1,"stops":[],"headway":null}],
          "fleet":[{"route":0,"period":0,"vehicles":0.0}]}"#,
    )
    .unwrap();
    let out = run(&["evaluate", "--plan", plan.to_str().unwrap()], &toy4(), dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn infeasible_fleet_exits_three() {
    let dir = TempDir::new().unwrap();
    let mut s = json(&toy4());
    s["fleet_cap"] = serde_json::json!(0.5);
    let path = dir.path().join("tight.json");
    std::fs::write(&path, s.to_string()).unwrap();
    let out = run(&["solve"], &path, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(3));
    let manifest = json(&dir.path().join("out/manifest.json"));
    assert_eq!(manifest["status"], "infeasible");
}

#[test]
fn oracle_certifies_toy() {
    let dir = TempDir::new().unwrap();
    let out = run(&["oracle"], &toy4(), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("oracle_report.json"));
    assert_eq!(report["verdict"]["kind"], "match");
    assert_eq!(report["enumerated_count"], 275);
}

#[test]
fn export_and_backend_override() {
    let dir = TempDir::new().unwrap();
    let out = run(&["export"], &toy4(), dir.path());
    assert_eq!(out.status.code(), Some(0));
    let lp = std::fs::read_to_string(dir.path().join("model.lp")).unwrap();
    assert!(lp.contains("Minimize") && lp.contains("Binaries"));

    let native = dir.path().join("native");
    let file = dir.path().join("file");
    assert_eq!(run(&["solve"], &toy4(), &native).status.code(), Some(0));
    assert_eq!(run(&["solve", "--backend", "highs-lp"], &toy4(), &file).status.code(), Some(0));
    let a = json(&native.join("manifest.json"))["objective"].as_f64().unwrap();
    let b = json(&file.join("manifest.json"))["objective"].as_f64().unwrap();
    assert!((a - b).abs() <= 1e-6 * a);
    assert_eq!(run(&["solve", "--backend", "glpk"], &toy4(), dir.path()).status.code(), Some(1));
}
