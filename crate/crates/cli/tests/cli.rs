mod common;

use std::fs;

use common::{fit_config, load_json, run, schema_dir, simulate_small, Validator};
use serde_json::Value;

fn write_config(dir: &std::path::Path, name: &str, cfg: &Value) -> String {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn remse_fit_writes_valid_outputs() {
    let dir = tempfile::tempdir().unwrap();
    simulate_small(dir.path(), 4, 10, 120);
    let cfg = write_config(dir.path(), "run.json", &fit_config(true, true, 4, 4));
    let out = dir.path().join("out");
    let res = run(&["fit", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("REMSE") && stdout.contains("PFE"));

    let report = load_json(&out.join("report.json"));
    let errors = Validator::new(schema_dir()).validate_file("report.schema.json", &report);
    assert!(errors.is_empty(), "{errors:#?}");
    assert_eq!(report["model"], "REMSE");
    assert_eq!(report["draws_used"], 4);
    assert_eq!(report["config"]["chain"]["seed"], report["seed"]);

    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    // header plus the initial split and eight iterations
    assert_eq!(trace.lines().count(), 1 + 9);
    assert!(trace.lines().next().unwrap().ends_with("spurious:(Intercept)"));
    let baseline = fs::read_to_string(out.join("baseline.csv")).unwrap();
    assert_eq!(baseline.lines().next().unwrap(), "t,estimate,lower,upper");
    assert_eq!(baseline.lines().count(), 1 + 201);
}

#[test]
fn rem_reports_zero_pfe() {
    let dir = tempfile::tempdir().unwrap();
    simulate_small(dir.path(), 5, 10, 120);
    let cfg = write_config(dir.path(), "rem.json", &fit_config(false, false, 2, 2));
    let out = dir.path().join("out");
    let res = run(&["fit", "--config", &cfg, "--out", out.to_str().unwrap(), "--quiet"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(res.stdout.is_empty());
    let report = load_json(&out.join("report.json"));
    assert_eq!(report["model"], "REM");
    assert_eq!(report["pfe_estimate"].as_f64(), Some(0.0));
    let errors = Validator::new(schema_dir()).validate_file("report.schema.json", &report);
    assert!(errors.is_empty(), "{errors:#?}");
}

#[test]
fn missing_covariate_file_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    simulate_small(dir.path(), 6, 8, 40);
    let mut cfg = fit_config(false, false, 2, 2);
    cfg["io"]["covariates"]["path"] = "sim/absent.csv".into();
    let cfg = write_config(dir.path(), "run.json", &cfg);
    let res = run(&["fit", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("absent.csv"));
}

#[test]
fn malformed_configs_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"chian": {}}"#,
        r#"{"chain": {"burn_in": -1}}"#,
        r#"{"true_model": {"statistics": [{"kind": "cycle"}]}}"#,
        r#"{"true_model": {"statistics": [{"kind": "sum_cont"}]}, "io": {"events": "x.csv"}}"#,
        "not json",
    ];
    for (i, text) in cases.iter().enumerate() {
        let p = dir.path().join(format!("c{i}.json"));
        fs::write(&p, text).unwrap();
        let res = run(&["fit", "--config", p.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
        assert_eq!(res.status.code(), Some(2), "case {i}: {}", String::from_utf8_lossy(&res.stderr));
    }
}

#[test]
fn unidentifiable_design_is_a_numerical_failure() {
    // two events on disjoint dyads never close a triangle
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("ev.csv"), "time,actor_a,actor_b\n1,a,b\n2,c,d\n3,a,b\n").unwrap();
    let cfg = serde_json::json!({
        "io": {"events": "ev.csv"},
        "true_model": {"statistics": [{"kind": "triangle"}]},
        "spline": null
    });
    let cfg = write_config(dir.path(), "run.json", &cfg);
    let res = run(&["fit", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(String::from_utf8_lossy(&res.stderr).contains("triangle"));
}

#[test]
fn embedded_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    simulate_small(dir.path(), 8, 10, 100);
    let cfg = write_config(dir.path(), "run.json", &fit_config(true, false, 3, 3));
    let first = dir.path().join("a");
    let res = run(&["fit", "--config", &cfg, "--seed", "41", "--out", first.to_str().unwrap(), "--quiet"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let report = load_json(&first.join("report.json"));
    assert_eq!(report["seed"], 41);

    // re-run from the embedded config, from another directory, without --seed
    let nested = dir.path().join("elsewhere");
    fs::create_dir(&nested).unwrap();
    let embedded = write_config(&nested, "embedded.json", &report["config"]);
    let second = dir.path().join("b");
    let res = run(&["fit", "--config", &embedded, "--out", second.to_str().unwrap(), "--quiet"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    for f in ["report.json", "trace.csv", "baseline.csv"] {
        assert_eq!(fs::read(first.join(f)).unwrap(), fs::read(second.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn simulate_writes_labels_and_meta() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let res = run(&["simulate", "--dg", "2", "--seed", "3", "--out", out.to_str().unwrap(), "--quiet"]);
    assert!(res.status.success());
    let events = fs::read_to_string(out.join("events.csv")).unwrap();
    assert_eq!(events.lines().next().unwrap(), "time,actor_a,actor_b,label");
    assert_eq!(events.lines().count(), 1 + 300);
    assert!(events.lines().skip(1).all(|l| l.ends_with(",1")));
    let meta = load_json(&out.join("meta.json"));
    assert_eq!(meta["realized_pfe"].as_f64(), Some(0.0));
    assert_eq!(meta["seed"], 3);
    let actors = fs::read_to_string(out.join("actors.csv")).unwrap();
    assert_eq!(actors.lines().next().unwrap(), "actor,cont,cat");
    assert_eq!(actors.lines().count(), 21);
}

#[test]
fn study_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = serde_json::json!({"chain": {"burn_in": 3, "draws": 3}});
    let cfg = write_config(dir.path(), "study.json", &cfg);
    let out = dir.path().join("t");
    let res = run(&[
        "study", "--config", &cfg, "--dg", "1", "--reps", "2", "--seed", "5", "--out", out.to_str().unwrap(), "--quiet",
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = fs::read_to_string(out.join("table1.csv")).unwrap();
    assert!(csv.lines().count() >= 7);
    assert!(fs::read_to_string(out.join("table1.md")).unwrap().contains("REMSE"));
}

#[test]
fn config_schema_accepts_examples_and_rejects_typos() {
    let v = Validator::new(schema_dir());
    let good = [fit_config(true, true, 30, 30), fit_config(false, false, 1, 2), serde_json::json!({})];
    for g in &good {
        let errors = v.validate_file("config.schema.json", g);
        assert!(errors.is_empty(), "{errors:#?}");
    }
    let bad = serde_json::json!({"chain": {"burnin": 3}});
    assert!(!v.validate_file("config.schema.json", &bad).is_empty());
}
