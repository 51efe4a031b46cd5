#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_reldyad"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

pub fn load_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Validator for the JSON Schema keywords used by the shipped schemas:
/// type, enum, const, required, properties, additionalProperties, items,
/// prefixItems, minItems, maxItems, minimum, maximum, exclusiveMinimum,
/// oneOf and `$ref` (local `#/$defs/...` or a sibling schema file).
pub struct Validator {
    dir: PathBuf,
}

impl Validator {
    pub fn new(dir: PathBuf) -> Self {
        Validator { dir }
    }

    pub fn validate_file(&self, schema_file: &str, doc: &Value) -> Vec<String> {
        let root = load_json(&self.dir.join(schema_file));
        let mut errors = Vec::new();
        self.check(&root, &root, doc, "$", &mut errors);
        errors
    }

    fn check(&self, root: &Value, schema: &Value, v: &Value, at: &str, errs: &mut Vec<String>) {
        let s = schema.as_object().expect("schema object");
        if let Some(r) = s.get("$ref").and_then(Value::as_str) {
            if let Some(ptr) = r.strip_prefix('#') {
                let target = root.pointer(ptr).unwrap_or_else(|| panic!("bad ref {r}"));
                self.check(root, target, v, at, errs);
            } else {
                let other = load_json(&self.dir.join(r));
                self.check(&other, &other, v, at, errs);
            }
        }
        if let Some(t) = s.get("type") {
            let types: Vec<&str> = match t {
                Value::String(x) => vec![x.as_str()],
                Value::Array(xs) => xs.iter().filter_map(Value::as_str).collect(),
                _ => panic!("bad type"),
            };
            if !types.iter().any(|t| type_matches(t, v)) {
                errs.push(format!("{at}: expected {types:?}, got {v}"));
                return;
            }
        }
        if let Some(e) = s.get("enum").and_then(Value::as_array) {
            if !e.contains(v) {
                errs.push(format!("{at}: {v} not in {e:?}"));
            }
        }
        if let Some(c) = s.get("const") {
            if c != v {
                errs.push(format!("{at}: {v} != {c}"));
            }
        }
        if let Some(x) = v.as_f64() {
            if let Some(m) = s.get("minimum").and_then(Value::as_f64) {
                if x < m {
                    errs.push(format!("{at}: {x} < {m}"));
                }
            }
            if let Some(m) = s.get("maximum").and_then(Value::as_f64) {
                if x > m {
                    errs.push(format!("{at}: {x} > {m}"));
                }
            }
            if let Some(m) = s.get("exclusiveMinimum").and_then(Value::as_f64) {
                if x <= m {
                    errs.push(format!("{at}: {x} <= {m}"));
                }
            }
        }
        if let Some(alts) = s.get("oneOf").and_then(Value::as_array) {
            let ok = alts
                .iter()
                .filter(|a| {
                    let mut e = Vec::new();
                    self.check(root, a, v, at, &mut e);
                    e.is_empty()
                })
                .count();
            if ok != 1 {
                errs.push(format!("{at}: matches {ok} oneOf branches"));
            }
        }
        if let Value::Object(obj) = v {
            if let Some(req) = s.get("required").and_then(Value::as_array) {
                for k in req.iter().filter_map(Value::as_str) {
                    if !obj.contains_key(k) {
                        errs.push(format!("{at}: missing `{k}`"));
                    }
                }
            }
            let props = s.get("properties").and_then(Value::as_object);
            for (k, val) in obj {
                let path = format!("{at}.{k}");
                match props.and_then(|p| p.get(k)) {
                    Some(sub) => self.check(root, sub, val, &path, errs),
                    None => match s.get("additionalProperties") {
                        Some(Value::Bool(false)) => errs.push(format!("{path}: unexpected")),
                        Some(sub @ Value::Object(_)) => self.check(root, sub, val, &path, errs),
                        _ => {}
                    },
                }
            }
        }
        if let Value::Array(items) = v {
            if let Some(n) = s.get("minItems").and_then(Value::as_u64) {
                if (items.len() as u64) < n {
                    errs.push(format!("{at}: fewer than {n} items"));
                }
            }
            if let Some(n) = s.get("maxItems").and_then(Value::as_u64) {
                if items.len() as u64 > n {
                    errs.push(format!("{at}: more than {n} items"));
                }
            }
            let prefix = s.get("prefixItems").and_then(Value::as_array);
            for (i, item) in items.iter().enumerate() {
                let path = format!("{at}[{i}]");
                match prefix.and_then(|p| p.get(i)) {
                    Some(sub) => self.check(root, sub, item, &path, errs),
                    None => {
                        if let Some(sub) = s.get("items") {
                            self.check(root, sub, item, &path, errs);
                        }
                    }
                }
            }
        }
    }
}

fn type_matches(t: &str, v: &Value) -> bool {
    match t {
        "null" => v.is_null(),
        "boolean" => v.is_boolean(),
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "number" => v.is_number(),
        "integer" => v.is_u64() || v.is_i64() || v.as_f64().is_some_and(|x| x.fract() == 0.0),
        _ => panic!("unknown type {t}"),
    }
}

/// Writes a small labelled DG1 stream plus actors via `reldyad simulate`.
pub fn simulate_small(dir: &Path, seed: u64, n_actors: usize, true_events: usize) {
    let gen = serde_json::json!({
        "generator": {
            "n_actors": n_actors,
            "true_intensity": {
                "spec": {"statistics": [
                    {"kind": "degree_abs"}, {"kind": "triangle"}, {"kind": "repetition_count"},
                    {"kind": "sum_cont", "covariate": "cont"}, {"kind": "match_cat", "covariate": "cat"}
                ]},
                "coefficients": [-5.0, 0.2, 0.1, -0.5, 2.0, -2.0]
            },
            "spurious_intensity": {"spec": {"statistics": []}, "coefficients": [-2.5]},
            "stop": {"true_events": true_events}
        }
    });
    let cfg = dir.join("gen.json");
    std::fs::write(&cfg, gen.to_string()).unwrap();
    let out = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        &seed.to_string(),
        "--out",
        dir.join("sim").to_str().unwrap(),
        "--quiet",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

/// Fit config over the files written by [`simulate_small`].
pub fn fit_config(spurious: bool, spline: bool, burn_in: usize, draws: usize) -> Value {
    let mut cfg = serde_json::json!({
        "command": "fit",
        "io": {
            "events": "sim/events.csv",
            "covariates": {"path": "sim/actors.csv", "kinds": {"cat": "categorical"}}
        },
        "true_model": {"statistics": [
            {"kind": "degree_abs"}, {"kind": "triangle"}, {"kind": "repetition_count"},
            {"kind": "sum_cont", "covariate": "cont"}, {"kind": "match_cat", "covariate": "cat"}
        ]},
        "chain": {"burn_in": burn_in, "draws": draws}
    });
    if spurious {
        cfg["spurious_model"] = serde_json::json!({"statistics": []});
    }
    cfg["spline"] = if spline { serde_json::json!({"K": 6}) } else { Value::Null };
    cfg
}
