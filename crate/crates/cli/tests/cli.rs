use std::process::Command;

use serde_json::Value;

fn typlab(args: &[&str]) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_typlab")).args(args).output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let report = if stdout.trim().is_empty() { Value::Null } else { serde_json::from_str(&stdout).unwrap() };
    (out.status.code().unwrap(), report, String::from_utf8(out.stderr).unwrap())
}

fn schema() -> Value {
    serde_json::from_str(include_str!("../schema/report.schema.json")).unwrap()
}

fn type_ok(ty: &str, v: &Value) -> bool {
    match ty {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "number" => v.is_number(),
        "integer" => v.is_u64() || v.is_i64(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        _ => panic!("unsupported type {ty}"),
    }
}

/// The subset of JSON Schema the report schema uses.
fn validate(schema: &Value, v: &Value, path: &str) -> Result<(), String> {
    if let Some(ty) = schema.get("type").and_then(Value::as_str) {
        if !type_ok(ty, v) {
            return Err(format!("{path}: expected {ty}"));
        }
    }
    if let Some(options) = schema.get("enum").and_then(Value::as_array) {
        if !options.contains(v) {
            return Err(format!("{path}: {v} not in enum"));
        }
    }
    if let Some(required) = schema.get("required").and_then(Value::as_array) {
        for key in required {
            let key = key.as_str().unwrap();
            if v.get(key).is_none() {
                return Err(format!("{path}: missing {key}"));
            }
        }
    }
    if let (Some(props), Some(obj)) = (schema.get("properties").and_then(Value::as_object), v.as_object()) {
        for (key, value) in obj {
            match props.get(key) {
                Some(sub) => validate(sub, value, &format!("{path}.{key}"))?,
                None if schema.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    return Err(format!("{path}: unexpected {key}"))
                }
                None => {}
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), v.as_array()) {
        for (i, item) in arr.iter().enumerate() {
            validate(items, item, &format!("{path}[{i}]"))?;
        }
    }
    Ok(())
}

fn comparable(mut v: Value) -> String {
    v.as_object_mut().unwrap().remove("timing");
    serde_json::to_string(&v).unwrap()
}

const RUNS: &[&[&str]] = &[
    &["eval", "-s", "corpus:p3", "-f", "exists y E(x,y)", "-a", "x=1"],
    &["extension", "-s", "corpus:c4", "-f", "E(x,y)", "-a", "y=0"],
    &["orbits", "-s", "corpus:c4", "--params", "0"],
    &["typical", "--structure", "p3.struct"],
    &["witness", "-s", "corpus:p3", "--element", "1"],
    &["axioms", "-s", "corpus:p3"],
    &["axioms", "-s", "corpus:k22", "--axiom", "T2,T3", "--arity", "2"],
    &["search", "--family", "graph@1..4"],
    &["search", "--axiom", "T4", "--family", "empty@2..3"],
    &["filter-closure", "-s", "corpus:six"],
    &["dlo", "--params", "a1<a2", "--typical-elements"],
    &["dlo", "--params", "a1<a2", "-f", "exists y (a1 < y & y < x)", "--enumerate", "--budget", "5"],
    &["cantor", "join", "{0,2}", "{1}"],
    &["cantor", "split", "pre=10011,per=0"],
    &["cantor", "code", "{1};{0}"],
    &["cantor", "project", "{1,2}", "0"],
    &["cantor", "approx", "{0,5}", "{}"],
    &["cantor", "closure", "{}", "--bound", "2"],
    &["cantor", "measure", "00", "01", "1"],
    &["cantor", "member", "pre=0,per=10", "00", "10"],
    &["schnorr", "--level", "3", "--measure", "--words", "--capture", "pre=1,per=01"],
];

#[test]
fn every_report_matches_schema() {
    let schema = schema();
    for args in RUNS {
        let (code, report, err) = typlab(args);
        assert!(code == 0 || code == 1, "{args:?}: {err}");
        validate(&schema, &report, "$").unwrap_or_else(|e| panic!("{args:?}: {e}"));
    }
}

#[test]
fn reports_are_deterministic() {
    for args in RUNS {
        let (_, a, _) = typlab(args);
        let (_, b, _) = typlab(args);
        let mut threaded = vec!["--threads", "3"];
        threaded.extend_from_slice(args);
        let (_, c, _) = typlab(&threaded);
        assert_eq!(comparable(a.clone()), comparable(b), "{args:?}");
        assert_eq!(comparable(a), comparable(c), "{args:?}");
    }
}

#[test]
fn documented_examples() {
    let (_, r, _) = typlab(&["typical", "--structure", "p3.struct"]);
    assert_eq!(r["results"]["typical_set"], serde_json::json!([0, 2]));
    assert_eq!(r["certificates"]["elements"][1]["certificate"]["orbit"], serde_json::json!([1]));

    let (_, r, _) = typlab(&["schnorr", "--level", "3", "--measure"]);
    assert_eq!(r["results"]["measure"], "1/16");
    assert_eq!(r["results"]["measure_power"], "1/2^4");

    let (_, r, _) = typlab(&["dlo", "--params", "a1<a2", "--typical-elements"]);
    assert_eq!(r["results"]["typical_elements"]["rendered"], "(-inf, a1) u (a1, a2) u (a2, +inf)");

    let (_, r, _) = typlab(&["cantor", "join", "{0,2}", "{1}"]);
    assert_eq!(r["results"]["finite_set"], serde_json::json!([0, 3, 4]));
}

#[test]
fn exit_codes() {
    assert_eq!(typlab(&["axioms", "-s", "corpus:k22", "--axiom", "T2"]).0, 0);
    let (code, r, _) = typlab(&["axioms", "-s", "corpus:chain3", "--axiom", "T1"]);
    assert_eq!(code, 1);
    assert_eq!(r["violations"][0]["violation"]["kind"], "no_typical");
    assert_eq!(typlab(&["search", "--axiom", "T4", "--family", "empty@2..2"]).0, 1);
    assert_eq!(typlab(&["search", "--family", "graph@1..3"]).0, 0);

    let (code, _, err) = typlab(&["eval", "-s", "corpus:p3", "-f", "E(x"]);
    assert_eq!(code, 2);
    assert!(err.contains("at byte 3"), "{err}");
    assert_eq!(typlab(&["nonsense"]).0, 2);
    assert_eq!(typlab(&["typical", "-s", "corpus:missing"]).0, 2);
    assert_eq!(typlab(&["typical", "-s", "/nonexistent/x.struct"]).0, 2);
    assert_eq!(typlab(&["orbits", "-s", "corpus:p3", "--params", "7"]).0, 2);
    assert_eq!(typlab(&["search", "--family", "graph@1..99"]).0, 2);
    assert_eq!(typlab(&["dlo", "--params", "a1<a1"]).0, 2);
    assert_eq!(typlab(&["cantor", "closure", "{}", "--bound", "40"]).0, 2);
    assert_eq!(typlab(&["schnorr", "--level", "99"]).0, 2);
}

#[test]
fn structure_files_load() {
    let dir = std::env::temp_dir().join(format!("typlab-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("tri.struct");
    std::fs::write(&path, "universe 3\nrelation E 2: (0,1) (1,0) (1,2) (2,1) (0,2) (2,0)\n").unwrap();
    let (code, r, err) = typlab(&["typical", "-s", path.to_str().unwrap(), "--params", "0"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(r["results"]["typical_set"], serde_json::json!([1, 2]));
    std::fs::remove_dir_all(&dir).unwrap();
}
