use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cnc"));
    c.env_remove("CNC_THREADS");
    c
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn schema(name: &str) -> Value {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn assert_valid(schema_name: &str, v: &Value) {
    let s = schema(schema_name);
    let validator = jsonschema::validator_for(&s).unwrap();
    let errors: Vec<String> = validator
        .iter_errors(v)
        .map(|e| format!("{}: {e}", e.instance_path()))
        .collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:?}");
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Vec<u8> {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn json_of(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap_or_else(|_| panic!("{}", String::from_utf8_lossy(&out.stderr)))
}

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Scratch {
        let dir = std::env::temp_dir().join(format!("cnc-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn write(&self, name: &str, v: &Value) -> String {
        let p = self.0.join(name);
        std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
        p.display().to_string()
    }

    fn path(&self, name: &str) -> String {
        self.0.join(name).display().to_string()
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn circuit() -> String {
    fixture("feedforward.circuit.json").display().to_string()
}

fn cone() -> String {
    fixture("cone-mixture.ensemble.json").display().to_string()
}

/// `{form: cone, generators: [[1,1],[1,2]], gamma: 2, 2}`, a nonlinear qutrit point.
fn qutrit_cone() -> Value {
    json!({"d": 3, "n": 1, "form": "cone", "I": [], "generators": [[1, 1], [1, 2]], "gamma": {"0": 2, "1": 2}})
}

#[test]
fn simulate_is_deterministic_and_schema_valid() {
    let args = ["simulate", "--circuit", &circuit(), "--input", &cone(), "--shots", "2000", "--seed", "17"];
    let a = ok(&args);
    let b = ok(&args);
    assert_eq!(a, b);
    let single = bin().args(args).env("CNC_THREADS", "1").output().unwrap();
    assert!(single.status.success());
    assert_eq!(a, single.stdout, "output depends on the thread count");

    let other = ok(&["simulate", "--circuit", &circuit(), "--input", &cone(), "--shots", "2000", "--seed", "18"]);
    assert_ne!(a, other);

    let text = String::from_utf8(a).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2001);
    for (i, l) in lines[..2000].iter().enumerate() {
        assert_valid("shot", l);
        assert_eq!(l["shot"], json!(i));
        assert_eq!(l["outcomes"].as_array().unwrap().len(), 3);
    }
    let summary = &lines[2000];
    assert_valid("simulate-summary", summary);
    assert_eq!(summary["summary"]["variables"], json!(["m1", "m2", "m3"]));
    let total: f64 = summary["summary"]["distribution"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["probability"].as_f64().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn simulate_verifies_against_the_oracle() {
    let dir = Scratch::new("verify-sim");
    let summary = dir.path("summary.json");
    for (input, algorithm) in [(cone(), "cnc"), (fixture("wigner-mixture.ensemble.json").display().to_string(), "wigner")] {
        let out = ok(&[
            "simulate", "--circuit", &circuit(), "--input", &input, "--shots", "100000", "--seed", "5",
            "--algorithm", algorithm, "--verify", "--summary", &summary,
        ]);
        // with --summary the stream holds shots only
        assert_eq!(String::from_utf8(out).unwrap().lines().count(), 100_000);
        let s = json_of(&std::fs::read(&summary).unwrap());
        assert_valid("simulate-summary", &s);
        assert_eq!(s["summary"]["verified"], json!(true));
        assert!(s["summary"]["oracle_tv"].as_f64().unwrap() <= 0.02);
    }
    // too few shots for a tight threshold
    let out = run(&[
        "simulate", "--circuit", &circuit(), "--input", &cone(), "--shots", "50", "--seed", "5", "--verify",
        "--tv-threshold", "0.001",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(stderr_json(&out)["error"]["kind"], json!("verify"));
}

#[test]
fn wigner_algorithm_rejects_cone_inputs() {
    let out = run(&["simulate", "--circuit", &circuit(), "--input", &cone(), "--seed", "1", "--algorithm", "wigner"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_output() {
    let out = String::from_utf8(ok(&[
        "--format", "csv", "simulate", "--circuit", &circuit(), "--input", &cone(), "--shots", "4", "--seed", "2",
    ]))
    .unwrap();
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "shot,m1,m2,m3");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("0,"));

    let counts = String::from_utf8(ok(&["--format", "csv", "enumerate", "--d", "3", "--n", "1"])).unwrap();
    assert_eq!(counts, "d,n,max_xi,total,subspace_form,cone_form,linear,nonlinear\n3,1,4,256,22,234,112,144\n");
}

#[test]
fn verify_passes_with_bundled_fixtures() {
    let out = ok(&["verify", "--seed", "1"]);
    let report = json_of(&out);
    assert_valid("verify-report", &report);
    assert_eq!(report["passed"], json!(true));
    assert_eq!(report["shots"], json!(100_000));
    let cases = report["cases"].as_array().unwrap();
    assert!(cases.len() >= 4);
    assert!(cases.iter().any(|c| c["algorithm"] == "cnc") && cases.iter().any(|c| c["algorithm"] == "wigner"));
    for c in cases {
        assert!(c["tv"].as_f64().unwrap() <= 0.02, "{c}");
    }

    let failing = run(&["verify", "--seed", "1", "--shots", "100", "--threshold", "0.0001"]);
    assert_eq!(failing.status.code(), Some(4));
    assert_eq!(json_of(&failing.stdout)["passed"], json!(false));
}

#[test]
fn enumerate_is_bit_identical_and_complete() {
    let args = ["enumerate", "--d", "3", "--n", "1", "--list", "--max-points", "256"];
    let a = ok(&args);
    assert_eq!(a, ok(&args));
    let report = json_of(&a);
    assert_valid("enumerate-report", &report);
    assert_eq!(report["counts"]["total"], json!(256));
    assert_eq!(report["points"].as_array().unwrap().len(), 256);
    let mut seen = std::collections::BTreeSet::new();
    for p in report["points"].as_array().unwrap() {
        assert!(seen.insert(p.to_string()), "duplicate point {p}");
    }

    let counts = json_of(&ok(&["enumerate", "--d", "5", "--n", "1"]));
    assert_valid("enumerate-report", &counts);
    assert_eq!(counts["max_xi"], json!(6));
}

#[test]
fn caps_exit_with_code_three() {
    let out = run(&["enumerate", "--d", "3", "--n", "1", "--list", "--max-points", "10"]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr_json(&out);
    assert_eq!(err["error"]["kind"], json!("cap"));
    assert_eq!(err["error"]["cap"]["next_index"], json!(10));

    let out = run(&["--dense-cap", "5", "simulate", "--circuit", &circuit(), "--input", &cone(), "--seed", "1", "--verify"]);
    assert_eq!(out.status.code(), Some(3));

    let out = run(&["--max-stabilizer-states", "11", "lambda", "--operator", &fixture("stabilizer-zero.state.json").display().to_string()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn invalid_configurations_exit_with_code_two() {
    for args in [
        vec!["enumerate", "--d", "4", "--n", "1"],
        vec!["enumerate", "--d", "9", "--n", "1"],
        vec!["enumerate", "--d", "3", "--n", "0"],
        vec!["enumerate", "--d", "3"],
        vec!["--dense-cap", "0", "verify", "--seed", "1"],
        vec!["verify", "--seed", "1", "--shots", "0"],
        vec!["verify"],
        vec!["schema", "nonexistent"],
        vec!["--d", "5", "simulate", "--circuit", &circuit(), "--input", &cone(), "--seed", "1"],
        vec!["--n", "1", "simulate", "--circuit", &circuit(), "--input", &cone(), "--seed", "1"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = bin().args(["verify", "--seed", "1"]).env("CNC_THREADS", "0").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["simulate", "--circuit", "/nonexistent/c.json", "--input", &cone(), "--seed", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn schema_errors_report_json_pointers() {
    let dir = Scratch::new("pointers");
    let state = fixture("stabilizer-zero.state.json").display().to_string();
    let cases = [
        (
            json!({"d": 3, "n": 1, "instructions": [{"op": "measure", "a": [0, "x"], "var": "m"}]}),
            "/instructions/0/a/1",
        ),
        (
            json!({"d": 3, "n": 1, "instructions": [{"op": "gate", "name": "F", "qudits": [0]}, {"op": "measure", "a": [0, 1], "var": "m", "colour": 1}]}),
            "/instructions/1",
        ),
        (json!({"d": 3, "n": 1, "instructions": [{"op": "gate", "name": "F", "qudits": [3]}]}), "/instructions/0"),
        (json!({"format": "cnc/2", "d": 3, "n": 1, "instructions": []}), "/format"),
        (json!({"d": 3, "n": 1}), ""),
    ];
    for (i, (bad, pointer)) in cases.iter().enumerate() {
        let path = dir.write(&format!("c{i}.json"), bad);
        let out = run(&["simulate", "--circuit", &path, "--input", &state, "--seed", "1"]);
        assert_eq!(out.status.code(), Some(2));
        let err = stderr_json(&out);
        assert_eq!(err["error"]["kind"], json!("schema"));
        let got = err["error"]["pointer"].as_str().unwrap();
        assert!(got.starts_with(pointer), "case {i}: expected {pointer:?}, got {got:?}");
    }

    let unweighted = dir.write(
        "e.json",
        &json!({"d": 3, "n": 2, "points": [{"form": "subspace", "I": [], "gamma": {}}]}),
    );
    let out = run(&["simulate", "--circuit", &circuit(), "--input", &unweighted, "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["pointer"], json!("/points/0"));

    let short = dir.write("p.json", &json!({"d": 3, "n": 1, "form": "subspace", "I": [[1, 0, 0]], "gamma": {"0": 1}}));
    let out = run(&["decompose", "--state", &short]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["pointer"], json!("/I/0"));
}

#[test]
fn decompose_reports_certificates() {
    let dir = Scratch::new("decompose");
    let point = dir.write("cone.json", &qutrit_cone());

    let exact = json_of(&ok(&["decompose", "--state", &point, "--dictionary", "wigner", "--mode", "feasibility", "--exact"]));
    assert_valid("decompose-report", &exact);
    assert_eq!(exact["feasible"], json!(false));
    assert_eq!(exact["dictionary"], json!({"kind": "wigner", "size": 9}));
    let cert = &exact["certificate"];
    assert_eq!(cert["verified"], json!(true));
    assert_eq!(cert["exact_witness"].as_array().unwrap().len(), 9);
    assert!(cert["target_value"].as_f64().unwrap() < 0.0);
    assert!(cert["min_dictionary_value"].as_f64().unwrap() >= -1e-12);

    let neg = json_of(&ok(&["decompose", "--state", &point, "--dictionary", "wigner"]));
    assert_valid("decompose-report", &neg);
    assert!(neg["objective"].as_f64().unwrap() > 0.1);
    assert!(neg["residual"].as_f64().unwrap() < 1e-9);

    let full = json_of(&ok(&["decompose", "--state", &point, "--mode", "feasibility"]));
    assert_valid("decompose-report", &full);
    assert_eq!(full["feasible"], json!(true));
    assert_eq!(full["dictionary"]["size"], json!(256));
    let sum: f64 = full["coefficients"].as_array().unwrap().iter().map(|c| c["value"].as_f64().unwrap()).sum();
    assert!((sum - 1.0).abs() < 1e-9);

    // a user dictionary: the point itself followed by the nine Wigner points
    let mut points = vec![json!({"form": "cone", "I": [], "generators": [[1, 1], [1, 2]], "gamma": {"0": 2, "1": 2}})];
    for a in 0..3 {
        for b in 0..3 {
            points.push(json!({"form": "subspace", "I": [[1, 0], [0, 1]], "gamma": {"0": a, "1": b}}));
        }
    }
    let dict = dir.write("dict.json", &json!({"d": 3, "n": 1, "points": points}));
    let own = json_of(&ok(&["decompose", "--state", &point, "--dictionary", &dict, "--mode", "feasibility"]));
    assert_valid("decompose-report", &own);
    assert_eq!(own["dictionary"]["kind"], json!("file"));
    assert_eq!(own["dictionary"]["size"], json!(10));
    assert_eq!(own["feasible"], json!(true));

    let out = run(&["decompose", "--state", &fixture("stabilizer-zero.state.json").display().to_string(), "--dictionary", "wigner", "--exact", "--d", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lambda_reports_violations() {
    let dir = Scratch::new("lambda");
    let point = dir.write("cone.json", &qutrit_cone());
    let member = json_of(&ok(&["lambda", "--operator", &point]));
    assert_valid("lambda-report", &member);
    assert_eq!(member["member"], json!(true));
    assert_eq!(member["stabilizer_count"], json!(12));
    assert_eq!(member["violating_stabilizer"], Value::Null);

    // 2 I/3 - |0><0|
    let mut m = vec![vec![[0.0, 0.0]; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i][0] = 2.0 / 3.0 - if i == 0 { 1.0 } else { 0.0 };
    }
    let op = dir.write("op.json", &json!({"d": 3, "n": 1, "operator": m}));
    let report = json_of(&ok(&["lambda", "--operator", &op]));
    assert_valid("lambda-report", &report);
    assert_eq!(report["member"], json!(false));
    assert!((report["min_overlap"].as_f64().unwrap() + 1.0 / 3.0).abs() < 1e-9);
    let v = &report["violating_stabilizer"];
    // the violating state is |0><0|, stabilized by Z with value 0
    assert_eq!(v["stabilizers"], json!([[1, 0]]));
    assert_eq!(v["values"], json!([0]));

    let n2 = json_of(&ok(&["lambda", "--operator", &fixture("stabilizer-zero.state.json").display().to_string()]));
    assert_valid("lambda-report", &n2);
    assert_eq!(n2["stabilizer_count"], json!(360));
    assert_eq!(n2["member"], json!(true));
}

#[test]
fn out_flag_and_schema_command() {
    let dir = Scratch::new("out");
    let out = dir.path("report.json");
    let stdout = ok(&["--out", &out, "enumerate", "--d", "3", "--n", "1"]);
    assert!(stdout.is_empty());
    assert_valid("enumerate-report", &json_of(&std::fs::read(&out).unwrap()));

    let names = String::from_utf8(ok(&["schema", "list"])).unwrap();
    assert_eq!(names.lines().count(), 10);
    for name in names.lines() {
        assert_eq!(json_of(&ok(&["schema", name])), schema(name));
    }
}
