use std::path::Path;
use std::process::{Command, Output};

use zakgross::{emit_circuit, parse_circuit};
use zakgross_core::symplectic::{compose_word, Generator, IntSymplectic, Operation};

const BELL: &str = r#"{"d":3,"n":2,"inputs":[{"ideal_logical":0},{"ideal_logical":0}],
    "ops":[{"F":0},{"SUM":[0,1]}],"measurement":{"modes":[0,1],"K":3},
    "estimator":{"epsilon":0.05,"delta_fail":0.1,"seed":3}}"#;

fn zakgross(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zakgross"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn exact_run_prints_bell_table() {
    let dir = tempfile::tempdir().unwrap();
    let circ = write(dir.path(), "bell.json", BELL);
    let out = zakgross(&["run", &circ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["mode"], "exact");
    let outs = v["outcomes"].as_array().unwrap();
    assert_eq!(outs.len(), 9);
    for o in outs {
        let b = o["bins"].as_array().unwrap();
        let want = if b[0] == b[1] { 1.0 / 3.0 } else { 0.0 };
        assert!((o["p"].as_f64().unwrap() - want).abs() < 1e-12);
    }
}

#[test]
fn estimate_writes_csv_and_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let circ = write(dir.path(), "bell.json", BELL);
    let csv = dir.path().join("p.csv");
    let csv = csv.to_str().unwrap();
    let a = zakgross(&["run", &circ, "--mode", "estimate", "--csv", csv, "--threads", "1"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().next(), Some("bins,p,std_error"));
    assert_eq!(text.lines().count(), 10);
    let b = zakgross(&["run", &circ, "--mode", "estimate", "--threads", "3"]);
    let strip = |o: &Output| {
        let mut v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v["wall_time_s"] = serde_json::Value::Null;
        v
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", &BELL.replace(r#""d":3"#, r#""d":4"#));
    let out = zakgross(&["run", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("odd"));

    let circ = write(dir.path(), "bell.json", BELL);
    let out = zakgross(&["run", &circ, "--mode", "estimate", "--sample-cap", "5"]);
    assert_eq!(out.status.code(), Some(4));

    let out = zakgross(&["run", &dir.path().join("missing.json").to_string_lossy()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn decompose_round_trips() {
    let out = zakgross(&["decompose", "[[2,1],[1,1]]"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let doc = serde_json::json!({
        "d": 3, "n": 1, "inputs": [{"ideal_logical": 0}],
        "ops": v["ops"], "measurement": {"modes": [0], "K": 3},
    });
    let spec = parse_circuit(&doc.to_string()).unwrap();
    assert_eq!(v["length"].as_u64(), Some(spec.ops.len() as u64));
    let word: Vec<Generator> = spec
        .ops
        .iter()
        .map(|op| match op {
            Operation::Gate(g) => *g,
            other => panic!("{other:?}"),
        })
        .collect();
    let want = IntSymplectic::from_rows(&[vec![2, 1], vec![1, 1]]).unwrap();
    assert_eq!(compose_word(&word, 1).unwrap(), want);
}

#[test]
fn negativity_sweep_csv() {
    let out = zakgross(&["negativity", "--deltas", "0.5", "--state", "logical_0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("delta,M,log_M"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let log_m: f64 = row[2].parse().unwrap();
    assert!((log_m - 0.14433).abs() < 1e-4, "{log_m}");
}

#[test]
fn emitted_documents_parse_back() {
    let spec = parse_circuit(BELL).unwrap();
    let again = parse_circuit(&emit_circuit(&spec)).unwrap();
    assert_eq!(again.ops, spec.ops);
    assert_eq!(again.params, spec.params);
}
