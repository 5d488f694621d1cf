use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn feqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_feqc")).args(args).output().unwrap()
}

fn corpus(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/corpus")
        .join(name)
        .display()
        .to_string()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn validator() -> jsonschema::Validator {
    let path: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/run_report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn assert_valid(report: &Value) {
    let v = validator();
    let errors: Vec<String> = v.iter_errors(report).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}\n{report}");
}

fn total(report: &Value) -> f64 {
    report["branches"].as_array().unwrap().iter().map(|b| b["probability"].as_f64().unwrap()).sum()
}

#[test]
fn encoder_enumerates_two_even_branches() {
    let rep = json(&feqc(&["run", &corpus("valid/encoder.feqc"), "--emit-state"]));
    assert_valid(&rep);
    let branches = rep["branches"].as_array().unwrap();
    assert_eq!(branches.len(), 2);
    for b in branches {
        assert!((b["probability"].as_f64().unwrap() - 0.5).abs() < 1e-9);
        assert!(b["state"].as_array().unwrap().iter().all(|a| a["key"].as_str().unwrap().len() == 4));
    }
    assert!(rep["seed"].is_null());
}

#[test]
fn bell_circuit_on_psi2_has_one_path() {
    let rep = json(&feqc(&["run", &corpus("valid/bell_analyzer_psi2.feqc")]));
    let branches = rep["branches"].as_array().unwrap();
    assert_eq!(branches.len(), 1);
    let o = &branches[0]["outcomes"];
    assert_eq!((o["p1"].as_u64(), o["p2"].as_u64(), o["p3"].as_u64()), (Some(1), Some(1), Some(0)));
}

#[test]
fn sampling_is_byte_identical() {
    let args = ["run", &corpus("valid/encoder.feqc"), "--mode", "sample", "--shots", "100000", "--seed", "7"];
    let a = feqc(&args);
    let b = feqc(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let rep = json(&a);
    assert_valid(&rep);
    let counts: u64 = rep["frequencies"].as_object().unwrap().values().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(counts, 100_000);
    assert_eq!(rep["seed"], 7);
}

#[test]
fn corr_backend_reports_terms() {
    let rep = json(&feqc(&["run", &corpus("valid/gaussian_mix.feqc"), "--backend", "corr", "--pretty"]));
    assert_valid(&rep);
    assert!(rep["corr"]["terms"].as_u64().unwrap() > 0);
    assert!((total(&rep) - 1.0).abs() < 1e-9);
    let fock = json(&feqc(&["run", &corpus("valid/gaussian_mix.feqc")]));
    assert_eq!(fock["branches"].as_array().unwrap().len(), rep["branches"].as_array().unwrap().len());
}

#[test]
fn every_valid_file_reports_against_the_schema() {
    for entry in std::fs::read_dir(corpus("valid")).unwrap() {
        let path = entry.unwrap().path().display().to_string();
        let rep = json(&feqc(&["run", &path]));
        assert_valid(&rep);
        assert!((total(&rep) - 1.0).abs() < 1e-9, "{path}");
    }
}

#[test]
fn exit_codes() {
    let bad = feqc(&["run", &corpus("invalid/forward_reference.feqc")]);
    assert_eq!(bad.status.code(), Some(2));
    let err = String::from_utf8_lossy(&bad.stderr);
    assert!(err.contains(":3:4: E202 forward-reference"), "{err}");

    let corr = feqc(&["run", &corpus("valid/encoder.feqc"), "--backend", "corr"]);
    assert_eq!(corr.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&corr.stderr).contains("non-Gaussian"));

    let state = feqc(&["run", &corpus("valid/split_electron.feqc"), "--backend", "corr", "--emit-state"]);
    assert_eq!(state.status.code(), Some(1));
    assert_eq!(feqc(&["run", "/nonexistent.feqc"]).status.code(), Some(1));
    assert_eq!(feqc(&["gadget", "encoder", "--input", "(0,0),(0,0)"]).status.code(), Some(1));
}

#[test]
fn cnot_gadget_flips_target() {
    let rep = json(&feqc(&["gadget", "cnot", "--control", "1", "--target", "0"]));
    let branches = rep["branches"].as_array().unwrap();
    assert_eq!(branches.len(), 8);
    for b in branches {
        assert!((b["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    }
    assert!((rep["success_probability"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn cnot_ablation_is_visible_from_the_cli() {
    let rep = json(&feqc(&["gadget", "cnot", "--control", "(1,0),(1,0)", "--target", "0", "--corrections", "skip-control"]));
    assert!(rep["success_probability"].as_f64().unwrap() < 0.9);
}

#[test]
fn bell_gadget_reads_input() {
    for det in ["charge", "parity"] {
        let rep = json(&feqc(&["gadget", "bell", "--input", "3", "--detector", det]));
        assert!(rep["branches"].as_array().unwrap().iter().all(|b| b["b"] == 3));
        assert!((rep["success_probability"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    }
    assert_eq!(feqc(&["gadget", "bell", "--input", "4"]).status.code(), Some(2));
}

#[test]
fn encoder_and_teleport_gadgets() {
    let rep = json(&feqc(&["gadget", "encoder", "--input", "(0.6,0),(0,0.8)"]));
    assert!((rep["success_probability"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let rep = json(&feqc(&["gadget", "teleport", "--input", "(0.6,0),(0,0.8)"]));
    let branches = rep["branches"].as_array().unwrap();
    assert_eq!(branches.len(), 4);
    assert!((rep["success_probability"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn appendix_table_all_match() {
    let rep = json(&feqc(&["gadget", "appendix-table"]));
    let rows = rep["table"].as_array().unwrap();
    assert_eq!(rows.len(), 16);
    assert!(rows.iter().all(|r| r["match"] == true));
    let text = feqc(&["gadget", "appendix-table", "--text"]);
    assert!(text.status.success());
    assert_eq!(String::from_utf8_lossy(&text.stdout).lines().count(), 17);
}
