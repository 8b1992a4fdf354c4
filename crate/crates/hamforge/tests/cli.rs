//! End-to-end tests for the command line interface.
//!
//! Each test runs the compiled binary against a small description in a
//! scratch directory and inspects exit codes, stdout reports, and the
//! artifacts left on disk.

use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const XP_SPEC: &str = r#"{
  "grid": { "n": 2, "a": -1.0, "b": 1.0 },
  "terms": [ { "alpha": [0.5, 0.0], "poly": [0.0, 0.5], "m": 1 } ]
}
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hamforge"))
}

fn fresh_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hamforge_cli_{}_{tag}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_spec(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn build_writes_artifacts_and_reruns_are_byte_identical() {
    let dir = fresh_dir("build");
    let spec = write_spec(&dir, "spec.json", XP_SPEC);

    let out = run_in(&dir, &["build", spec.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    let gates = fs::read(dir.join("u_h.gates.txt")).unwrap();
    let report = read_json(&dir.join("build_report.json"));
    assert_eq!(report["qubits"].as_u64().unwrap(), 12);
    assert!(report["scale"].as_f64().unwrap() > 0.0);
    assert_eq!(report["spec_digest"].as_str().unwrap().len(), 64);
    assert_eq!(report["data_out"], serde_json::json!(["row"]));
    assert!(!report["resources"]["failed"].as_bool().unwrap());
    let widths: u64 = report["registers"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["width"].as_u64().unwrap())
        .sum();
    assert_eq!(widths, report["qubits"].as_u64().unwrap());
    let manifest = read_json(&dir.join("build_report.manifest.json"));
    assert_eq!(manifest["command"], "build");
    assert_eq!(manifest["spec_digest"], report["spec_digest"]);

    let out2 = run_in(
        &dir,
        &[
            "build",
            spec.to_str().unwrap(),
            "--out",
            "again.gates.txt",
            "--report",
            "again.json",
        ],
    );
    assert_eq!(code(&out2), 0, "stderr: {}", stderr_of(&out2));
    let gates2 = fs::read(dir.join("again.gates.txt")).unwrap();
    assert_eq!(gates, gates2, "rebuilds must be byte identical");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn verify_passes_on_a_valid_description() {
    let dir = fresh_dir("verify");
    let spec = write_spec(&dir, "spec.json", XP_SPEC);

    let out = bin()
        .current_dir(&dir)
        .env("HAMFORGE_THREADS", "1")
        .args(["verify", spec.to_str().unwrap(), "--report", "verify.json"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));

    let rep = stdout_json(&out);
    assert_eq!(rep["passed"], Value::Bool(true));
    let checks = rep["checks"].as_array().unwrap();
    let names: Vec<&str> = checks.iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"block_equality"));
    assert!(names.contains(&"ancilla_purity"));
    for c in checks {
        assert!(c["passed"].as_bool().unwrap(), "failed check: {c}");
        assert!(c["value"].as_f64().unwrap() <= c["tolerance"].as_f64().unwrap());
    }
    let entries = rep["resources"]["entries"].as_array().unwrap();
    for name in ["momentum_oracle", "multicontrol", "U_H"] {
        assert!(entries.iter().any(|e| e["name"] == name), "missing audit {name}");
    }
    assert_eq!(read_json(&dir.join("verify.json")), rep);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn tampering_with_one_angle_fails_verification() {
    let dir = fresh_dir("tamper");
    let spec = write_spec(&dir, "spec.json", XP_SPEC);
    let out = run_in(&dir, &["build", spec.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));

    let text = fs::read_to_string(dir.join("u_h.gates.txt")).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let idx = lines
        .iter()
        .position(|l| l.starts_with("ry "))
        .expect("the stream should contain a y rotation");
    let mut tok: Vec<String> = lines[idx].split_whitespace().map(str::to_string).collect();
    let bumped = tok[2].parse::<f64>().unwrap() + 1e-3;
    tok[2] = format!("{bumped:.16e}");
    lines[idx] = tok.join(" ");
    fs::write(dir.join("tampered.gates.txt"), lines.join("\n") + "\n").unwrap();

    let out = run_in(
        &dir,
        &["verify", spec.to_str().unwrap(), "--gates", "tampered.gates.txt"],
    );
    assert_eq!(code(&out), 5, "stderr: {}", stderr_of(&out));
    let rep = stdout_json(&out);
    assert_eq!(rep["passed"], Value::Bool(false));
    let block = rep["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "block_equality")
        .unwrap();
    assert!(!block["passed"].as_bool().unwrap());
    assert!(block["value"].as_f64().unwrap() > 1e-9);
    assert!(block["detail"].as_str().unwrap().contains("max entry deviation"));
    assert!(rep["worst"].is_string());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn foreign_register_layout_is_rejected() {
    let dir = fresh_dir("layout");
    let spec = write_spec(&dir, "spec.json", XP_SPEC);
    let out = run_in(&dir, &["build", spec.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));

    let text = fs::read_to_string(dir.join("u_h.gates.txt")).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let idx = lines.iter().position(|l| l.starts_with("# reg ")).unwrap();
    let mut tok: Vec<String> = lines[idx].split_whitespace().map(str::to_string).collect();
    tok[2].push('x');
    lines[idx] = tok.join(" ");
    fs::write(dir.join("renamed.gates.txt"), lines.join("\n") + "\n").unwrap();

    let out = run_in(
        &dir,
        &["verify", spec.to_str().unwrap(), "--gates", "renamed.gates.txt"],
    );
    assert_eq!(code(&out), 2);
    assert!(stderr_of(&out).contains("register layout"));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn bad_inputs_map_to_schema_and_domain_codes() {
    let dir = fresh_dir("codes");

    let out = run_in(&dir, &["build", "missing.json"]);
    assert_eq!(code(&out), 2);
    assert!(stderr_of(&out).starts_with("error:"));

    let bad = write_spec(&dir, "bad.json", "{ not json");
    assert_eq!(code(&run_in(&dir, &["build", bad.to_str().unwrap()])), 2);

    let wide = write_spec(
        &dir,
        "wide.json",
        r#"{"grid":{"n":2,"a":-1.0,"b":1.0},"terms":[{"alpha":[0.5,0.0],"poly":[0.0,1.5],"m":1}]}"#,
    );
    assert_eq!(code(&run_in(&dir, &["build", wide.to_str().unwrap()])), 3);

    let spec = write_spec(&dir, "spec.json", XP_SPEC);
    let out = run_in(&dir, &["build", spec.to_str().unwrap(), "--max-qubits", "4"]);
    assert_eq!(code(&out), 3);
    assert!(stderr_of(&out).contains("exceeds the qubit cap"));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn zero_time_evolution_encodes_the_identity() {
    let dir = fresh_dir("evolve0");
    let spec = write_spec(&dir, "spec.json", XP_SPEC);
    let out = run_in(
        &dir,
        &["evolve", spec.to_str().unwrap(), "--time", "0.0", "--eps", "1e-3"],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    let rep = read_json(&dir.join("evolve_report.json"));
    assert_eq!(rep["g"].as_u64().unwrap(), 0);
    assert_eq!(rep["alpha"].as_f64().unwrap(), 2.0);
    assert!(rep["measured_error"].as_f64().unwrap() < 1e-9);
    assert!(rep["ancilla_leak"].as_f64().unwrap() <= 1e-10);
    assert!(dir.join("evolution.gates.txt").exists());
    assert!(dir.join("evolve_report.manifest.json").exists());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn count_emits_the_scaling_table() {
    let dir = fresh_dir("count");
    let out = run_in(&dir, &["count"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    let csv = fs::read_to_string(dir.join("counts.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("n,qubits,one_qubit,cnot"));
    for (i, l) in lines[1..].iter().enumerate() {
        assert!(l.starts_with(&format!("{},", i + 3)), "row {l}");
    }
    let text = String::from_utf8_lossy(&out.stdout);
    let slope: f64 = text.trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(slope > 1.0 && slope < 3.0, "slope {slope}");
    assert!(dir.join("counts.manifest.json").exists());
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn primitive_reports_and_audits() {
    let dir = fresh_dir("prim");

    let out = run_in(
        &dir,
        &["primitive", "adder", "--param", "n=3", "--out", "adder.gates.txt"],
    );
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    let rep = stdout_json(&out);
    assert_eq!(rep["name"], "adder");
    assert_eq!(rep["audit"]["passed"], Value::Bool(true));
    assert!(rep["qubits"].as_u64().unwrap() >= 7);
    assert!(dir.join("adder.gates.txt").exists());
    assert!(dir.join("adder.gates.manifest.json").exists());

    let out = run_in(&dir, &["primitive", "phases", "--param", "coeffs=0,0.5"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    let rep = stdout_json(&out);
    assert_eq!(rep["extra"]["phis"].as_array().unwrap().len(), 1);
    assert!(rep["extra"]["residual"].as_f64().unwrap() < 1e-10);

    let out = run_in(&dir, &["primitive", "nonesuch"]);
    assert_eq!(code(&out), 3);

    let out = run_in(
        &dir,
        &["primitive", "phases", "--param", "coeffs=0,0.5", "--out", "x.txt"],
    );
    assert_eq!(code(&out), 3);
    let _ = fs::remove_dir_all(&dir);
}
