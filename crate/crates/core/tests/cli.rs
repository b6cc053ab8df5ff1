//! End-to-end tests of the `ionc` binary: exit codes, diagnostics, file
//! outputs, and byte-level determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ionc"))
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ionc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn compile_then_verify_round_trip() {
    let sched = tmp("cnot.sched");
    let report = tmp("cnot.report");
    let out = bin()
        .args(["compile"])
        .arg(data("cnot.qc"))
        .arg("--schedule")
        .arg(&sched)
        .arg("--report")
        .arg(&report)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let sched_text = std::fs::read_to_string(&sched).unwrap();
    assert!(sched_text.contains("MAP"), "mapping line");
    assert!(sched_text.contains("XX"), "two-qubit pulse line");
    let report_text = std::fs::read_to_string(&report).unwrap();
    assert!(report_text.contains("duration"), "report duration");
    assert!(report_text.contains("verified"), "report verdict");

    let out = bin()
        .args(["verify"])
        .arg(data("cnot.qc"))
        .arg(&sched)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("verified: yes"));
}

#[test]
fn verify_rejects_wrong_logical_circuit() {
    let sched = tmp("cnot-for-reject.sched");
    let out = bin()
        .args(["compile"])
        .arg(data("cnot.qc"))
        .arg("--schedule")
        .arg(&sched)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));

    let reversed = tmp("reversed.qc");
    std::fs::write(&reversed, "qubits 2\ncnot 1 0\n").unwrap();
    let out = bin().args(["verify"]).arg(&reversed).arg(&sched).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "exit code for a failed check");
    assert!(stdout(&out).contains("verified: NO"));
}

#[test]
fn parse_errors_carry_positions() {
    let bad = tmp("bad.qc");
    std::fs::write(&bad, "qubits 2\ncnot 0 5\n").unwrap();
    let out = bin().args(["compile"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("line 2"), "line number: {err}");
    assert!(err.contains("col 8"), "column number: {err}");

    let unknown = tmp("unknown.qc");
    std::fs::write(&unknown, "qubits 2\nfrob 0\n").unwrap();
    let out = bin().args(["compile"]).arg(&unknown).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2"));
}

#[test]
fn objective_flags_are_validated() {
    let out = bin()
        .args(["compile"])
        .arg(data("cnot.qc"))
        .args(["--objective", "sideways"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error:"));

    let out = bin()
        .args(["compile"])
        .arg(data("cnot.qc"))
        .args(["--objective", "balanced=0.3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn tolerance_env_is_validated() {
    let out = bin()
        .args(["compile"])
        .arg(data("cnot.qc"))
        .env("ION_COMPILE_TOL", "abc")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("ION_COMPILE_TOL"));

    let out = bin()
        .args(["compile"])
        .arg(data("cnot.qc"))
        .env("ION_COMPILE_TOL", "1e-6")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn simulate_prints_amplitudes_and_probabilities() {
    let x = tmp("x.qc");
    std::fs::write(&x, "qubits 1\nx 0\n").unwrap();
    let out = bin().args(["simulate"]).arg(&x).arg("--probs").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "1 1.000000");

    let out = bin()
        .args(["simulate"])
        .arg(&x)
        .args(["--state", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("0 "), "flipped back: {}", stdout(&out));
}

#[test]
fn lemma_bounds_reports_hold() {
    let out = bin().args(["lemma-bounds"]).arg(data("cnot.qc")).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("bounds hold: yes"));
}

#[test]
fn bench_all_is_byte_identical_across_runs() {
    let first = bin().args(["bench"]).output().unwrap();
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let second = bin().args(["bench"]).output().unwrap();
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout, "bench output drifted");
    assert!(stdout(&first).lines().all(|l| l.starts_with("PASS")));
}
