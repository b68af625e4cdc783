use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cremona-lab"))
        .args(args)
        .env_remove("CREMONA_LAB_JOBS")
        .output()
        .expect("binary runs")
}

fn report(args: &[&str]) -> (i32, Value) {
    let out = run(args);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{args:?}: {e}\nstderr: {}", String::from_utf8_lossy(&out.stderr))
    });
    (out.status.code().unwrap(), v)
}

fn assert_schema(v: &Value) {
    assert_eq!(v["schema"], 1);
    for key in ["command", "field", "tallies", "verdict", "violations", "runtime_ms", "config_digest"] {
        assert!(v.get(key).is_some(), "missing {key} in {v}");
    }
    assert!(v["violations"].is_array());
}

#[test]
fn realize_q5_is_an_odd_six_cycle() {
    let (code, v) = report(&["realize", "--q", "5"]);
    assert_schema(&v);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "pass");
    let t = &v["tallies"];
    assert_eq!(t["sign"], -1);
    assert_eq!(t["cycle_type"], serde_json::json!({ "1": 25, "6": 1 }));
    assert!(t["collinearity_witness"].is_array());
    assert!(v["runtime_ms"].is_null());
}

#[test]
fn quintic_scan_q4_is_all_even() {
    let (code, v) = report(&["quintic", "scan", "--q", "4"]);
    assert_schema(&v);
    assert_eq!(code, 0);
    let totals = &v["tallies"]["totals"];
    assert_eq!(totals["processed"], 5797);
    assert_eq!(totals["odd"], 0);
    assert_eq!(v["config_digest"], v["tallies"]["config_digest"]);
}

#[test]
fn scan_reports_do_not_depend_on_worker_count() {
    let a = run(&["quintic", "scan", "--q", "4", "--patterns", "2,7", "--jobs", "1"]);
    let b = run(&["quintic", "scan", "--q", "4", "--patterns", "2,7", "--jobs", "4"]);
    let c = Command::new(env!("CARGO_BIN_EXE_cremona-lab"))
        .args(["quintic", "scan", "--q", "4", "--patterns", "7,2"])
        .env("CREMONA_LAB_JOBS", "3")
        .output()
        .unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn scan_resumes_from_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("ck.jsonl");
    let ck = ck.to_str().unwrap();
    let full = run(&["quintic", "scan", "--q", "4", "--patterns", "2", "--block-size", "64"]);
    let partial =
        run(&["quintic", "scan", "--q", "4", "--patterns", "2", "--block-size", "64", "--checkpoint", ck, "--stop-after-blocks", "3"]);
    assert!(partial.status.success());
    let pv: Value = serde_json::from_slice(&partial.stdout).unwrap();
    assert_eq!(pv["tallies"]["complete"], false);
    let resumed =
        run(&["quintic", "scan", "--q", "4", "--patterns", "2", "--block-size", "64", "--checkpoint", ck, "--resume"]);
    assert_eq!(resumed.stdout, full.stdout);
    let mismatch =
        run(&["quintic", "scan", "--q", "4", "--patterns", "3", "--block-size", "64", "--checkpoint", ck, "--resume"]);
    assert_eq!(mismatch.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&mismatch.stderr).contains("checkpoint"));
}

#[test]
fn pgl_over_gf2_records_odd_elements() {
    let (code, v) = report(&["pgl", "parity", "--q", "2", "--n", "1", "--exhaustive"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "recorded");
    assert_eq!(v["tallies"]["checked"], 6);
    assert_eq!(v["tallies"]["odd"], 3);
    let (code, v) = report(&["pgl", "parity", "--q", "2", "--n", "2", "--exhaustive"]);
    assert_eq!(code, 0);
    assert_eq!(v["tallies"]["checked"], 168);
}

#[test]
fn pgl_sampling_over_gf4_passes() {
    let (code, v) = report(&["pgl", "parity", "--q", "4", "--n", "2", "--sample", "200", "--seed", "9"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "pass");
    assert_eq!(v["tallies"]["odd"], 0);
    assert_eq!(v["tallies"]["generator_parity"], serde_json::json!({ "a": 1, "b": 1 }));
}

#[test]
fn identical_invocations_are_byte_identical() {
    for args in [&["geiser", "--q", "4", "--samples", "5", "--seed", "3"][..], &["bundles", "--q", "8", "--trials", "30"]] {
        let a = run(args);
        let b = run(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn remaining_commands_report_their_contracts() {
    let (code, v) = report(&["quadratic", "--q", "4"]);
    assert_eq!(code, 0);
    assert_eq!(v["tallies"]["census"]["transpositions"], 10);
    let (code, v) = report(&["bn", "census", "--q", "4", "--n", "3"]);
    assert_eq!(code, 0);
    assert_eq!(v["tallies"]["matches"], true);
    let (code, v) = report(&["bertini", "--q", "4", "--samples", "10"]);
    assert_eq!(code, 0);
    assert_eq!(v["tallies"]["even"], 10);
    let (code, v) = report(&["bundles", "--q", "2", "--trials", "5"]);
    assert_eq!(code, 0);
    assert_eq!(v["tallies"]["counterexample"], serde_json::json!({ "base_parity": 1, "total_parity": -1 }));
    let (code, v) = report(&["field", "info", "--p", "3", "--m", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["field"]["q"], 9);
}

#[test]
fn out_flag_and_timing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = run(&["quadratic", "--q", "2", "--out", path.to_str().unwrap(), "--timing"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_schema(&v);
    assert!(v["runtime_ms"].is_u64());
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["realize", "--q", "6"][..],
        &["pgl", "parity", "--q", "4", "--n", "1", "--exhaustive", "--sample", "3"],
        &["quintic", "scan", "--q", "4", "--resume"],
        &["quintic", "scan", "--q", "4", "--patterns", "11"],
        &["quintic", "scan", "--q", "9"],
        &["geiser", "--q", "5"],
        &["nonsense"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
}
