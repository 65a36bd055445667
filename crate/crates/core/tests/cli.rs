//! End-to-end checks of the binary: exit codes, file formats, report
//! envelopes, and byte-level determinism apart from wall times.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kakeya-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn binary")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("kakeya-lab-test-{}-{name}", std::process::id()))
}

#[test]
fn construct_inverse_perm_q7() {
    let out = run(&["construct", "--what", "inverse-perm", "--q", "7"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["schema"], "kakeya-lab/report/v1");
    assert_eq!(v["q"], 7);
    assert_eq!(v["payload"]["table"], serde_json::json!([0, 1, 4, 5, 2, 3, 6]));
}

#[test]
fn search_besicovitch_q5_reports_17() {
    let out = run(&["search", "--objective", "besicovitch", "--q", "5", "--exhaustive"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["payload"]["minimum"], 17);
    assert_eq!(v["payload"]["exhaustive"], true);
    assert!(v["payload"]["certificate"].is_object());
}

#[test]
fn bad_q_exits_2() {
    let out = run(&["construct", "--what", "parabola", "--q", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["construct", "--what", "parabola", "--q", "15"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_exits_2() {
    let out = run(&["suite", "--q", "5", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_permutation_file_roundtrip() {
    let path = tmp("perm.json");
    std::fs::write(&path, "[0, 1, 3, 2, 4]").unwrap();
    let out = run(&["verify", "--q", "5", "--perm", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["payload"]["classification"]["kind"], "permutation");
    assert_eq!(v["payload"]["structure"]["triple_count"], 2);

    // whitespace table format
    std::fs::write(&path, "0 1 3 2 4\n").unwrap();
    let out2 = run(&["verify", "--q", "5", "--perm", path.to_str().unwrap()]);
    assert!(out2.status.success());
    assert_eq!(stdout_json(&out2)["payload"]["structure"], v["payload"]["structure"]);
    std::fs::remove_file(&path).ok();
}

#[test]
fn cover_file_and_dualize_roundtrip() {
    let path = tmp("cover.json");
    // minimal q=3 cover whose dual graph is the identity permutation
    std::fs::write(&path, r#"{"0": 0, "1": 1, "2": 2, "inf": 0}"#).unwrap();
    let out = run(&["verify", "--q", "3", "--cover", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["payload"]["cover"]["size"], 7);

    let out = run(&["dualize", "--q", "3", "--cover", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["payload"]["classification"]["kind"], "permutation");

    // missing slope is an input error
    std::fs::write(&path, r#"{"0": 0, "1": 0, "2": 0}"#).unwrap();
    let out = run(&["verify", "--q", "3", "--cover", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_file(&path).ok();
}

#[test]
fn audit_perm_passes_and_emits_checks() {
    let path = tmp("audit-perm.json");
    std::fs::write(&path, "[0, 1, 4, 5, 2, 3, 6]").unwrap();
    let out = run(&["audit", "--q", "7", "--perm", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    let checks = v["payload"]["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["holds"] == true));
    std::fs::remove_file(&path).ok();
}

#[test]
fn schema_emits_valid_json_and_validates_witness_roundtrip() {
    let out = run(&["schema"]);
    assert!(out.status.success());
    let schema = stdout_json(&out);
    assert_eq!(schema["$id"], "kakeya-lab/report/v1");

    // witness round-trip through serialization
    let w = kakeya_lab::search::Witness::Cover { keys: vec![0, 0, 1, 2, 4, 0] };
    let text = serde_json::to_string(&w).unwrap();
    let back: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(back["kind"], "cover");
    assert_eq!(back["keys"], serde_json::json!([0, 0, 1, 2, 4, 0]));
}

fn strip_wall_time(mut v: serde_json::Value) -> serde_json::Value {
    if let Some(p) = v.get_mut("payload") {
        if let Some(obj) = p.as_object_mut() {
            obj.remove("wall_time_secs");
        }
    }
    v
}

#[test]
fn reports_are_deterministic_apart_from_wall_time() {
    let args = ["search", "--objective", "triples", "--q", "7", "--exhaustive"];
    let a = stdout_json(&run(&args));
    let b = stdout_json(&bin().args(args).env("KAKEYA_LAB_WORKERS", "2").output().unwrap());
    assert_eq!(strip_wall_time(a), strip_wall_time(b));

    let args = [
        "search", "--objective", "triples", "--q", "11", "--sample", "100", "--seed", "5",
    ];
    let a = stdout_json(&run(&args));
    let b = stdout_json(&run(&args));
    assert_eq!(strip_wall_time(a), strip_wall_time(b));
}

#[test]
fn suite_q5_passes_every_named_check() {
    let out = run(&["suite", "--q", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("PASS min-besicovitch"));
    assert!(text.contains("PASS point-identities"));
    assert!(!text.contains("FAIL"));
}
