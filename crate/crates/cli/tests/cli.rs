use std::path::Path;
use std::process::{Command, Output};

fn uqf(args: &[&str], seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_uqf"));
    cmd.args(args).env_remove("UQF_SEED");
    if let Some(s) = seed_env {
        cmd.env("UQF_SEED", s);
    }
    cmd.output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = uqf(args, None);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn setup(dir: &Path) -> (String, String) {
    let d = dir.to_str().unwrap();
    ok(&["fixtures", "make", "--seed", "2", "--out-dir", d, "--test-samples", "30"]);
    let qm = format!("{d}/model.uqqm");
    ok(&["quantize", "--model", &format!("{d}/model.uqhm"), "--calib", &format!("{d}/calib.uqds"), "--out", &qm]);
    (qm, format!("{d}/test.uqds"))
}

#[test]
fn missing_file_and_bad_flags_are_usage_errors() {
    let out = uqf(&["infer", "--model", "/does/not/exist.uqqm", "--data", "x.uqds"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no such file"));
    assert_eq!(uqf(&["uq", "run", "--bogus"], None).status.code(), Some(2));
}

#[test]
fn invalid_values_and_corrupt_files_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let (qm, data) = setup(dir.path());
    let cases: [&[&str]; 3] = [
        &["uq", "run", "--model", &qm, "--data", &data, "--num-iter", "1"],
        &["uq", "run", "--model", &qm, "--data", &data, "--conf-factor", "1.0"],
        &["uq", "run", "--model", &qm, "--data", &data, "--dropout1", "1.5"],
    ];
    for args in cases {
        assert_eq!(uqf(args, None).status.code(), Some(1), "{args:?}");
    }
    // a dataset passed as a model
    assert_eq!(uqf(&["infer", "--model", &data, "--data", &data], None).status.code(), Some(1));
}

#[test]
fn seed_env_matches_flag() {
    let dir = tempfile::tempdir().unwrap();
    let (qm, data) = setup(dir.path());
    let args = ["uq", "run", "--model", &qm, "--data", &data, "--num-iter", "10"];
    let via_env = uqf(&args, Some("99"));
    assert!(via_env.status.success());
    let mut with_flag = args.to_vec();
    with_flag.extend(["--seed", "99"]);
    assert_eq!(via_env.stdout, ok(&with_flag).into_bytes());
    let mut other = args.to_vec();
    other.extend(["--seed", "100"]);
    assert_ne!(via_env.stdout, ok(&other).into_bytes());
}

#[test]
fn reports_round_trip_through_report_command() {
    let dir = tempfile::tempdir().unwrap();
    let (qm, data) = setup(dir.path());
    let run = dir.path().join("run.json");
    let infer = dir.path().join("infer.json");
    ok(&["uq", "run", "--model", &qm, "--data", &data, "--out", run.to_str().unwrap()]);
    ok(&["infer", "--model", &qm, "--data", &data, "--out", infer.to_str().unwrap()]);

    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&run).unwrap()).unwrap();
    assert_eq!(v["kind"], "uq_run");
    assert_eq!(v["config"]["num_iter"], 50);
    assert_eq!(v["report"]["num_samples"], 30);
    let raw = std::fs::read_to_string(&run).unwrap();
    let at = |k: &str| raw.find(&format!("\"{k}\"")).unwrap();
    assert!(at("kind") < at("config") && at("config") < at("report"));
    let raw = &raw[at("report")..];
    let at = |k: &str| raw.find(&format!("\"{k}\"")).unwrap();
    assert!(at("num_samples") < at("z") && at("z") < at("threshold") && at("threshold") < at("net_tp"));

    let text = ok(&["report", run.to_str().unwrap()]);
    assert!(text.contains("micro-F1 with UQ"));
    let text = ok(&["report", infer.to_str().unwrap()]);
    assert!(text.contains("base inference over 30 samples"));

    std::fs::write(dir.path().join("junk.json"), "{\"kind\":\"nope\"}").unwrap();
    assert_eq!(uqf(&["report", dir.path().join("junk.json").to_str().unwrap()], None).status.code(), Some(1));
}

#[test]
fn zero_dropout_override_ignores_seed_and_num_iter() {
    let dir = tempfile::tempdir().unwrap();
    let (qm, data) = setup(dir.path());
    let run = |seed: &str, n: &str| {
        let out = ok(&[
            "uq", "run", "--model", &qm, "--data", &data, "--dropout1", "0", "--dropout2", "0", "--num-iter", n,
            "--seed", seed,
        ]);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        v["report"]["samples"].clone()
    };
    assert_eq!(run("1", "5"), run("2", "20"));
}

#[test]
fn zero_weight_fixture_is_all_absent() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    ok(&["fixtures", "make", "--out-dir", d, "--zero-weights", "--test-samples", "10"]);
    let qm = format!("{d}/m.uqqm");
    ok(&["quantize", "--model", &format!("{d}/model.uqhm"), "--calib", &format!("{d}/calib.uqds"), "--out", &qm]);
    let out = ok(&["uq", "run", "--model", &qm, "--data", &format!("{d}/test.uqds"), "--num-iter", "5"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    // sigmoid(0) sits on the default threshold, so every class is uncertain
    assert_eq!(v["report"]["ignored_ids"].as_array().unwrap().len(), 10);
    assert!(v["report"]["micro_f1"].is_null());
    assert_eq!(v["report"]["undefined_metrics"][0], "micro_f1");
}

#[test]
fn grid_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    let (qm, data) = setup(dir.path());
    let out = ok(&["uq", "grid", "--model", &qm, "--data", &data, "--conf-factors", "0.5,0.9", "--num-iters", "5,10"]);
    assert_eq!(out.lines().count(), 6);
    assert!(out.lines().next().unwrap().contains("num_iter=10"));
}
