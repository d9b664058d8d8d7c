use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use spam_purify::verification::forward_probabilities;
use spam_purify::NoiseParameters;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_spam-purify"));
    cmd.env_remove("SPAM_PURIFY_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    serde_json::from_str(&stdout(&all)).unwrap()
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(path).unwrap()
}

fn write_input(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn table1_matches_golden() {
    assert_eq!(stdout(&["table1"]), golden("table1.txt"));
    assert_eq!(stdout(&["table1", "--format", "csv"]), golden("table1.csv"));
}

#[test]
fn cases_match_golden() {
    assert_eq!(stdout(&["cases"]), golden("cases.txt"));
}

#[test]
fn table1_rows() {
    let r = json(&["table1"]);
    let rows = r["rows"].as_array().unwrap();
    let eps_c = |f: f64| {
        let row = rows.iter().find(|row| num(&row["f"]) == f).unwrap();
        num(&row["eps_c"])
    };
    assert!((eps_c(0.95) - 0.1460).abs() < 5e-5);
    assert!((eps_c(0.93) - 0.1830).abs() < 5e-5);
    assert_eq!(eps_c(1.0), 0.0);
}

#[test]
fn cases_report_verified_rates() {
    let r = json(&["cases"]);
    let case2 = &r["rows"][1];
    assert_eq!(case2["case"], "Case 2");
    for (key, want) in [("est_one_minus_f", 0.1), ("est_q", 0.05), ("est_eps", 0.01)] {
        assert!((num(&case2[key]) - want).abs() < 1e-9, "{key}");
    }
    assert!((num(&case2["f1"]) - 0.979).abs() < 5e-4);
    assert!((num(&case2["f2"]) - 0.994).abs() < 5e-4);
    let case3 = &r["rows"][2];
    assert!((num(&case3["f1"]) - 0.989).abs() < 5e-4);
    assert!((num(&case3["f2"]) - 0.991).abs() < 5e-4);
    let case1 = &r["rows"][0];
    assert!(num(&case1["est_eps"]) < 1e-9);
    assert_eq!(num(&case1["f_inf"]), 1.0);
    assert_eq!(r["rows"][4]["condition"], false);
}

#[test]
fn purify_state_examples() {
    let r = json(&["purify-state", "--f", "0.95", "--q", "0.05", "--eps", "0", "--n", "2"]);
    let row = &r["rows"][2];
    assert!((num(&row["fidelity"]) - 0.999421).abs() < 1e-6);
    assert!((num(&row["p_succ"]) - 0.7785).abs() < 5e-5);
    assert_eq!(r["condition"], true);
    for key in ["config", "rows", "limits", "condition"] {
        assert!(r.get(key).is_some(), "{key}");
    }

    let r = json(&["purify-state", "--f", "0.99", "--q", "0.05", "--eps", "0.1", "--n", "1"]);
    assert!((num(&r["rows"][1]["fidelity"]) - 0.971).abs() < 5e-4);
    assert_eq!(r["condition"], false);

    let r = json(&["purify-state", "--f", "1", "--q", "0", "--eps", "0", "--n", "5"]);
    for row in r["rows"].as_array().unwrap() {
        assert_eq!(num(&row["fidelity"]), 1.0);
        assert_eq!(num(&row["fidelity_exact"]), 1.0);
    }
}

#[test]
fn purify_measurement_examples() {
    let r = json(&["purify-measurement", "--f", "0.95", "--q", "0.05", "--eps", "0", "--m", "2"]);
    assert!((num(&r["rows"][2]["q_m"]) - 5.796e-4).abs() < 5e-7);

    let r = json(&["purify-measurement", "--eps", "0.05", "--m", "40"]);
    assert!((num(&r["limits"]["q_limit"]) - 0.016).abs() < 5e-4);

    let r = json(&["purify-measurement", "--q", "0", "--m", "3"]);
    for row in r["rows"].as_array().unwrap() {
        assert_eq!(num(&row["q_m"]), 0.0);
    }
}

#[test]
fn sweep_csv() {
    let out = stdout(&["sweep", "--f", "0.99,0.95", "--eps-min", "0", "--eps-max", "0.2", "--eps-steps", "3"]);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("f_initial,eps,eps_c,n_required,fidelity_limit,condition"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0][..2], ["0.99", "0"]);
    assert_eq!(rows[0][3], "1");
    // eps = 0.2 is above eps_c(0.95) = 0.1460
    assert_eq!(rows[5][3], "");
    assert!(rows[5][4].parse::<f64>().unwrap() < 0.95);
    assert!((rows[3][2].parse::<f64>().unwrap() - 0.1460).abs() < 5e-5);
}

#[test]
fn verify_examples() {
    let dir = tempfile::tempdir().unwrap();

    let case1 = write_input(&dir, "case1.json", r#"{"p01": 0.154, "p10": 0.09, "p11": 0.09}"#);
    let r = json(&["verify", &case1]);
    for (key, want) in [("one_minus_f", 0.1), ("q", 0.1), ("eps", 0.0)] {
        assert!((num(&r["estimate"][key]) - want).abs() < 1e-3, "{key}");
    }

    let p = forward_probabilities(&NoiseParameters::new(0.95, 0.05, 0.05).unwrap()).probabilities();
    let body = format!(r#"{{"p00": {}, "p01": {}, "p10": {}, "p11": {}}}"#, p[0], p[1], p[2], p[3]);
    let case4 = write_input(&dir, "case4.json", &body);
    let r = json(&["verify", &case4]);
    for key in ["one_minus_f", "q", "eps"] {
        assert!((num(&r["estimate"][key]) - 0.05).abs() < 1e-6, "{key}");
    }
    assert!(r["recommended_targets"].is_null());

    let pure = write_input(&dir, "pure.json", r#"{"p00": 1, "p01": 0, "p10": 0, "p11": 0}"#);
    let r = json(&["verify", &pure]);
    for key in ["one_minus_f", "q", "eps", "residual"] {
        assert!(num(&r["estimate"][key]).abs() < 1e-9, "{key}");
    }
}

#[test]
fn verify_counts_report_standard_errors() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_input(
        &dir,
        "counts.json",
        r#"{"c00": 788600, "c01": 96100, "c10": 57600, "c11": 57700, "shots": 1000000}"#,
    );
    let r = json(&["verify", &input]);
    let se = &r["estimate"]["standard_errors"];
    assert!(num(&se["eps"]) > 0.0 && num(&se["eps"]) < 0.01);
    assert!(r["recommended_targets"].is_null() || r["recommended_targets"].is_u64());
}

#[test]
fn exit_code_for_invalid_parameters() {
    for args in [
        &["purify-state", "--f", "0.4"][..],
        &["purify-state", "--eps", "1"],
        &["purify-state", "--q", "0.5"],
        &["purify-state", "--trials", "0"],
        &["purify-measurement", "--f", "1.2"],
        &["sweep", "--f", "0.3"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let out = run(&["purify-state", "--eps", "1"]);
    let msg = String::from_utf8(out.stderr).unwrap();
    assert!(msg.contains("[0, 1)"), "{msg}");
}

#[test]
fn exit_code_for_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let malformed = write_input(&dir, "bad.json", "{not json");
    let unnormalized = write_input(&dir, "sum.json", r#"{"p00": 0.667, "p01": 0.154, "p10": 0.09, "p11": 0.09}"#);
    let negative = write_input(&dir, "neg.json", r#"{"p00": 1.1, "p01": -0.1, "p10": 0, "p11": 0}"#);
    let shots = write_input(&dir, "shots.json", r#"{"c00": 1, "c01": 1, "c10": 1, "c11": 1, "shots": 5}"#);
    for input in [missing.to_str().unwrap(), &malformed, &unnormalized, &negative, &shots] {
        assert_eq!(run(&["verify", input]).status.code(), Some(3), "{input}");
    }
    assert_eq!(run(&["verify", &unnormalized, "--renormalize"]).status.code(), Some(0));
}

#[test]
fn non_convergence_still_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_input(
        &dir,
        "counts.json",
        r#"{"c00": 788600, "c01": 96100, "c10": 57600, "c11": 57700}"#,
    );
    let report = dir.path().join("report.json");
    let out = run(&[
        "verify",
        &input,
        "--max-iterations",
        "1",
        "--format",
        "json",
        "--output",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["estimate"]["converged"], false);
}

#[test]
fn json_reports_replay_identically() {
    let dir = tempfile::tempdir().unwrap();
    let counts = write_input(&dir, "c.json", r#"{"c00": 7886, "c01": 961, "c10": 576, "c11": 577}"#);
    let runs: [&[&str]; 5] = [
        &["purify-state", "--f", "0.9", "--q", "0.1", "--eps", "0.02", "--n", "3", "--trials", "20000", "--seed", "5"],
        &["purify-measurement", "--m", "4", "--k", "1", "--trials", "20000"],
        &["verify", &counts],
        &["sweep", "--eps-steps", "4"],
        &["cases"],
    ];
    for args in runs {
        let report = dir.path().join("report.json");
        let mut first = args.to_vec();
        first.extend(["--format", "json", "--output", report.to_str().unwrap()]);
        assert!(run(&first).status.success(), "{args:?}");
        let original: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
        let replayed = json(&["replay", report.to_str().unwrap()]);
        assert_eq!(original, replayed, "{args:?}");
    }
}

#[test]
fn seed_comes_from_environment() {
    let args = ["purify-state", "--n", "2", "--trials", "5000", "--format", "json"];
    let a = bin().args(args).env("SPAM_PURIFY_SEED", "77").output().unwrap();
    let b = bin().args(args).args(["--seed", "77"]).output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    let r: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(r["config"]["seed"], 77);
    let c = bin().args(args).env("SPAM_PURIFY_SEED", "78").output().unwrap();
    assert_ne!(a.stdout, c.stdout);
}
