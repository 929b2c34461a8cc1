use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use graphcert::bell::{cluster_inequality, evaluate};
use graphcert::{BellInequality, LocalObservable, MeasurementAssignment, QuantumState};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphcert"))
        .args(args)
        .output()
        .expect("spawn graphcert")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

/// Asserts the exit code and the single JSON error line on stderr.
fn expect_failure(out: &Output, code: i32, kind: &str) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("stderr line");
    let v: Value = serde_json::from_str(line).expect("stderr is JSON");
    assert_eq!(v["error"], kind, "{line}");
    assert!(v["message"].as_str().is_some_and(|m| !m.is_empty()));
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn certify_ideal_cluster_four_is_self_tested() {
    let v = stdout_json(&run(&["certify", "--family", "cluster", "--n", "4"]));
    assert_eq!(v["verdict"], "self-tested");
    assert_eq!(v["shots"], "exact");
    let beta = v["beta"]["value"].as_f64().unwrap();
    assert!((beta - (1.0 + 4.0 * std::f64::consts::SQRT_2)).abs() < 1e-9);
    assert_eq!(v["fidelity"]["value"].as_f64().unwrap(), 1.0);
    assert_eq!(v["bounds"]["beta_b"].as_f64().unwrap(), 5.828);
}

#[test]
fn noisy_ghz_four_shows_no_violation() {
    let v = stdout_json(&run(&[
        "certify",
        "--family",
        "ghz",
        "--n",
        "4",
        "--noise",
        "white:0.5",
    ]));
    assert_eq!(v["verdict"], "no-violation");
    assert!(v.get("statement").is_none_or(Value::is_null));
}

#[test]
fn sub_threshold_cluster_four_is_only_nonlocal() {
    let v = stdout_json(&run(&[
        "certify",
        "--family",
        "cluster",
        "--n",
        "4",
        "--noise",
        "white:0.828",
    ]));
    assert_eq!(v["verdict"], "nonlocal");
    assert!((v["beta"]["value"].as_f64().unwrap() - 5.512).abs() < 1e-3);
}

#[test]
fn seeded_runs_are_byte_identical() {
    let args = [
        "certify",
        "--family",
        "ghz",
        "--n",
        "3",
        "--noise",
        "depol:0.05",
        "--shots",
        "2000",
        "--seed",
        "99",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let other = run(&[
        "certify",
        "--family",
        "ghz",
        "--n",
        "3",
        "--noise",
        "depol:0.05",
        "--shots",
        "2000",
        "--seed",
        "100",
    ]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn output_file_gets_report_and_stdout_gets_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "certify",
        "--family",
        "ghz",
        "--n",
        "3",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.contains("verdict=self-tested"), "{summary}");
    let report: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["state_family"], "ghz");
}

#[test]
fn inequality_output_round_trips_through_the_library() {
    let v = stdout_json(&run(&["inequality", "--family", "cluster", "--n", "4"]));
    let b = BellInequality::from_json(&v["inequality"].to_string()).unwrap();
    let parties: Vec<[LocalObservable; 2]> = serde_json::from_value(v["settings"].clone()).unwrap();
    let m = MeasurementAssignment::new(parties);
    let (lib_b, lib_m) = cluster_inequality(4).unwrap();
    let s = QuantumState::cluster_linear(4)
        .unwrap()
        .white_noise(0.9)
        .unwrap();
    let cli = evaluate(&b, &m, &s).unwrap();
    let lib = evaluate(&lib_b, &lib_m, &s).unwrap();
    // printed floats carry 12 significant digits
    assert!((cli - lib).abs() < 1e-10, "{cli} vs {lib}");
    assert_eq!(b.terms().len(), lib_b.terms().len());
    assert!(!v["joint_settings"].as_array().unwrap().is_empty());
}

#[test]
fn sweep_csv_reports_the_crossing() {
    let out = run(&[
        "sweep",
        "--family",
        "ghz",
        "--n",
        "3",
        "--noise",
        "white",
        "--grid",
        "0.8:0.9:3",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("parameter,fidelity,fidelity_err,beta,beta_err,verdict")
    );
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(rows.len(), 3);
    let crossing = text
        .lines()
        .find(|l| l.starts_with("# crossing beta_b"))
        .expect("crossing line");
    let param: f64 = crossing
        .split_whitespace()
        .find_map(|w| w.strip_prefix("parameter="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((param - 4.828 / (4.0 * std::f64::consts::SQRT_2)).abs() < 1e-6);
}

#[test]
fn bounds_brute_force_agrees_for_graph_file() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "star.txt", "5; 1-2 1-3 1-4 1-5");
    let out = run(&["bounds", "--graph", &g, "--brute-force"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("beta_c 8"), "{text}");
    assert!(text.trim_end().ends_with("AGREE"), "{text}");
}

#[test]
fn sample_counts_sum_to_shots() {
    let v = stdout_json(&run(&[
        "sample", "--family", "ghz", "--n", "3", "--shots", "500", "--seed", "4",
    ]));
    let settings = v["settings"].as_array().unwrap();
    assert!(!settings.is_empty());
    for s in settings {
        let total: u64 = s["counts"]
            .as_object()
            .unwrap()
            .values()
            .map(|c| c.as_u64().unwrap())
            .sum();
        assert_eq!(total, 500);
    }
}

#[test]
fn fidelity_matches_white_noise_closed_form() {
    let v = stdout_json(&run(&[
        "fidelity",
        "--family",
        "ghz",
        "--n",
        "3",
        "--noise",
        "white:0.5",
    ]));
    assert!((v["fidelity"]["value"].as_f64().unwrap() - (0.5 + 0.5 / 8.0)).abs() < 1e-12);
}

#[test]
fn config_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"family": "ghz", "n": 4, "noise": "white:0.5"}"#,
    );
    let v = stdout_json(&run(&["certify", "--config", &cfg]));
    assert_eq!(v["n"], 4);
    assert_eq!(v["verdict"], "no-violation");
    let v = stdout_json(&run(&["certify", "--config", &cfg, "--noise", "none"]));
    assert_eq!(v["verdict"], "self-tested");
    let v = stdout_json(&run(&[
        "certify", "--config", &cfg, "--family", "cluster", "--n", "3",
    ]));
    assert_eq!(v["state_family"], "linear-cluster");
}

#[test]
fn usage_errors_exit_two() {
    expect_failure(
        &run(&["inequality", "--family", "ghz", "--n", "1"]),
        2,
        "usage",
    );
    expect_failure(
        &run(&["certify", "--family", "ghz", "--n", "3", "--shots", "10"]),
        2,
        "usage",
    );
    expect_failure(
        &run(&[
            "certify",
            "--family",
            "ghz",
            "--n",
            "3",
            "--noise",
            "white:1.5",
        ]),
        2,
        "usage",
    );
    expect_failure(
        &run(&[
            "sweep", "--family", "ghz", "--n", "3", "--noise", "white", "--grid", "0:1:0",
        ]),
        2,
        "usage",
    );
    expect_failure(
        &run(&["certify", "--family", "cluster", "--n", "5"]),
        2,
        "usage",
    );
    expect_failure(
        &run(&["bounds", "--family", "ghz", "--n", "12", "--brute-force"]),
        2,
        "usage",
    );
    expect_failure(&run(&["frobnicate"]), 2, "usage");
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{"family": "ghz", "n": 3, "bogus": 1}"#,
    );
    expect_failure(&run(&["certify", "--config", &cfg]), 2, "usage");
}

#[test]
fn domain_and_io_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let disconnected = write(dir.path(), "g.txt", "3; 1-2");
    expect_failure(&run(&["bounds", "--graph", &disconnected]), 3, "domain");
    let missing = dir.path().join("missing.txt");
    expect_failure(
        &run(&["certify", "--graph", missing.to_str().unwrap()]),
        3,
        "io",
    );
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("certify"));
}
