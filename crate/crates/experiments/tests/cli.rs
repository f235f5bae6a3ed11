use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kirchhoff"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn report(dir: &Path, command: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{command}.json"))).unwrap()).unwrap()
}

#[test]
fn zero_sample_verify_passes_with_an_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"verify": {"samples": 0, "inequality_samples": 0, "xplus_samples": 0, "small_divisor_radius": 0}}"#,
    );
    let out = run(&["verify", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "verify");
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["command"], "verify");
    assert_eq!(r["pass"], true);
    assert_eq!(r["result"]["suites"].as_array().unwrap().len(), 0);
    assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);
    assert!(r["build_id"].as_str().unwrap().starts_with("0.1.0-"));
}

#[test]
fn corrupted_a12_sign_fails_the_homological_suite() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"verify": {"grids": [[1, 4]], "samples": 20, "inequality_samples": 0, "xplus_samples": 0, "small_divisor_radius": 0}}"#,
    );
    let out_dir = dir.path().to_str().unwrap();
    let clean = run(&["verify", "--config", &cfg, "--out", out_dir]);
    assert_eq!(clean.status.code(), Some(0), "{}", String::from_utf8_lossy(&clean.stderr));
    let out = run(&["verify", "--config", &cfg, "--out", out_dir, "--corrupt-a12-sign"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("homological_residual[d=1,N=4]"), "{stderr}");
    let r = report(dir.path(), "verify");
    assert_eq!(r["pass"], false);
    let suites = r["result"]["suites"].as_array().unwrap();
    let homological = suites.iter().find(|s| s["suite"] == "homological_residual").unwrap();
    assert_eq!(homological["pass"], false);
    // the corrupted coefficient only enters through the normal-form map
    let phi1 = suites.iter().find(|s| s["suite"] == "phi1_phi2_round_trip").unwrap();
    assert_eq!(phi1["pass"], true);
}

#[test]
fn config_errors_exit_with_code_two_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"sweep": {"c1_op": -1.0}}"#);
    let out = run(&["sweep", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sweep.c1_op"));

    let cfg = write_config(dir.path(), r#"{"integrator": {"tolerance": 1}}"#);
    let out = run(&["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tolerance"));

    let out = run(&["simulate", "--d", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["simulate", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flags_override_the_json_document() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"seed": 11, "eps": 0.02, "integrator": {"t_end": 5.0}}"#);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(run(&["simulate", "--config", &cfg, "--out", a.to_str().unwrap(), "--t-end", "0"]).status.success());
    assert!(run(&["simulate", "--config", &cfg, "--out", b.to_str().unwrap(), "--t-end", "0", "--seed", "12"])
        .status
        .success());
    let (ra, rb) = (report(&a, "simulate"), report(&b, "simulate"));
    assert_ne!(ra["config_hash"], rb["config_hash"]);
    assert_eq!(ra["result"]["t_end"], 0.0);
    let h = |r: &Value| r["result"]["hamiltonian_initial"].as_f64().unwrap();
    assert_ne!(h(&ra), h(&rb));
}

#[test]
fn simulate_with_zero_time_writes_only_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["simulate", "--t-end", "0", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert!(!dir.path().join("trajectory.csv").exists());
    let r = report(dir.path(), "simulate");
    assert_eq!(r["result"]["samples"], 1);
    assert_eq!(r["result"]["hamiltonian_drift"], 0.0);
    assert!(r["result"]["csv"].is_null());
}

#[test]
fn simulate_is_deterministic_and_writes_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let args = |o: &str| vec!["simulate".to_string(), "--t-end".into(), "2".into(), "--out".into(), o.to_string()];
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let a: Vec<String> = args(d.to_str().unwrap());
        assert!(bin().args(&a).output().unwrap().status.success());
    }
    let ca = std::fs::read(a.join("trajectory.csv")).unwrap();
    assert_eq!(ca, std::fs::read(b.join("trajectory.csv")).unwrap());
    assert!(!ca.contains(&b'\r'));
    let text = String::from_utf8(ca).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header[..2], ["t", "hamiltonian"]);
    assert!(header.contains(&"M_-8_ax0") && header.contains(&"M_8_ax0"));
    for col in ["norm_s1", "norm_s3", "phys_s2", "ed_s1", "script_p"] {
        assert!(header.contains(&col), "{col}");
    }
    assert_eq!(text.lines().count(), 1 + 21);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row.len(), header.len());
    assert!(row[1].contains('e') && row[1].split('e').next().unwrap().len() == 18);
}

#[test]
fn representations_describe_the_same_motion() {
    let dir = tempfile::tempdir().unwrap();
    let mut phys = Vec::new();
    for rep in ["original", "syst6dic", "xplus"] {
        let out_dir = dir.path().join(rep);
        let out = run(&["simulate", "--representation", rep, "--t-end", "3", "--out", out_dir.to_str().unwrap()]);
        assert!(out.status.success(), "{rep}: {}", String::from_utf8_lossy(&out.stderr));
        let r = report(&out_dir, "simulate");
        assert_eq!(r["result"]["representation"], rep);
        assert!(r["result"]["hamiltonian_drift"].as_f64().unwrap() < 1e-10);
        assert_eq!(r["result"]["s_independent"], true);
        let csv = std::fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
        let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        phys.push(last);
    }
    for other in &phys[1..] {
        for (a, b) in phys[0].iter().zip(other) {
            assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }
}

#[test]
fn conjugacy_of_zero_data_has_zero_defect() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["conjugacy", "--eps", "0", "--t-end", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path(), "conjugacy");
    assert_eq!(r["result"]["defect"], 0.0);
    assert_eq!(r["result"]["status"], "pass");
}

#[test]
fn conjugacy_outside_the_ball_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["conjugacy", "--eps", "0.3", "--t-end", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("inconclusive"));
    let r = report(dir.path(), "conjugacy");
    assert_eq!(r["result"]["status"], "inconclusive");
    assert!(r["result"]["note"].as_str().unwrap().contains("δ₀"));
}

#[test]
fn sweep_with_a_tiny_cap_gives_a_stable_at_cap_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"sweep": {"eps_list": [0.1], "t_cap": 0.5}}"#);
    let out = run(&["sweep", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "eps,seed,t_target,t_run,achieved_time,exit,max_physical,physical_ratio,max_norm_ratio,c_star,pass"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[5], "stable_at_cap");
    assert_eq!(row[4].parse::<f64>().unwrap(), 0.5);
    assert!(lines.next().is_none());
}

#[test]
fn sweep_rows_are_sorted_by_decreasing_eps() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"sweep": {"eps_list": [0.05, 0.2, 0.1], "t_cap": 1.0, "seeds_per_eps": 2}}"#);
    let out = run(&["sweep", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let r = report(dir.path(), "sweep");
    let eps: Vec<f64> = r["result"]["rows"].as_array().unwrap().iter().map(|x| x["eps"].as_f64().unwrap()).collect();
    assert_eq!(eps, vec![0.2, 0.2, 0.1, 0.1, 0.05, 0.05]);
    assert!(r["result"]["exponent"].is_number() && r["result"]["exponent_residual"].is_number());
}

#[test]
fn help_documents_csv_columns_and_exit_codes() {
    let out = run(&["--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for needle in ["trajectory.csv", "sweep.csv", "M_<j>_ax<a>", "Exit codes", "verify", "conjugacy"] {
        assert!(text.contains(needle), "{needle}");
    }
    let sub = String::from_utf8_lossy(&run(&["simulate", "--help"]).stdout).to_string();
    for flag in ["--config", "--out", "--seed", "--d", "--n-modes", "--eps", "--t-end", "--representation"] {
        assert!(sub.contains(flag), "{flag}");
    }
    assert!(!sub.contains("corrupt"));
}
