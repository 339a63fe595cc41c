use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_annealed-ising"));
    c.env_remove("ANNEALED_ISING_CACHE");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn gtable_writes_then_hits_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let out = run(&["gtable", "--d", "3", "--n", "100", "--beta", "bc", "--cache-dir", cache]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("miss "));

    let file = fs::read_dir(dir.path()).unwrap().next().unwrap().unwrap().path();
    let text = fs::read_to_string(&file).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("gtable v1 d=3 n=100 beta=5.49306144334054"));
    let values: Vec<f64> = lines.map(|l| num(l.split_once(' ').unwrap().1)).collect();
    assert_eq!(values.len(), 101);
    assert_eq!(values[0], 0.0);
    assert_eq!(values[100], 0.0);
    let before = fs::metadata(&file).unwrap().modified().unwrap();

    let out = run(&["gtable", "--d", "3", "--n", "100", "--beta", "bc", "--cache-dir", cache]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("hit "));
    assert_eq!(fs::metadata(&file).unwrap().modified().unwrap(), before);
}

#[test]
fn environment_overrides_cache_flag() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let out = bin()
        .env("ANNEALED_ISING_CACHE", env_dir.path())
        .args(["gtable", "--d", "4", "--n", "10", "--beta", "0.3", "--cache-dir"])
        .arg(flag_dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read_dir(env_dir.path()).unwrap().count(), 1);
    assert_eq!(fs::read_dir(flag_dir.path()).unwrap().count(), 0);
}

#[test]
fn odd_half_edge_count_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["gtable", "--d", "3", "--n", "33", "--beta", "0.5", "--cache-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("odd"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["thermo", "--d", "3", "--B", "0"]).status.code(), Some(2));
    assert_eq!(run(&["thermo", "--beta", "bc", "--B", "0"]).status.code(), Some(2));
    assert_eq!(run(&["finite", "--d", "3", "--n", "9000", "--beta", "0.1", "--B", "0"]).status.code(), Some(2));
}

#[test]
fn thermo_scan_at_infinite_temperature() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    let status = bin().args(["thermo", "--d", "3", "--beta", "0", "--B", "0", "--out"]).arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("beta,B,psi,M,chi,C,t_hat,error\n"));
    let row = &csv_rows(&out)[0];
    assert!((num(&row[2]) - 2f64.ln()).abs() < 1e-15);
    assert_eq!(num(&row[3]), 0.0);
    assert!((num(&row[4]) - 1.0).abs() < 1e-14);
}

#[test]
fn thermo_scan_across_critical_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    let status = bin()
        .args(["thermo", "--d", "3", "--beta-range", "bc-0.01:bc+0.01:21", "--B", "0", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 21);
    // the midpoint is β_c itself: χ infinite, C undefined
    assert_eq!(rows[10][4], "inf");
    assert_eq!(rows[10][5], "");
    let chi: Vec<f64> = rows.iter().map(|r| num(&r[4])).collect();
    assert!(chi[..10].windows(2).all(|w| w[1] > w[0]));
    assert!(chi[11..].windows(2).all(|w| w[1] < w[0]));
    let c_below = num(&rows[9][5]);
    let c_above = num(&rows[11][5]);
    assert!(c_above - c_below > 5.0);
    assert!(rows[..10].iter().all(|r| num(&r[3]) == 0.0));
    assert!(rows[11..].iter().all(|r| num(&r[3]) > 0.0));
}

#[test]
fn thermo_rows_report_errors_and_continue() {
    let out = run(&["thermo", "--d", "3", "--beta", "0.4", "--B-range", "-0.1:0.1:3", "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows[0]["error"].is_string());
    assert!(rows[1]["error"].is_null());
    assert!(rows[2]["M"].as_f64().unwrap() > 0.0);
}

#[test]
fn magnetization_increases_along_field_range() {
    let out = run(&["thermo", "--d", "4", "--beta", "0.2", "--B-range", "0.01:1:12", "--spacing", "geometric"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let m: Vec<f64> = text.lines().skip(1).map(|l| num(l.split(',').nth(3).unwrap())).collect();
    assert_eq!(m.len(), 12);
    assert!(m.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn finite_and_spinlaw_emitters() {
    let out = run(&["finite", "--d", "3", "--n-list", "50,100", "--beta", "0", "--B", "0.3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,beta,B,psi_n,M_n,chi_n"));
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        assert!((num(f[3]) - (2.0 * 0.3f64.cosh()).ln()).abs() < 1e-12);
        assert!((num(f[4]) - 0.3f64.tanh()).abs() < 1e-12);
    }

    let out = run(&["spinlaw", "--d", "3", "--n", "40", "--beta", "bc"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("j,s,prob\n"));
    let probs: Vec<f64> = text.lines().skip(1).map(|l| num(l.split(',').nth(2).unwrap())).collect();
    assert_eq!(probs.len(), 41);
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn verify_exit_codes_follow_results() {
    let out = run(&["verify", "--suite", "taylor"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["suite"], "taylor");
    assert_eq!(report["reports"].as_array().unwrap().len(), 3);
    assert_eq!(report["pass"], true);

    let out = run(&["verify", "--suite", "finiten"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn verify_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (path, threads) in [(&a, "1"), (&b, "3")] {
        bin()
            .args(["verify", "--suite", "matching", "--seed", "42", "--threads", threads, "--out"])
            .arg(path)
            .status()
            .unwrap();
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}
