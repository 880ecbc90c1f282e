use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const GOLDEN: &str = include_str!("golden/dispersion_reference.csv");

fn reference_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.toml")
}

fn rti(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rti"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn error_record(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("an error record");
    serde_json::from_str(line).expect("machine-readable error")
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn dispersion_matches_the_golden_file() {
    let dir = TempDir::new().unwrap();
    let cfg = reference_config();
    let out = rti(&["--config", cfg.to_str().unwrap(), "dispersion"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let got = fs::read_to_string(dir.path().join("dispersion.csv")).unwrap();
    assert_eq!(got.lines().next(), GOLDEN.lines().next());
    let (got, want) = (rows(&got), rows(GOLDEN));
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        assert_eq!(g[0], w[0]);
        assert_eq!(g[6], w[6]);
        for c in 1..6 {
            match (g[c].parse::<f64>(), w[c].parse::<f64>()) {
                (Ok(a), Ok(b)) if c == 4 || c == 5 => assert!(a <= 1e-8 && b <= 1e-8),
                (Ok(a), Ok(b)) => assert!((a - b).abs() <= 1e-9 * b.abs(), "row {} col {c}", g[0]),
                _ => assert_eq!(g[c], w[c]),
            }
        }
    }
}

#[test]
fn golden_sweep_is_ordered_and_unstable_past_ten() {
    let xs: Vec<f64> = rows(GOLDEN).iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(xs.windows(2).all(|w| w[1] > w[0]));
    for r in rows(GOLDEN) {
        if r[0].parse::<f64>().unwrap() > 10.0 {
            assert_eq!(r[6], "unstable");
        }
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [&a, &b] {
        assert!(rti(&["dispersion", "--steps", "12"], dir.path()).status.success());
    }
    assert_eq!(
        fs::read(a.path().join("dispersion.csv")).unwrap(),
        fs::read(b.path().join("dispersion.csv")).unwrap()
    );
}

#[test]
fn thread_count_does_not_change_results() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let run = |dir: &Path, threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_rti"))
            .env("RTI_THREADS", threads)
            .args(["dispersion", "--steps", "12", "--out"])
            .arg(dir)
            .output()
            .unwrap();
        assert!(out.status.success());
        fs::read(dir.join("dispersion.csv")).unwrap()
    };
    assert_eq!(run(a.path(), "1"), run(b.path(), "4"));
}

#[test]
fn unknown_subcommand_prints_usage() {
    let dir = TempDir::new().unwrap();
    let out = rti(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn invalid_values_are_all_reported() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[fluid]\ndepth = -1.0\nomega = -2.0\n").unwrap();
    let out = rti(&["--config", cfg.to_str().unwrap(), "equilibrium"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let rec = error_record(&out);
    assert_eq!(rec["error"], "validation");
    let v: Vec<&str> = rec["violations"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(v.contains(&"m must be positive"));
    assert_eq!(v.len(), 2);
}

#[test]
fn syntax_errors_carry_a_position() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("broken.toml");
    fs::write(&cfg, "[grid]\nn_elements = = 4\n").unwrap();
    let out = rti(&["--config", cfg.to_str().unwrap(), "dispersion"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let rec = error_record(&out);
    assert_eq!(rec["error"], "parse");
    assert_eq!(rec["line"], 2);
}

#[test]
fn identical_laws_are_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("same.toml");
    fs::write(&cfg, "[fluid]\nupper_stiffness = 2.0\n").unwrap();
    let out = rti(&["--config", cfg.to_str().unwrap(), "equilibrium"], dir.path());
    assert!(!out.status.success());
    assert!(error_record(&out).to_string().contains("pressure laws must be distinct"));
}

#[test]
fn run_meta_echoes_the_normalized_config() {
    let dir = TempDir::new().unwrap();
    let cfg = reference_config();
    assert!(rti(&["--config", cfg.to_str().unwrap(), "equilibrium"], dir.path()).status.success());
    let meta: Value = serde_json::from_slice(&fs::read(dir.path().join("run_meta.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "equilibrium");
    assert_eq!(meta["config"]["fluid"]["omega"], 1.0);
    assert_eq!(meta["config"]["grid"]["n_elements"], 128);
    assert_eq!(meta["config_hash"].as_str().unwrap().len(), 64);
    assert!(meta["artifacts"].as_array().unwrap().iter().any(|a| a == "equilibrium.csv"));
    assert!(meta["timings"]["wall_seconds"].is_number());
}

#[test]
fn hash_tracks_meaningful_fields_only() {
    let hash = |text: &str, out: &str| {
        let dir = TempDir::new().unwrap();
        let cfg = dir.path().join("c.toml");
        fs::write(&cfg, text).unwrap();
        let run_dir = dir.path().join(out);
        assert!(rti(&["--config", cfg.to_str().unwrap(), "equilibrium"], &run_dir).status.success());
        let meta: Value = serde_json::from_slice(&fs::read(run_dir.join("run_meta.json")).unwrap()).unwrap();
        meta["config_hash"].as_str().unwrap().to_owned()
    };
    let base = hash("[fluid]\nomega = 1.0\n", "a");
    assert_eq!(base, hash("[fluid]\nomega = 1.0\n", "b"));
    assert_eq!(base, hash("", "c"));
    assert_ne!(base, hash("[fluid]\nomega = 0.5\n", "a"));
}

#[test]
fn json_output_uses_numbers() {
    let dir = TempDir::new().unwrap();
    assert!(rti(&["--format", "json", "dispersion", "--steps", "3", "--xi-min", "20", "--xi-max", "40"], dir.path())
        .status
        .success());
    let v: Value = serde_json::from_slice(&fs::read(dir.path().join("dispersion.json")).unwrap()).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["xi"], 20.0);
    assert!(rows[2]["lambda"].as_f64().unwrap() > rows[0]["lambda"].as_f64().unwrap());
}

#[test]
fn verify_reports_a_full_suite() {
    let dir = TempDir::new().unwrap();
    let out = rti(&["verify"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("verify.csv")).unwrap();
    let checks = rows(&csv);
    assert!(checks.len() >= 25);
    assert!(checks.iter().all(|r| r.last().unwrap() == "true"));
}

#[test]
fn every_subcommand_writes_its_artifacts() {
    let dir = TempDir::new().unwrap();
    let cases: [(&[&str], &[&str]); 5] = [
        (&["equilibrium"], &["equilibrium.csv", "equilibrium_summary.json"]),
        (&["mode", "--xi1", "12", "--xi2", "16"], &["mode.json"]),
        (&["synth", "--nr", "8", "--ntheta", "4"], &["synth.csv"]),
        (&["evolve", "--T", "0.2"], &["evolve.csv", "evolve_fit.json"]),
        (&["illposed", "--nmax", "1"], &["illposed.csv"]),
    ];
    for (args, files) in cases {
        let sub = dir.path().join(args[0]);
        let out = rti(args, &sub);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        for f in files.iter().chain(&["run_meta.json"]) {
            assert!(sub.join(f).is_file(), "{args:?} missing {f}");
        }
    }
}
