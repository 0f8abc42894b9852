use std::process::{Command, Output};

use holonoise_cli::config::{ExperimentFlags, SEED_ENV};
use holonoise_cli::record::{read_csv, read_jsonl, write_records, Format, CSV_HEADER};
use holonoise_cli::sweep::{SweepAxis, SweepSpec};
use holonoise_cli::{run_sweep, simulate};

fn holonoise(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holonoise"))
        .args(args)
        .env_remove(SEED_ENV)
        .output()
        .expect("binary runs")
}

fn small_config() -> holonoise::ExperimentConfig {
    ExperimentFlags { n: Some(500), sigma_x: Some(1e-3), seed: Some(3), ..Default::default() }
        .resolve_with_env(None)
        .unwrap()
}

#[test]
fn csv_round_trip() {
    let base = small_config();
    let spec = SweepSpec::new(SweepAxis::GammaX, vec![1.0, 5.0], base).unwrap();
    let records = run_sweep(&spec, 1).unwrap();
    let mut buf = Vec::new();
    write_records(&mut buf, &records, Format::Csv).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    let rows = read_csv(buf.as_slice()).unwrap();
    assert_eq!(rows.len(), 2);
    for (row, rec) in rows.iter().zip(&records) {
        assert_eq!(*row, rec.csv_row());
    }
    assert_eq!(rows[1].gamma_x, 5.0);
}

#[test]
fn jsonl_round_trip() {
    let rec = simulate(&small_config(), 1).unwrap();
    let mut buf = Vec::new();
    write_records(&mut buf, std::slice::from_ref(&rec), Format::Jsonl).unwrap();
    let back = read_jsonl(buf.as_slice()).unwrap();
    assert_eq!(back, vec![rec]);
}

#[test]
fn simulate_is_deterministic_across_thread_counts() {
    let cfg = small_config();
    let a = simulate(&cfg, 1).unwrap();
    let b = simulate(&cfg, 3).unwrap();
    assert_eq!(a.result, b.result);
    assert_eq!(a.comparison, b.comparison);
}

#[test]
fn verify_exit_codes() {
    let ok = holonoise(&["verify"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("0 failed"));
    let bad = holonoise(&["verify", "--corrupt-orientation"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("[FAIL]"));
}

#[test]
fn short_x_loop_is_a_config_error() {
    let out = holonoise(&["simulate", "--lx", "0.7", "--n", "10"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("l_x") && err.contains("pi/4"), "{err}");
}

#[test]
fn empty_sweep_is_a_usage_error() {
    let out = holonoise(&["sweep", "--axis", "sigma_x", "--values", ""]);
    assert_eq!(out.status.code(), Some(2));
    let out = holonoise(&["sweep", "--axis", "sigma_x"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seed_from_environment_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "n = 50\nsigma_x = 1e-3\n").unwrap();
    let out_a = dir.path().join("a.jsonl");
    let status = Command::new(env!("CARGO_BIN_EXE_holonoise"))
        .args(["simulate", "--config", cfg.to_str().unwrap(), "--out", out_a.to_str().unwrap()])
        .env(SEED_ENV, "1234")
        .status()
        .unwrap();
    assert!(status.success());
    let recs = read_jsonl(std::fs::File::open(&out_a).unwrap()).unwrap();
    assert_eq!(recs[0].seed, 1234);
    assert_eq!(recs[0].config.n_realizations, 50);
    assert_eq!(recs[0].config.ou_x.sigma(), 1e-3);
}

#[test]
fn sweep_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let status = holonoise(&[
        "sweep", "--axis", "l_x", "--range", "1:2:3", "--n", "100", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(0), "{}", String::from_utf8_lossy(&status.stderr));
    let rows = read_csv(std::fs::File::open(&out).unwrap()).unwrap();
    let lx: Vec<f64> = rows.iter().map(|r| r.l_x).collect();
    assert_eq!(lx, vec![1.0, 1.5, 2.0]);
}
