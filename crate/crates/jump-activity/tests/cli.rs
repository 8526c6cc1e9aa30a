use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use jump_activity::cli::{all_flags, help_text};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_jump-activity"));
    c.env_remove("JUMP_ACTIVITY_OUTPUT_DIR");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin()
        .args([
            "--output-dir",
            dir.to_str().unwrap(),
            "--date",
            "2026-03-09",
        ])
        .args(args)
        .output()
        .unwrap()
}

fn simulate(dir: &Path, extra: &[&str]) {
    let out = run(
        dir,
        &[
            &[
                "--seed",
                "7",
                "simulate",
                "--days",
                "2",
                "--delta-seconds",
                "5",
            ],
            extra,
        ]
        .concat(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn every_flag_is_documented() {
    let flags = all_flags();
    assert!(flags.len() > 40);
    for (sub, long, help) in flags {
        let help = help.unwrap_or_default();
        assert!(
            !help.trim().is_empty(),
            "--{long} of '{sub}' has no help text"
        );
        let text = help_text(if sub.is_empty() { None } else { Some(&sub) });
        assert!(
            text.contains(&format!("--{long}")),
            "--{long} missing from '{sub}' help"
        );
    }
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
    assert_eq!(
        bin().args(["mc", "--help"]).output().unwrap().status.code(),
        Some(0)
    );
    assert_eq!(
        bin().arg("nonsense").output().unwrap().status.code(),
        Some(3)
    );
    assert_eq!(
        bin()
            .args(["mc", "--scenario", "sideways"])
            .output()
            .unwrap()
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn missing_input_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["test-fa", "--input", "/no/such/file.csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not found"));
}

#[test]
fn decided_and_degenerate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &["--constant-volatility"]);
    let input = dir.path().join("simulated_path_20260309.csv");
    let input = input.to_str().unwrap();

    let out = run(dir.path(), &["test-fa", "--input", input, "--alpha", "8"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("finite-activity limit"), "{stdout}");
    let csv =
        fs::read_to_string(dir.path().join("simulated_path_20260309_s_n_20260309.csv")).unwrap();
    assert!(csv.starts_with("source,alpha,test,outcome,"));

    // a cutoff far below any increment leaves nothing to sum
    let out = run(
        dir.path(),
        &["test-ia", "--input", input, "--alpha", "1e-9"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn same_seed_same_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "--seed",
        "3",
        "mc",
        "--scenario",
        "fa_null",
        "--replicates",
        "8",
        "--alpha",
        "8",
        "--alpha",
        "10",
        "--delta-seconds",
        "30",
    ];
    for dir in [a.path(), b.path()] {
        let out = run(dir, &args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    simulate(a.path(), &["--jumps", "stable"]);
    simulate(b.path(), &["--jumps", "stable"]);
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 4, "{names:?}");
    for name in names {
        let x = fs::read(a.path().join(&name)).unwrap();
        let y = fs::read(b.path().join(&name)).unwrap();
        assert_eq!(x, y, "{name:?} differs");
    }
}

#[test]
fn flag_overrides_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "seed = 1\n[simulation]\nhorizon = 3\n").unwrap();
    let out = bin()
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "--output-dir",
            dir.path().to_str().unwrap(),
        ])
        .args([
            "--date",
            "2026-03-09",
            "simulate",
            "--days",
            "1",
            "--delta-seconds",
            "60",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.starts_with("simulated 1 day(s), 391 observations"),
        "{stdout}"
    );
    assert!(stdout.contains("seed 1"));
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .env("JUMP_ACTIVITY_OUTPUT_DIR", dir.path())
        .args(["--date", "2026-03-09", "moments"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("moments_p4-k2_20260309.csv").is_file());
}

#[test]
fn moments_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["moments", "--p", "4", "--k", "2"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("m_p    = 3.0000000000000000e0"), "{stdout}");
    assert!(stdout.contains("m_2p   = 1.0500000000000000e2"), "{stdout}");
    let csv = fs::read_to_string(dir.path().join("moments_p4-k2_20260309.csv")).unwrap();
    let row: Vec<f64> = csv
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(row[1], 2.0);
    assert!((row[4] - 204.0).abs() < 1e-10);
    assert!((row[5] - 32.0 / 7.0).abs() < 1e-10);
}
