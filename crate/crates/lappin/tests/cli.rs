//! Contract tests for the `lappin` binary: exit codes, config merging, and
//! artifact shape.  Everything here drives the compiled binary through its
//! public interface; no internals are linked.

use std::path::PathBuf;
use std::process::{Command, Output};

use laplacian_pinning::partition::parse_golden_csv;

fn lappin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lappin"))
        .args(args)
        .output()
        .expect("spawn lappin")
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("lappin-cli-{}-{name}", std::process::id()))
}

#[test]
fn help_and_version_exit_zero() {
    let out = lappin(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("lappin"));
    for cmd in [
        "det-verify",
        "partition",
        "renewal",
        "pinning",
        "free-energy",
        "phase",
        "fm-certify",
        "selftest",
    ] {
        let out = lappin(&[cmd, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{cmd} --help");
    }
    let out = lappin(&["--version"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn malformed_flag_exits_one() {
    let out = lappin(&["partition", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());

    let out = lappin(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_config_key_exits_one() {
    let cfg = tmp("unknown-key.json");
    std::fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    let out = lappin(&["partition", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

#[test]
fn out_of_range_size_exits_one() {
    let out = lappin(&["partition", "--n", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_seed_exits_one() {
    let out = lappin(&["free-energy", "--beta", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn undersized_window_exits_two() {
    // A half-width of 1 cannot hold the annealed excursion mass, so the
    // grid audit must refuse rather than return a biased value.
    let out = lappin(&["free-energy", "--beta", "0", "--radius", "1.0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn flag_overrides_config_file() {
    let cfg = tmp("merge.json");
    std::fs::write(&cfg, r#"{"beta": 0.75, "eps": 1.25}"#).unwrap();
    let out = lappin(&[
        "partition",
        "--config",
        cfg.to_str().unwrap(),
        "--beta",
        "0",
        "--n",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let first = text.lines().next().unwrap();
    let echo: serde_json::Value =
        serde_json::from_str(first.strip_prefix("# lappin ").expect("config echo")).unwrap();
    assert_eq!(echo["params"]["beta"], 0.0, "flag beats file");
    assert_eq!(echo["params"]["eps"], 1.25, "file beats default");
    assert_eq!(echo["params"]["n"], 5);
    let rows = parse_golden_csv(&text).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.eps == 1.25 && r.beta == 0.0));
}

#[test]
fn partition_artifact_round_trips() {
    let out = lappin(&["partition", "--n", "8", "--eps", "1.3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# lappin "));
    let rows = parse_golden_csv(&text).unwrap();
    assert_eq!(rows.len(), 7, "one row per size 2..=8");
    // Weight-free rows carry the no-double-return column.
    assert!(rows.iter().all(|r| r.log_no_double.is_some()));
    assert!(rows.iter().all(|r| r.log_z.is_finite() && r.log_adjusted.is_finite()));
}

#[test]
fn renewal_curve_rows_and_phase_boundary() {
    let out = lappin(&["renewal", "--eps-grid", "0.5:2.0:50", "--nmax", "14"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let data: Vec<(f64, f64)> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("eps,"))
        .map(|l| {
            let mut it = l.split(',');
            (
                it.next().unwrap().parse().unwrap(),
                it.next().unwrap().parse().unwrap(),
            )
        })
        .collect();
    assert_eq!(data.len(), 50, "one row per grid point");
    for &(eps, f) in &data {
        if eps < 1.0 {
            assert_eq!(f, 0.0, "delocalized at eps {eps}");
        }
        if eps > 1.1 {
            assert!(f > 0.0, "localized at eps {eps}");
        }
    }
    let eps_c_line = text
        .lines()
        .find(|l| l.starts_with("# eps_c "))
        .expect("eps_c comment");
    let eps_c: f64 = eps_c_line.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((eps_c - 1.05).abs() < 0.01);
}

#[test]
fn json_artifact_parses() {
    let out = lappin(&[
        "free-energy",
        "--beta",
        "0",
        "--eps",
        "1.5",
        "--g",
        "128",
        "--lmax",
        "30",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["command"], "free-energy");
    assert_eq!(v["config"]["params"]["beta"], 0.0);
    let estimates = v["estimates"].as_array().unwrap();
    assert_eq!(estimates.len(), 1, "no quenched estimate without disorder");
    assert!(estimates[0]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn stdout_matches_file_artifact() {
    let path = tmp("stdout-vs-file.csv");
    let piped = lappin(&["partition", "--n", "6"]);
    assert_eq!(piped.status.code(), Some(0));
    let filed = lappin(&["partition", "--n", "6", "--out", path.to_str().unwrap()]);
    assert_eq!(filed.status.code(), Some(0));
    assert!(filed.stdout.is_empty(), "--out suppresses stdout");
    assert_eq!(std::fs::read(&path).unwrap(), piped.stdout);
}
