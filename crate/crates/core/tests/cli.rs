use std::path::Path;
use std::process::{Command, Output};

use irs_owc::config::{load_config, ConfigDocument};
use irs_owc::network::build_default_scenario;

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irs-owc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn small_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("small.json");
    std::fs::write(
        &path,
        r#"{"sweep": {"snr_db": [65, 95, 125], "k_values": [1, 2, 3], "drops": 2}}"#,
    )
    .unwrap();
    path
}

#[test]
fn sweep_snr_writes_table_plot_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let o = run(
        &["sweep-snr", "--config", cfg.to_str().unwrap()],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("fig2.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "sweep_var,variant,sum_rate_bps,user_rates_bps");
    assert_eq!(lines.len(), 1 + 3 * 3);
    for v in ["10x10", "5x5", "none"] {
        assert_eq!(
            lines
                .iter()
                .filter(|l| l.split(',').nth(1) == Some(v))
                .count(),
            3
        );
    }
    assert!(std::fs::read_to_string(dir.path().join("fig2.svg"))
        .unwrap()
        .starts_with("<svg"));
    assert!(String::from_utf8_lossy(&o.stdout).contains("mid-sweep 95 dB"));

    // the effective config reproduces the scenario
    let (a, sweep) = load_config(dir.path().join("effective_config.json")).unwrap();
    let b = build_default_scenario(
        &ConfigDocument::from_json(&std::fs::read_to_string(&cfg).unwrap()).unwrap(),
    )
    .unwrap();
    assert_eq!(a, b);
    assert_eq!(sweep.snr_db, vec![65.0, 95.0, 125.0]);
}

#[test]
fn sweep_users_has_two_variants() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["sweep-users"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("fig3.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 8);
    assert!(dir.path().join("fig3.svg").exists());
}

#[test]
fn simulate_and_variant_flag() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["simulate", "--variant", "10x10", "--seed", "3"],
        dir.path(),
    );
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("simulate.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("0.01,10x10,"));
    let eff = std::fs::read_to_string(dir.path().join("effective_config.json")).unwrap();
    assert_eq!(ConfigDocument::from_json(&eff).unwrap().users.seed, 3);
}

#[test]
fn selftest_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["selftest"], dir.path());
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("0 failed"));
    assert!(!stdout.contains("FAIL "));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"noise": {"bandwidth_b": -1}}"#).unwrap();
    let o = run(&["simulate", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("noise.bandwidth_b"), "{err}");
    assert_eq!(err.lines().count(), 1);

    let o = run(
        &["simulate", "--config", "/nonexistent/cfg.json"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));

    let typo = dir.path().join("typo.json");
    std::fs::write(&typo, r#"{"irs": {"grid": 5}}"#).unwrap();
    let o = run(
        &["simulate", "--config", typo.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("irs"));
}
