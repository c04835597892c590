use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tcsde::cli::config::{Format, RunConfig, OUT_DIR_ENV};
use tcsde::cli::{EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE};

fn tcsde(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcsde")).args(args).current_dir(cwd).env_remove(OUT_DIR_ENV).output().unwrap()
}

fn with_config(cmd: &str, toml: &str, extra: &[&str], dir: &Path) -> Output {
    fs::write(dir.join("c.toml"), toml).unwrap();
    let mut args = vec![cmd, "--config", "c.toml"];
    args.extend_from_slice(extra);
    tcsde(&args, dir)
}

#[test]
fn clock_writes_output_and_meta() {
    let dir = tempfile::tempdir().unwrap();
    let out = tcsde(&["clock", "--beta", "0.7", "--t-max", "0.5", "--out", "path.csv"], dir.path());
    assert_eq!(out.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("path.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,E_t"));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("path.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "clock");
    assert_eq!(meta["config"]["beta"], 0.7);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("results");
    let out = Command::new(env!("CARGO_BIN_EXE_tcsde"))
        .args(["simulate", "--t-max", "0.2", "--format", "json"])
        .current_dir(dir.path())
        .env(OUT_DIR_ENV, &target)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    assert!(target.join("simulate.json").is_file());
    assert!(!dir.path().join("tcsde-out").exists());
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(tcsde(&["frobnicate"], p).status.code(), Some(EXIT_USAGE));
    assert_eq!(tcsde(&["clock", "--beta", "1.5", "--out", "x.csv"], p).status.code(), Some(EXIT_USAGE));
    assert_eq!(tcsde(&["stability", "--paths", "0", "--out", "x.csv"], p).status.code(), Some(EXIT_USAGE));
    let stay = "experiment = \"stay\"\nx0 = 1.5\nr = 1.0\nn_paths = 10\n";
    assert_eq!(with_config("stability", stay, &["--out", "x.csv"], p).status.code(), Some(EXIT_USAGE));
    let varying = "model = \"linear_time_varying\"\nf1_mod = [0.5, 1.0, 0.0, 0.0]\nt_max = 0.5\n";
    let out = with_config("simulate", varying, &["--method", "duality", "--out", "x.csv"], p);
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    assert_eq!(with_config("clock", "no_such_key = 1\n", &["--out", "x.csv"], p).status.code(), Some(EXIT_USAGE));
    assert_eq!(tcsde(&["clock", "--config", "missing.toml"], p).status.code(), Some(EXIT_USAGE));
}

#[test]
fn rejected_condition_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "preset = \"example2\"\nalpha = 0.75\n";
    let out = with_config("lyapunov", cfg, &["--out", "l.csv"], dir.path());
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha_below_theta_ratio"));
}

#[test]
fn failed_check_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "beta = 0.6\nt_max = 2.0\nf1 = -0.5\ng1 = 1.0\ncompare_method = \"closed_form\"\nmax_diff = 0.0\ndt = 0.05\nop_step = 0.05\n";
    let out = with_config("simulate", cfg, &["--out", "s.csv"], dir.path());
    assert_eq!(out.status.code(), Some(EXIT_CHECK_FAILED));
    let header = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(header.starts_with("t,E_t,B_E,X,X_ref,abs_diff"));
}

#[test]
fn lyapunov_presets_report_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    for (preset, verdict) in [("example1", "satisfied"), ("example1_contrast", "violated")] {
        let out = tcsde(&["lyapunov", "--preset", preset, "--out", "l.csv"], p);
        assert_eq!(out.status.code(), Some(EXIT_OK), "{preset}");
        let csv = fs::read_to_string(p.join("l.csv")).unwrap();
        assert!(csv.lines().any(|l| l.contains("verdict") && l.contains(verdict)), "{preset}: {csv}");
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = with_config("clock", "beta = 0.3\nseed = 1\n", &["--beta", "0.9", "--out", "c.csv"], dir.path());
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("c.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["beta"], 0.9);
    assert_eq!(meta["config"]["seed"], 1);
}

#[test]
fn seeds_change_output_and_repeats_do_not() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let run = |seed: &str, out: &str| {
        let o = tcsde(&["clock", "--t-max", "0.5", "--seed", seed, "--out", out], p);
        assert_eq!(o.status.code(), Some(EXIT_OK));
        fs::read(p.join(out)).unwrap()
    };
    assert_eq!(run("3", "a.csv"), run("3", "b.csv"));
    assert_ne!(run("3", "a.csv"), run("4", "c.csv"));
}

#[test]
fn resolved_config_reloads_to_itself() {
    let cfg = RunConfig { beta: 0.4, seed: 9, format: Format::Json, shells: vec![0.01, 0.2], ..Default::default() };
    let text = cfg.to_toml_string().unwrap();
    assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
}
