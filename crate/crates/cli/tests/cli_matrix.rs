//! End-to-end exit-code and reproducibility checks against the built binary.

use std::path::Path;
use std::process::{Command, Output};

fn radar(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radar"))
        .args(args)
        .arg("--out")
        .arg(out_dir)
        .env_remove("RADAR_OUT")
        .output()
        .expect("spawn radar")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

#[test]
fn list_exits_zero_and_prints_registry() {
    let dir = tempfile::tempdir().unwrap();
    let out = radar(&["list"], dir.path());
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("growth-asymptote"));
    assert!(stdout.contains("immune-exponents"));
}

#[test]
fn passing_experiment_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = radar(&["run", "growth-asymptote"], dir.path());
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("experiment growth-asymptote: PASS"));
    assert!(dir.path().join("growth-asymptote/report").exists());
}

#[test]
fn failing_expectation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // a horizon too short to reach the asymptote fails the check honestly
    let out = radar(&["run", "growth-asymptote", "--set", "t_end=5.0"], dir.path());
    assert_eq!(code(&out), 1);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("FAIL"));
}

#[test]
fn unknown_experiment_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = radar(&["run", "nonexistent"], dir.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&radar(&["frobnicate"], dir.path())), 2);
    assert_eq!(code(&radar(&["list", "--bogus"], dir.path())), 2);
    assert_eq!(code(&radar(&["immune"], dir.path())), 2);
    assert_eq!(code(&radar(&["run", "growth-asymptote", "--set", "novalue"], dir.path())), 2);
    assert_eq!(code(&radar(&["run", "growth-asymptote", "--set", "no_such=1"], dir.path())), 2);
    // non-numeric where a number is required
    assert_eq!(code(&radar(&["run", "growth-asymptote", "--set", "t_end=bogus"], dir.path())), 2);
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&radar(&["--help"], dir.path())), 0);
}

#[test]
fn fit_on_insufficient_data_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("one-row.csv");
    std::fs::write(&csv, "x,y\n1.0,2.0\n").unwrap();
    let out = radar(&["fit", csv.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("insufficient data"));

    let missing = dir.path().join("missing.csv");
    assert_eq!(code(&radar(&["fit", missing.to_str().unwrap()], dir.path())), 3);
}

#[test]
fn fit_recovers_slope_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("square.csv");
    std::fs::write(&csv, "x,y\n1,1\n2,4\n4,16\n8,64\n").unwrap();
    let out = radar(&["fit", csv.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("slope 2"), "stdout: {stdout}");
    assert!(stdout.contains("p_value undefined"));
}

#[test]
fn seeded_sim_commands_are_byte_reproducible() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let args = [
        "ants",
        "run",
        "--seed",
        "7",
        "--set",
        "ants.replicates=2",
        "--set",
        "ants.max_ticks=300",
    ];
    assert_eq!(code(&radar(&args, dir_a.path())), 0);
    assert_eq!(code(&radar(&args, dir_b.path())), 0);
    let a = std::fs::read(dir_a.path().join("ants-run/stats.csv")).unwrap();
    let b = std::fs::read(dir_b.path().join("ants-run/stats.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_file_feeds_parameters_and_set_wins() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    std::fs::write(&cfg, r#"{"growth": {"a": 2.0, "b": 1.0}}"#).unwrap();
    let out = radar(
        &[
            "growth",
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--set",
            "growth.b=0.5",
            "-v",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    // effective tree echoed at -v reflects both the file and the override
    assert!(stdout.contains("\"a\": 2.0"));
    assert!(stdout.contains("\"b\": 0.5"));
    // asymptote (a/b)^4 = 256 confirms the merged parameters took effect
    assert!(stdout.contains("asymptotic mass 256"));
}

#[test]
fn radar_out_env_is_the_default_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_radar"))
        .args(["growth", "run"])
        .env("RADAR_OUT", dir.path())
        .output()
        .expect("spawn radar");
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("growth-run/trajectory.csv").exists());
}

#[test]
fn sim_subcommands_succeed_with_small_params() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&radar(&["immune", "optimize"], dir.path())), 0);
    assert_eq!(
        code(&radar(&["immune", "des", "--set", "immune.replicates=30"], dir.path())),
        0
    );
    assert_eq!(
        code(&radar(
            &["smallworld", "run", "--set", "smallworld.sizes=[256,1024,4096]", "--set", "smallworld.trials=200"],
            dir.path()
        )),
        0
    );
    assert!(dir.path().join("immune-optimize/optima.csv").exists());
    assert!(dir.path().join("immune-des/runs.csv").exists());
    assert!(dir.path().join("smallworld-run/results.csv").exists());
}
