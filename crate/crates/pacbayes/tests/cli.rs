//! End-to-end checks of the `pacbayes` binary: exit codes, CSV emission,
//! resolved-config sidecars, and determinism across worker counts.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pacbayes"))
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pacbayes-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "command failed: {:?}\nstdout: {}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn sweep_preset_writes_four_column_csv_and_sidecar() {
    let dir = workdir("sweep");
    let out_path = dir.join("sweep.csv");
    run_ok(bin().args(["sweep", "--preset", "figure1", "--vary", "beta", "--out"]).arg(&out_path));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("sweep_value,eq4,eq5,eq6,eq8_relaxed\n"));
    assert!(text.lines().count() > 10);
    let sidecar = std::fs::read_to_string(dir.join("sweep.csv.config.toml")).unwrap();
    assert!(sidecar.contains("command = \"sweep\""));
    assert!(sidecar.contains("rng = \"splitmix64-counter\""));

    // Re-running the resolved sidecar reproduces the output bit for bit.
    let first = std::fs::read(&out_path).unwrap();
    run_ok(bin().arg("sweep").arg("--config").arg(dir.join("sweep.csv.config.toml")));
    let second = std::fs::read(&out_path).unwrap();
    assert_eq!(first, second, "sidecar re-run changed the output");
}

#[test]
fn coverage_is_identical_across_worker_counts() {
    let dir = workdir("coverage");
    let one = dir.join("one.csv");
    let eight = dir.join("eight.csv");
    for (path, workers) in [(&one, "1"), (&eight, "8")] {
        run_ok(
            bin()
                .args([
                    "coverage", "--theorem", "eq1", "--preset", "interval", "--trials", "100",
                    "--seed", "42", "--workers", workers, "--out",
                ])
                .arg(path),
        );
    }
    assert_eq!(
        std::fs::read(&one).unwrap(),
        std::fs::read(&eight).unwrap(),
        "worker count changed coverage output"
    );
    let text = std::fs::read_to_string(&one).unwrap();
    assert!(text.starts_with("trial,seed,bound_value,true_risk,violated\n"));
    assert_eq!(text.lines().count(), 101);
}

#[test]
fn data_dependent_lambda_on_fixed_lambda_bound_exits_3() {
    let out = bin()
        .args([
            "coverage", "--theorem", "lemma3", "--preset", "pareto-p2", "--p", "2", "--lambda",
            "30", "--lambda-policy", "data-dependent", "--trials", "5",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.starts_with("error: code=3 kind=protocol-violation"), "stderr: {stderr}");
}

#[test]
fn unknown_parameter_exits_2() {
    let out = bin().args(["coverage", "--theorem", "eq1", "--nonsense", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("kind=config"), "stderr: {stderr}");
}

#[test]
fn bound_command_prints_certificate_record() {
    let out = run_ok(bin().args([
        "bound", "--theorem", "thm2", "--p", "2", "--m-p", "3", "--preset", "pareto-p2", "--seed",
        "9",
    ]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("theorem=thm2 estimator=keep-below"), "stdout: {stdout}");
    assert!(stdout.contains("m_p=3.0000000000000000e0"));
    assert!(stdout.contains(" value="));
    // Resolved config lands on stderr for stdout-only runs.
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("command = \"bound\""), "stderr: {stderr}");
}

#[test]
fn rate_command_reports_interpolated_slope() {
    let out = run_ok(bin().args(["rate", "--p", "4", "--points", "6"]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let slope_line = stdout.lines().find(|l| l.starts_with("slope=")).unwrap();
    let slope: f64 = slope_line
        .split_whitespace()
        .next()
        .unwrap()
        .trim_start_matches("slope=")
        .parse()
        .unwrap();
    assert!((slope + 0.75).abs() < 0.02, "slope {slope} should be ≈ -3/4");
}

#[test]
fn mi_command_reads_scenario_file() {
    let dir = workdir("mi");
    let scenario_path = dir.join("scenario.toml");
    std::fs::write(
        &scenario_path,
        r#"
name = "cli-mi"
n = 4

[algorithm]
kind = "gibbs"
temperature = 2.0

[data]
atoms = [0.0, 1.0]
weights = [0.5, 0.5]

[[hypotheses]]
losses = [0.0, 1.0]

[[hypotheses]]
losses = [1.0, 0.0]
"#,
    )
    .unwrap();
    let out_path = dir.join("mi.csv");
    run_ok(bin().args(["mi", "--scenario"]).arg(&scenario_path).arg("--out").arg(&out_path));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("term,value\ni_ws,"));
    assert_eq!(text.lines().count(), 6); // header + i_ws + 4 single-letter rows
}

#[test]
fn output_dir_env_var_redirects_relative_paths() {
    let dir = workdir("envdir");
    run_ok(
        bin()
            .args(["sweep", "--vary", "chi2", "--grid", "1,10,100", "--out", "env.csv"])
            .env("PACBAYES_OUTPUT_DIR", &dir),
    );
    assert!(dir.join("env.csv").exists());
    assert!(dir.join("env.csv.config.toml").exists());
}
