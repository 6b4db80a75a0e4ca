//! The `hopper` command line, both in-process and as a subprocess.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use gantry_hopper::cli::{
    main_with_args, EXIT_CONFIG, EXIT_DIFFERENT, EXIT_OK, OUT_DIR_ENV, TREND_COLUMNS,
};
use gantry_hopper::sim::{compare_logs, LogTable};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn hopper(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["hopper"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = main_with_args(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn short_run(dir: &Path, extra: &[&str]) -> i32 {
    let out = dir.to_str().unwrap();
    let mut args = vec!["run", "--duration", "0.6", "--out", out];
    args.extend_from_slice(extra);
    hopper(&args).0
}

#[test]
fn run_writes_a_versioned_log_and_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    let robot = configs().join("nominal_robot.toml");
    let gait = configs().join("default_gait.toml");
    let code = short_run(
        tmp.path(),
        &[
            "--robot",
            robot.to_str().unwrap(),
            "--gait",
            gait.to_str().unwrap(),
            "--seed",
            "3",
        ],
    );
    assert_eq!(code, EXIT_OK);
    let log = fs::read_to_string(tmp.path().join("log.csv")).unwrap();
    assert!(log.lines().any(|l| l.starts_with("# schema_version")));
    assert!(
        log.contains("seed = 3"),
        "resolved config missing from the header"
    );
    assert!(tmp.path().join("metrics.toml").exists());
}

#[test]
fn missing_config_file_is_a_config_error_naming_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, _, err) = hopper(&[
        "run",
        "--robot",
        "/nonexistent/robot.toml",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("/nonexistent/robot.toml"), "{err}");
}

#[test]
fn unknown_override_key_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(
        short_run(tmp.path(), &["--set", "robot.no_such_field=1"]),
        EXIT_CONFIG
    );
}

#[test]
fn validate_reports_failures_and_warnings() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, out, _) = hopper(&[
        "validate",
        configs().join("nominal_robot.toml").to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{out}");

    let nominal = fs::read_to_string(configs().join("nominal_robot.toml")).unwrap();

    let heavy_gear = tmp.path().join("geared.toml");
    fs::write(
        &heavy_gear,
        nominal.replacen("gear_ratio = 26.9", "gear_ratio = 500.0", 1),
    )
    .unwrap();
    let (code, out, _) = hopper(&["validate", heavy_gear.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("WARN"), "{out}");

    let negative = tmp.path().join("negative.toml");
    let broken = nominal.replacen("counterweight_mass = 1.0", "counterweight_mass = -1.0", 1);
    assert_ne!(broken, nominal);
    fs::write(&negative, broken).unwrap();
    let (code, out, _) = hopper(&["validate", negative.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(out.contains("FAIL"), "{out}");
}

#[test]
fn compare_distinguishes_identical_close_and_distant_logs() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = |name: &str| tmp.path().join(name);
    assert_eq!(short_run(&dir("a"), &[]), EXIT_OK);
    assert_eq!(short_run(&dir("b"), &[]), EXIT_OK);
    assert_eq!(short_run(&dir("fine"), &["--set", "sim.dt=5e-5"]), EXIT_OK);
    let log = |name: &str| dir(name).join("log.csv").to_str().unwrap().to_owned();

    let (code, out, _) = hopper(&["compare", &log("a"), &log("b")]);
    assert_eq!(code, EXIT_OK, "{out}");

    // halving the step moves switch instants by a control tick, so voltages
    // jump there, but the configuration stays close
    let (code, _, _) = hopper(&["compare", &log("a"), &log("fine")]);
    assert_eq!(code, EXIT_DIFFERENT);
    let a = LogTable::read(Path::new(&log("a"))).unwrap();
    let fine = LogTable::read(Path::new(&log("fine"))).unwrap();
    let report = compare_logs(&a, &fine).unwrap();
    assert!(report.row_count_mismatch.is_none());
    for c in &report.columns {
        let bound = match c.column.as_str() {
            "t" => 0.0,
            "q1" | "q2" | "q3" | "q4" => 0.3,
            "hip_z" | "foot_z" => 0.03,
            _ => continue,
        };
        assert!(c.max_abs <= bound, "{} drifted by {}", c.column, c.max_abs);
    }
}

#[test]
fn compare_refuses_logs_of_different_schema_versions() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(short_run(tmp.path(), &[]), EXIT_OK);
    let original = tmp.path().join("log.csv");
    let text = fs::read_to_string(&original).unwrap();
    let version = text
        .lines()
        .find_map(|l| l.strip_prefix("# schema_version = "))
        .unwrap()
        .trim()
        .to_owned();
    let bumped = tmp.path().join("future.csv");
    let next = (version.parse::<u32>().unwrap() + 1).to_string();
    fs::write(
        &bumped,
        text.replacen(
            &format!("schema_version = {version}"),
            &format!("schema_version = {next}"),
            1,
        ),
    )
    .unwrap();
    let (code, _, err) = hopper(&[
        "compare",
        original.to_str().unwrap(),
        bumped.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains(&version) && err.contains(&next), "{err}");
}

#[test]
fn sweep_writes_one_directory_per_value_and_a_trend_table() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, out, err) = hopper(&[
        "sweep",
        "--param",
        "gait.peak_horizontal_force",
        "--values",
        "0,10",
        "--duration",
        "0.5",
        "--jobs",
        "2",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{out}{err}");
    let runs: Vec<_> = fs::read_dir(tmp.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_dir())
        .collect();
    assert_eq!(runs.len(), 2);
    for r in &runs {
        assert!(r.path().join("log.csv").exists());
    }
    let trend = fs::read_to_string(tmp.path().join("sweep_trend.csv")).unwrap();
    let header = trend.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, TREND_COLUMNS.join(","));
    assert_eq!(trend.lines().filter(|l| !l.starts_with('#')).count(), 3);
}

#[test]
fn binary_honours_the_output_directory_variable() {
    let tmp = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_hopper"))
        .args(["run", "--duration", "0.3"])
        .env(OUT_DIR_ENV, tmp.path())
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    assert!(tmp.path().join("log.csv").exists());

    let usage = Command::new(env!("CARGO_BIN_EXE_hopper"))
        .args(["run", "--sensor-mode", "psychic"])
        .output()
        .unwrap();
    assert_eq!(usage.status.code(), Some(EXIT_CONFIG));
}
