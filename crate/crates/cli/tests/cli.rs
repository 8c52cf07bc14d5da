//! End-to-end tests of the command-line surface: exit codes, report
//! contracts, and determinism across worker counts.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn brf_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brf-lab"))
        .args(args)
        .env_remove("BRF_LAB_OUT")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn list_includes_the_five_dimensional_pair() {
    let out = brf_lab(&["list"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    let line = text
        .lines()
        .find(|l| l.contains("AIII:n=2,p=1"))
        .expect("5-dimensional row listed");
    assert!(line.trim_end().ends_with('5'), "{line}");
}

#[test]
fn list_class_filter() {
    let out = brf_lab(&["list", "--class", "AIII"]);
    assert_eq!(exit_code(&out), 0);
    for line in stdout(&out).lines().skip(1) {
        if !line.trim().is_empty() {
            assert!(line.starts_with("AIII"), "{line}");
        }
    }
    let out = brf_lab(&["list", "--class", "NOPE"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn list_max_dim_filter_and_json() {
    let out = brf_lab(&["list", "--max-dim", "20", "--format", "json"]);
    assert_eq!(exit_code(&out), 0);
    let items: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let arr = items.as_array().unwrap();
    assert!(!arr.is_empty());
    for item in arr {
        assert!(item["dims"]["m"].as_u64().unwrap() <= 20);
    }
}

#[test]
fn verify_five_dimensional_pair_passes() {
    let out = brf_lab(&["verify", "--pair", "AIII:n=2,p=1"]);
    assert_eq!(exit_code(&out), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["verdict"], "pass");
    assert!(report["residuals"]["ricci_max"].as_f64().unwrap() <= 1e-9);
    let witness = report["witnesses"]["nonflat_value"].as_f64().unwrap();
    assert!((witness - (-0.25)).abs() <= 1e-10);
}

#[test]
fn verify_reports_dims_for_su3_pair() {
    let out = brf_lab(&["verify", "--pair", "AIII:n=3,p=1"]);
    assert_eq!(exit_code(&out), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["dims"]["d"], 8);
    assert_eq!(report["dims"]["k"], 4);
    assert_eq!(report["dims"]["q"], 4);
    assert_eq!(report["dims"]["m"], 12);
}

#[test]
fn verify_rejects_out_of_range_and_unknown_pairs() {
    assert_eq!(exit_code(&brf_lab(&["verify", "--pair", "AIII:n=9,p=9"])), 2);
    assert_eq!(exit_code(&brf_lab(&["verify", "--pair", "whatever"])), 2);
    assert_eq!(exit_code(&brf_lab(&["verify", "--pair", "AIII:n=2,p=1,q=3"])), 2);
}

#[test]
fn verify_write_to_file_and_unwritable_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = brf_lab(&[
        "verify",
        "--pair",
        "AIII:n=2,p=1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["pair_id"], "AIII:n=2,p=1");

    let out = brf_lab(&[
        "verify",
        "--pair",
        "AIII:n=2,p=1",
        "--out",
        "/nonexistent-dir/report.json",
    ]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn verify_csv_format_and_tolerance_override() {
    let out = brf_lab(&[
        "verify",
        "--pair",
        "AIII:n=2,p=1",
        "--format",
        "csv",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("pair_id,"));
    assert_eq!(text.lines().count(), 2);

    let out = brf_lab(&[
        "verify",
        "--pair",
        "AIII:n=2,p=1",
        "--tol-ricci",
        "1e-3",
    ]);
    assert_eq!(exit_code(&out), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["tolerances"]["ricci_max"].as_f64().unwrap(), 1e-3);
}

#[test]
fn all_with_tiny_bound_hits_exactly_one_pair() {
    let dir = tempfile::tempdir().unwrap();
    let out = brf_lab(&[
        "all",
        "--max-dim",
        "5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2, "{summary}");
    assert!(summary.lines().nth(1).unwrap().contains("AIII:n=2,p=1"));
    assert!(dir.path().join("AIII_n2_p1.json").exists());
}

#[test]
fn all_up_to_dim_thirty_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = brf_lab(&[
        "all",
        "--max-dim",
        "30",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().skip(1).collect();
    assert!(rows.len() >= 8, "expected at least 8 pairs, got {}", rows.len());
    for row in rows {
        assert!(row.ends_with(",pass"), "{row}");
    }
}

#[test]
fn worker_count_does_not_change_bytes() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    let run = |dir: &Path, workers: &str| {
        let out = brf_lab(&[
            "all",
            "--max-dim",
            "16",
            "--workers",
            workers,
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&out), 0);
    };
    run(dir1.path(), "1");
    run(dir2.path(), "4");
    let mut names: Vec<String> = fs::read_dir(dir1.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(names.contains(&"summary.csv".to_string()));
    for name in names {
        let a = fs::read(dir1.path().join(&name)).unwrap();
        let b = fs::read(dir2.path().join(&name)).unwrap();
        assert_eq!(a, b, "{name} differs between worker counts");
    }
}

#[test]
fn env_var_overrides_default_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_brf-lab"))
        .args(["all", "--max-dim", "5"])
        .env("BRF_LAB_OUT", dir.path())
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code().unwrap(), 0);
    assert!(dir.path().join("summary.csv").exists());
}

#[test]
fn flow_fixed_point_check() {
    let out = brf_lab(&["flow", "--pair", "AIII:n=2,p=1", "--scale", "0"]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).contains("fixed-point residual"));
}

#[test]
fn flow_rejects_bad_arguments() {
    let out = brf_lab(&[
        "flow",
        "--pair",
        "AIII:n=2,p=1",
        "--step-size",
        "-0.5",
    ]);
    assert_eq!(exit_code(&out), 2);
    let out = brf_lab(&[
        "flow",
        "--pair",
        "AIII:n=2,p=1",
        "--method",
        "leapfrog",
    ]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn flow_perturbed_trajectory_exports_all_states() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.json");
    let out = brf_lab(&[
        "flow",
        "--pair",
        "AIII:n=2,p=1",
        "--scale",
        "0.05",
        "--steps",
        "100",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let trace: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(trace["exit"], "completed");
    let states = trace["states"].as_array().unwrap();
    assert_eq!(states.len(), 101);
    for state in states {
        for row in state["metric"].as_array().unwrap() {
            for v in row.as_array().unwrap() {
                assert!(v.as_f64().unwrap().is_finite());
            }
        }
    }
    let steps = trace["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 100);
    for s in steps {
        assert!(s["rhs_metric_norm"].as_f64().unwrap().is_finite());
    }
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = brf_lab(&["frobnicate"]);
    assert_eq!(exit_code(&out), 2);
}
