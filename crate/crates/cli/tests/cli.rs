use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn morsecert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morsecert")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("morsecert-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_exits_zero() {
    let out = morsecert(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("certify"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(morsecert(&["certify", "--no-such-flag"]).status.code(), Some(1));
}

#[test]
fn malformed_document_names_the_field() {
    let out = morsecert(&["certify", path_str(&data("malformed.json"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("generators"));
}

#[test]
fn missing_file_is_an_error() {
    assert_eq!(morsecert(&["certify", "/nonexistent/rep.json"]).status.code(), Some(1));
}

#[test]
fn hyperbolic_transvection_certifies() {
    let report = scratch("transvection.json");
    let out = morsecert(&["certify", path_str(&data("transvection_sl2.json")), "--out", path_str(&report)]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(json["verdict"], "certified");
    assert_eq!(json["certificate"]["schedule_index"], 1);
    assert_eq!(json["certificate"]["empirical_schedule"], true);
}

#[test]
fn parabolic_generator_is_not_certified() {
    let report = scratch("unipotent.json");
    let out = morsecert(&["certify", path_str(&data("unipotent_sl2.json")), "--out", path_str(&report)]);
    assert_eq!(out.status.code(), Some(2));
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(json["verdict"], "budget_exhausted");
    assert_eq!(json["attempts"].as_array().unwrap().len(), 6);
    assert!(json["certificate"].is_null());
}

#[test]
fn certify_report_is_identical_across_job_counts() {
    let mut reports = Vec::new();
    for jobs in ["1", "3"] {
        let report = scratch(&format!("jobs-{jobs}.json"));
        let out = morsecert(&[
            "certify",
            path_str(&data("schottky_sl2.json")),
            "--schedule-max",
            "2",
            "--jobs",
            jobs,
            "--out",
            path_str(&report),
        ]);
        assert!(matches!(out.status.code(), Some(0 | 2)));
        reports.push(std::fs::read(&report).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn schottky_search_finds_the_documented_powers() {
    let report = scratch("search.json");
    let out = morsecert(&["schottky-search", path_str(&data("schottky_sl2.json")), "--out", path_str(&report)]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(json["verdict"], "found");
    assert_eq!(json["powers"], serde_json::json!([4, 4]));
}

#[test]
fn limitset_writes_csv_with_frame_columns() {
    let csv = scratch("limit.csv");
    let out = morsecert(&["limitset", path_str(&data("schottky_sl2.json")), "--length", "3", "--out", path_str(&csv)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("pairwise opposite"));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("word,k,v1_1,v1_2,margin"));
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.split(',').count() == 5));
}

#[test]
fn expansion_report_grows_along_a_ray() {
    let csv = scratch("ray.csv");
    let out = morsecert(&[
        "expansion-report",
        path_str(&data("schottky_sl3_certified.json")),
        "--steps",
        "8",
        "--out",
        path_str(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("step,letter,log_expansion\n"));
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn zero_length_is_rejected() {
    let out = morsecert(&["limitset", path_str(&data("schottky_sl2.json")), "--length", "0"]);
    assert_eq!(out.status.code(), Some(1));
}
