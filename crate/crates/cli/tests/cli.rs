//! End-to-end tests of the `coopetition` binary: exit codes, report files,
//! and byte-level determinism of outputs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_coopetition")
}

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(args: &[&str]) -> Output {
    Command::new(binary())
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn solve_writes_report_and_prints_comparison() {
    let out = tempfile::tempdir().unwrap();
    let scenario = fixtures_dir().join("counterexample.scenario");
    let result = run(&[
        "solve",
        scenario.to_str().unwrap(),
        "--out",
        out.path().to_str().unwrap(),
        "--no-timestamp",
    ]);
    assert_eq!(result.status.code(), Some(0), "{}", stdout(&result));
    let text = stdout(&result);
    assert!(text.contains("reference comparison"));
    assert!(text.contains("MISMATCH (documented)"));

    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.path().join("solve_report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["equilibrium"]["collaborate"], true);
    assert_eq!(report["reference"]["federated_verified"], true);
    assert_eq!(report["reference"]["collaborate_matches"], false);
}

#[test]
fn solve_outputs_are_byte_identical_without_timestamp() {
    let scenario = fixtures_dir().join("counterexample.scenario");
    let mut bytes = Vec::new();
    for _ in 0..2 {
        let out = tempfile::tempdir().unwrap();
        let result = run(&[
            "solve",
            scenario.to_str().unwrap(),
            "--out",
            out.path().to_str().unwrap(),
            "--no-timestamp",
        ]);
        assert_eq!(result.status.code(), Some(0));
        bytes.push(std::fs::read(out.path().join("solve_report.json")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}

fn small_fixture_table(dir: &Path) -> PathBuf {
    let path = dir.join("small.csv");
    std::fs::write(
        &path,
        "dataset,sweep_key,i_local,e_local,fedavg,i_local_disp,e_local_disp,fedavg_disp\n\
         cifar10,de=3k,38.47,48.07,59.69,9.91,8.99,9.55\n\
         ham10000,de=2k,76.37,73.67,79.90,1.65,1.87,0.91\n",
    )
    .unwrap();
    path
}

#[test]
fn sweep_reports_discrepancies_with_exit_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = small_fixture_table(dir.path());
    let expect = dir.path().join("expect.csv");
    std::fs::write(
        &expect,
        "dataset,sweep_key,collaborate\ncifar10,de=3k,true\nham10000,de=2k,false\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let result = run(&[
        "sweep",
        fixtures.to_str().unwrap(),
        fixtures_dir()
            .join("base_uniform.scenario")
            .to_str()
            .unwrap(),
        "--expect",
        expect.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--no-timestamp",
    ]);
    assert_eq!(result.status.code(), Some(3), "{}", stdout(&result));
    assert!(stdout(&result).contains("contradict the expected collaboration table"));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("sweep_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["discrepancy_count"], 1);
    let cells = report["cells"].as_array().unwrap();
    let ham = &cells[1];
    assert_eq!(ham["discrepancy"]["expected_collaborate"], false);
    assert_eq!(ham["discrepancy"]["computed_collaborate"], true);
    assert!(ham["discrepancy"]["oracle_federated"]["incumbent_profit"].is_number());

    let collab = std::fs::read_to_string(out.join("collaboration.csv")).unwrap();
    assert!(collab.starts_with("dataset,sweep_key,collaborate\n"));
    assert!(collab.contains("ham10000,de=2k,true"));
    assert!(std::fs::read_to_string(out.join("pricing.csv"))
        .unwrap()
        .contains("cifar10,de=3k,"));
}

#[test]
fn sweep_is_deterministic_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = small_fixture_table(dir.path());
    let base = fixtures_dir().join("base_uniform.scenario");
    let mut outputs = Vec::new();
    for workers in ["1", "3"] {
        let out = dir.path().join(format!("out-{workers}"));
        let result = run(&[
            "sweep",
            fixtures.to_str().unwrap(),
            base.to_str().unwrap(),
            "--workers",
            workers,
            "--out",
            out.to_str().unwrap(),
            "--no-timestamp",
        ]);
        assert_eq!(result.status.code(), Some(0), "{}", stdout(&result));
        outputs.push(std::fs::read(out.join("sweep_report.json")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn check_dist_flags_the_irregular_mixture() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run(&[
        "check-dist",
        "uniform",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("non-decreasing"));

    let bad = run(&[
        "check-dist",
        "valley-mixture",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("DECREASES at location"));

    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("distribution_check.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["monotone_hazard"], false);
    assert!(report["first_violation"].is_number());
}

#[test]
fn invalid_inputs_exit_with_code_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = run(&[
        "solve",
        "no-such-file.scenario",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(missing.status.code(), Some(1));

    let bad_descriptor = run(&[
        "check-dist",
        "cauchy:1,2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(bad_descriptor.status.code(), Some(1));

    let bad_override = run(&[
        "solve",
        fixtures_dir()
            .join("counterexample.scenario")
            .to_str()
            .unwrap(),
        "--damping",
        "1.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(bad_override.status.code(), Some(1));
}

#[test]
fn oracle_check_passes_on_the_bundled_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let result = run(&[
        "oracle-check",
        fixtures_dir()
            .join("counterexample.scenario")
            .to_str()
            .unwrap(),
        "--grid",
        "800",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(0), "{}", stdout(&result));
    assert!(stdout(&result).contains("oracle check passed"));
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("oracle_check.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["agreement"], true);
}
