use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qretro::report::{Report, Results};
use qretro::selftest::run_selftest;
use qretro::{json, run_scenario, RunOptions, Scenario};
use qretro_core::sweep::Execution;

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn qretro(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qretro"))
        .args(args)
        .output()
        .expect("qretro runs")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qretro-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_file(kind: &str, name: &str) -> (Output, Option<Report>) {
    let out_path = temp_dir(kind).join(format!("{name}.report.json"));
    let input = scenario_path(name);
    let output = qretro(&[
        kind,
        "--input",
        input.to_str().unwrap(),
        "--output",
        out_path.to_str().unwrap(),
        "--quiet",
    ]);
    let report = std::fs::read_to_string(&out_path)
        .ok()
        .map(|text| json::from_str::<Report>(&text).unwrap());
    (output, report)
}

fn write_scenario(tag: &str, text: &str) -> PathBuf {
    let path = temp_dir(tag).join("scenario.json");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn bsc_scenario_gives_bayes_estimates() {
    let (out, report) = run_file("classical", "classical_bsc.json");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let Results::Classical(r) = report.unwrap().results else {
        panic!("wrong result kind")
    };
    assert!((r.outcomes[0].estimate.unwrap() - 0.2).abs() < 1e-12);
    assert!((r.outcomes[1].estimate.unwrap() - 0.8).abs() < 1e-12);
    assert!((r.outcomes[0].embedded_estimate.unwrap() - 0.2).abs() < 1e-12);
    assert!(r.max_embedding_gap < 1e-12);
}

#[test]
fn identity_channel_returns_the_observable() {
    let (out, report) = run_file("personick", "personick_identity.json");
    assert!(out.status.success());
    let Results::Personick(r) = report.unwrap().results else {
        panic!("wrong result kind")
    };
    let expected = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]];
    let got = r.estimator.iter().flatten().flatten();
    for (a, b) in got.zip(expected.iter().flatten().flatten()) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!(r.min_risk.abs() < 1e-12);
}

#[test]
fn report_round_trips_byte_for_byte() {
    let text = std::fs::read_to_string(scenario_path("complex_partial_trace.json")).unwrap();
    let scenario = Scenario::parse(&text).unwrap();
    let report = run_scenario(&scenario, &RunOptions::default()).unwrap();
    let written = json::to_string(&report).unwrap();
    let back: Report = json::from_str(&written).unwrap();
    assert_eq!(back, report);
    assert_eq!(json::to_string(&back).unwrap(), written);
}

#[test]
fn identical_runs_give_identical_payloads() {
    let text = std::fs::read_to_string(scenario_path("qfi_mono_sweep.json")).unwrap();
    let scenario = Scenario::parse(&text).unwrap();
    let strip = |mut r: Report| {
        r.diagnostics.elapsed_ms = 0.0;
        json::to_string(&r).unwrap()
    };
    let par = run_scenario(&scenario, &RunOptions::default()).unwrap();
    let seq = run_scenario(
        &scenario,
        &RunOptions {
            exec: Execution::Sequential,
            ..RunOptions::default()
        },
    )
    .unwrap();
    assert_eq!(strip(par), strip(seq));
}

#[test]
fn qfi_sweep_passes_with_summary() {
    let (out, report) = run_file("qfi-mono", "qfi_mono_sweep.json");
    assert!(out.status.success());
    let Results::QfiMono(r) = report.unwrap().results else {
        panic!("wrong result kind")
    };
    assert_eq!(r.summary.instances, 200);
    assert!(r.summary.passed);
    assert!(r.rows.iter().all(|row| row.report.slack >= -1e-8));
}

#[test]
fn seed_flag_overrides_scenario_seed() {
    let text = std::fs::read_to_string(scenario_path("qfi_mono_sweep.json")).unwrap();
    let scenario = Scenario::parse(&text).unwrap();
    let a = run_scenario(&scenario, &RunOptions::default()).unwrap();
    let b = run_scenario(
        &scenario,
        &RunOptions {
            seed: Some(1),
            ..RunOptions::default()
        },
    )
    .unwrap();
    assert_ne!(a.results, b.results);
}

#[test]
fn every_bundled_scenario_runs() {
    for entry in std::fs::read_dir(scenario_path("")).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let scenario = Scenario::parse(&text).unwrap();
        let out = qretro(&[scenario.kind(), "--input", path.to_str().unwrap(), "--quiet"]);
        assert!(
            out.status.success(),
            "{}: {}",
            path.display(),
            String::from_utf8_lossy(&out.stderr)
        );
        let report: Report = json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
        assert_eq!(report.scenario, scenario);
    }
}

#[test]
fn malformed_input_exits_with_validation_status() {
    let path = write_scenario("malformed", r#"{"kind": "classical", "prior": [0.5, 0.5]"#);
    let out = qretro(&["classical", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn missing_field_is_named() {
    let path = write_scenario(
        "missing",
        r#"{"kind": "classical", "prior": [0.5, 0.5], "values": [0, 1]}"#,
    );
    let out = qretro(&["classical", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("transition"));
}

#[test]
fn corrupted_channel_is_rejected_as_cptp() {
    let path = write_scenario(
        "cptp",
        r#"{"kind": "personick",
            "state": [[0.5, 0], [0, 0.5]],
            "observable": [[1, 0], [0, -1]],
            "channel": {"type": "kraus", "operators": [[[1, 0], [0, 0.5]]]}}"#,
    );
    let out = qretro(&["personick", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cptp"));
}

#[test]
fn negligible_overlap_is_a_numerical_failure() {
    let path = write_scenario(
        "overlap",
        r#"{"kind": "gaussian",
            "state": {"mean": [0, 0], "covariance": [[0.5, 0], [0, 0.5]]},
            "effect": {"mean": [60, 0], "covariance": [[0.5, 0], [0, 0.5]]},
            "observable": {"coeffs": [1, 0]}}"#,
    );
    let out = qretro(&["gaussian", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn kind_must_match_subcommand() {
    let out = qretro(&[
        "personick",
        "--input",
        scenario_path("classical_bsc.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn non_positive_tolerance_scale_is_rejected() {
    let input = scenario_path("classical_bsc.json");
    let out = qretro(&["classical", "--input", input.to_str().unwrap(), "--tol-scale", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn selftest_pass_set_is_seed_independent() {
    let pass_set = |seed| {
        run_selftest(seed, Execution::Parallel)
            .checks
            .into_iter()
            .map(|c| (c.name, c.passed))
            .collect::<Vec<_>>()
    };
    let first = pass_set(1);
    assert!(first.iter().all(|(_, ok)| *ok), "{first:?}");
    assert_eq!(pass_set(2), first);
    assert_eq!(pass_set(3), first);
}
