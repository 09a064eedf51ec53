//! End-to-end checks of the command-line surface: subcommands, exit codes,
//! emission formats and the stored-assignment verification loop.

use std::process::Command;

fn mobility() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mobility"))
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("mobility-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn solve_then_verify_round_trip() {
    let dir = tempdir();
    let json_path = dir.join("fig3.json");
    let status = mobility()
        .args(["solve", "--scenario", "fig3", "--format", "json", "--out"])
        .arg(&json_path)
        .status()
        .unwrap();
    assert!(status.success());

    let output = mobility()
        .args(["verify", "--scenario", "fig3", "--assignment"])
        .arg(&json_path)
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("is_nash: true"), "verify output: {stdout}");
}

#[test]
fn csv_and_json_report_identical_numbers() {
    let dir = tempdir();
    let csv_path = dir.join("table1.csv");
    let json_path = dir.join("table1.json");
    for (format, path) in [("csv", &csv_path), ("json", &json_path)] {
        let status = mobility()
            .args(["solve", "--scenario", "table1", "--format", format, "--out"])
            .arg(path)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let travelers = json["travelers"].as_array().unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), travelers.len());
    for (row, traveler) in rows.iter().zip(travelers) {
        let fields: Vec<&str> = row.split(',').collect();
        for (idx, key) in [(4, "payment"), (5, "tau"), (6, "utility")] {
            let from_csv: f64 = fields[idx].parse().unwrap();
            let from_json = traveler[key].as_f64().unwrap();
            assert_eq!(from_csv, from_json, "{key} differs between formats");
        }
    }
}

#[test]
fn unknown_scenario_is_a_validation_error() {
    let output = mobility()
        .args(["solve", "--scenario", "/nonexistent/skynet.json"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn malformed_scenario_is_a_validation_error() {
    let dir = tempdir();
    let path = dir.join("broken.json");
    std::fs::write(&path, "{\"name\": \"broken\"").unwrap();
    let output = mobility().args(["solve", "--scenario"]).arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn dangling_reference_in_scenario_file_is_diagnosed() {
    let dir = tempdir();
    let mut config = mobility_core::scenario::builtin::fig3();
    config.network.routes[0].edges[0] = "e9".into();
    let path = dir.join("dangling.json");
    std::fs::write(&path, config.to_canonical_json()).unwrap();
    let output = mobility().args(["solve", "--scenario"]).arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("e9"), "diagnostic lost the dangling label: {stderr}");
}

#[test]
fn poa_sweep_emits_the_documented_schema() {
    let output = mobility()
        .args([
            "sweep-poa",
            "--scenario",
            "sweep",
            "--i-min",
            "2",
            "--i-max",
            "4",
            "--replications",
            "2",
            "--variant",
            "t1",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let csv = String::from_utf8(output.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scenario_hash,seed,i,variant,poa,bound,welfare_opt,welfare_worst_nash,converged,rounds"
    );
    // three sweep points, two replications each
    assert_eq!(lines.count(), 6);
}

#[test]
fn beta3_sweep_counts_rows_per_value_and_replication() {
    let output = mobility()
        .args([
            "sweep-beta3",
            "--scenario",
            "sweep-prospect",
            "--values",
            "0.5,1.0",
            "--replications",
            "2",
        ])
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let csv = String::from_utf8(output.stdout).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().any(|r| r.contains("beta3=0.5")));
    assert!(rows.iter().any(|r| r.contains("beta3=1")));
}

#[test]
fn bad_beta3_values_are_rejected() {
    let output = mobility()
        .args(["sweep-beta3", "--scenario", "sweep-prospect", "--values", "0.5,1.5"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}
