//! End-to-end runs of the `rqi` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn rqi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rqi")).args(args).output().expect("spawn rqi")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

/// Unique scratch path; the test process cleans nothing up on purpose
/// (temp dir semantics).
fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("rqi-cli-{}-{name}", std::process::id()))
}

fn write_config(name: &str, text: &str) -> PathBuf {
    let path = scratch(name);
    std::fs::write(&path, text).expect("write config");
    path
}

#[test]
fn scenario_builtin_prints_a_parseable_document() {
    let out = rqi(&["scenario", "--builtin", "two-level"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(doc["name"], "two-level");
    assert_eq!(doc["builtin"], "two-level");
    assert_eq!(doc["dims"]["n0"], 2);
    assert_eq!(doc["h_list"].as_array().unwrap().len(), 3);
}

#[test]
fn scenario_out_file_matches_stdout() {
    let path = scratch("scenario-out.json");
    let piped = rqi(&["scenario", "--builtin", "von-neumann"]);
    let filed = rqi(&["scenario", "--builtin", "von-neumann", "--out", path.to_str().unwrap()]);
    assert!(piped.status.success() && filed.status.success());
    assert!(filed.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), piped.stdout);
}

#[test]
fn converge_csv_header_and_error_decay() {
    let config = write_config(
        "tl-short.json",
        r#"{"builtin": "two-level", "h_list": [1e-2, 1e-3]}"#,
    );
    let out = rqi(&[
        "converge",
        "--kind",
        "matrix-element",
        "--config",
        config.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = stdout_str(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,h,discrete_norm,continuous_norm,abs_error,fitted_order"
    );
    let rows: Vec<Vec<String>> =
        lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    assert_eq!(rows.len(), 2);
    let err: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(err[1] < err[0]);
    // two step sizes cannot support an order fit
    assert!(rows.iter().all(|r| r[5].is_empty()));
}

#[test]
fn converge_runs_are_byte_identical() {
    let config = write_config(
        "vn-repeat.json",
        r#"{"builtin": "von-neumann", "t_grid": [0.5], "h_list": [1e-2, 1e-3]}"#,
    );
    let args = ["converge", "--kind", "semigroup", "--config", config.to_str().unwrap()];
    let first = rqi(&args);
    let second = rqi(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn converge_json_mirrors_the_rows() {
    let config = write_config(
        "vn-json.json",
        r#"{"builtin": "von-neumann", "t_grid": [1.0], "h_list": [1e-2, 1e-3, 1e-4]}"#,
    );
    let out = rqi(&[
        "converge",
        "--kind",
        "semigroup",
        "--config",
        config.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(doc["metadata"]["scenario"], "von-neumann");
    assert_eq!(doc["metadata"]["kind"], "semigroup");
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    // closed-form comparison keeps the distance at first order in h
    let last = &rows[2];
    assert!(last["abs_error"].as_f64().unwrap() <= 1e-3);
    assert!(last["fitted_order"].as_f64().unwrap() > 0.8);
}

#[test]
fn simulate_qsde_reproduces_exponential_decay() {
    let config = write_config("tl-sim.json", r#"{"builtin": "two-level"}"#);
    let out = rqi(&["simulate", "--mode", "qsde", "--config", config.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let row = text.lines().nth(1).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols[0], "1");
    assert!(cols[1].is_empty()); // no h in the limit dynamics
    let trace: f64 = cols[4].parse().unwrap();
    assert!((trace - (-1.0f64).exp()).abs() < 1e-10);
}

#[test]
fn limit_coeffs_emits_the_two_level_table() {
    let config = write_config("tl-coeffs.json", r#"{"builtin": "two-level"}"#);
    let out =
        rqi(&["limit-coeffs", "--config", config.to_str().unwrap(), "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(doc["unitarity"]["pass"], true);
    // creation coefficient |ground><excited|
    assert_eq!(doc["table"][1][0], serde_json::json!([[[0.0, 0.0], [1.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]));
    // drift diag(0, -1/2)
    assert_eq!(doc["table"][0][0][1][1], serde_json::json!([-0.5, 0.0]));
}

#[test]
fn dilate_completes_an_amplitude_damping_family() {
    let config = write_config(
        "ad.json",
        r#"{
            "dims": {"n0": 2, "n_env": 1},
            "kraus": [
                [[[1,0],[0,0]],[[0,0],[0.8,0]]],
                [[[0,0],[0.6,0]],[[0,0],[0,0]]]
            ]
        }"#,
    );
    let out = rqi(&["dilate", "--config", config.to_str().unwrap()]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert!(doc["unitarity_residual"].as_f64().unwrap() <= 1e-12);
    assert!(doc["embedding_residual"].as_f64().unwrap() <= 1e-12);

    let csv = rqi(&[
        "dilate",
        "--config",
        config.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    let text = stdout_str(&csv);
    assert_eq!(text.lines().next().unwrap(), "j,i,row,col,re,im");
    assert_eq!(text.lines().count(), 1 + 16);
}

#[test]
fn exit_codes_separate_validation_from_numerical_failures() {
    // malformed document
    let bad = write_config("bad.json", "not json");
    let out = rqi(&["scenario", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    // schema violation
    let unknown = write_config("unknown.json", r#"{"builtin": "nope"}"#);
    let out = rqi(&["converge", "--kind", "semigroup", "--config", unknown.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    // numerical rejection: Kraus blocks that are not an isometry column
    let skew = write_config(
        "skew.json",
        r#"{"dims": {"n0": 2, "n_env": 1},
            "kraus": [[[[1,0],[0,0]],[[0,0],[1,0]]],
                      [[[0,0],[0.6,0]],[[0,0],[0,0]]]]}"#,
    );
    let out = rqi(&["dilate", "--config", skew.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // usage problems are validation errors
    let out = rqi(&["converge", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let out = rqi(&["scenario"]);
    assert_eq!(out.status.code(), Some(1));

    // help and version are successes
    assert_eq!(rqi(&["--help"]).status.code(), Some(0));
    assert_eq!(rqi(&["--version"]).status.code(), Some(0));
}

#[test]
fn field_paths_surface_in_validation_messages() {
    let config = write_config(
        "badfield.json",
        r#"{
            "name": "bad", "dims": {"n0": 2, "n_env": 1},
            "params": {
                "h0": [[[0,0],[1,0]],[[0,0],[0,0]]],
                "hs": [[[0,0],[0,0]],[[0,0],[0,0]]],
                "v": [[[[0,0],[0,0]],[[0,0],[0,0]]]],
                "d": [[[0,0],[0,0]],[[0,0],[0,0]]]
            },
            "t_grid": [1.0], "h_list": [0.1]
        }"#,
    );
    let out = rqi(&["limit-coeffs", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("params.h0"), "stderr: {err}");
}
