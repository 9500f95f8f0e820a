//! End-to-end tests against the compiled binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_adtarget"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

const TABLE1_JSON: &str = r#"{
  "unit": "percent",
  "features": [
    { "name": "age", "types": [
      { "label": "t1", "q": 7.28, "p": 16.27 },
      { "label": "t2", "q": 26.00, "p": 49.92 },
      { "label": "t3", "q": 27.75, "p": 19.88 },
      { "label": "t4", "q": 19.10, "p": 7.63 },
      { "label": "t5", "q": 12.50, "p": 2.76 },
      { "label": "t6", "q": 7.27, "p": 3.64 }
    ] }
  ]
}
"#;

fn write_table1(dir: &Path) -> PathBuf {
    let path = dir.join("table1.json");
    std::fs::write(&path, TABLE1_JSON).unwrap();
    path
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_table1(dir.path());

    let ok = run(&["validate", "--data", data.to_str().unwrap()]);
    assert_eq!(code(&ok), 0, "stderr: {}", stderr(&ok));
    assert!(stdout(&ok).contains("valid: 1 feature(s), 6 type(s)"));

    let strict = run(&["validate", "--data", data.to_str().unwrap(), "--eps", "1e-6"]);
    assert_eq!(code(&strict), 2);
    let report = stdout(&strict);
    assert!(report.contains("violation: age"), "{report}");
    assert!(report.contains("2 violation(s)"), "{report}");
}

#[test]
fn optimize_reproduces_the_printed_example() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_table1(dir.path());

    let output = run(&["optimize", "--data", data.to_str().unwrap(), "--L", "0.30"]);
    assert_eq!(code(&output), 0, "stderr: {}", stderr(&output));
    let strategy: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(strategy["selections"][0]["selected"][0], "t1");
    assert_eq!(strategy["selections"][0]["selected"][1], "t2");
    let lift = strategy["lift"].as_f64().unwrap();
    assert!((lift - 1.99).abs() < 0.01, "lift = {lift}");
}

#[test]
fn floor_out_of_range_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_table1(dir.path());
    let output = run(&["optimize", "--data", data.to_str().unwrap(), "--L", "1.5"]);
    assert_eq!(code(&output), 1);
    assert!(stderr(&output).contains("L must lie in [0,1]"));
}

#[test]
fn unknown_exclusion_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_table1(dir.path());
    let output = run(&[
        "optimize",
        "--data",
        data.to_str().unwrap(),
        "--L",
        "0.5",
        "--exclude",
        "nope",
    ]);
    assert_eq!(code(&output), 3);
    assert!(stderr(&output).contains("unknown feature"));
}

#[test]
fn missing_file_is_a_runtime_error() {
    let output = run(&["validate", "--data", "/no/such/file.json"]);
    assert_eq!(code(&output), 3);
}

#[test]
fn csv_input_with_percent_unit() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("table1.csv");
    std::fs::write(
        &data,
        "feature,label,q,p\n\
         age,t1,7.28,16.27\n\
         age,t2,26.00,49.92\n\
         age,t3,27.75,19.88\n\
         age,t4,19.10,7.63\n\
         age,t5,12.50,2.76\n\
         age,t6,7.27,3.64\n",
    )
    .unwrap();
    let output = run(&[
        "optimize",
        "--data",
        data.to_str().unwrap(),
        "--unit",
        "percent",
        "--L",
        "0.30",
    ]);
    assert_eq!(code(&output), 0, "stderr: {}", stderr(&output));
    let strategy: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert!((strategy["lift"].as_f64().unwrap() - 1.99).abs() < 0.01);
}

#[test]
fn csv_and_json_outputs_encode_the_same_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_table1(dir.path());
    let args = |format: &str| {
        vec![
            "optimize".to_string(),
            "--data".into(),
            data.to_str().unwrap().into(),
            "--L".into(),
            "0.30".into(),
            "--buy-rate".into(),
            "0.01".into(),
            "--audience".into(),
            "1000000".into(),
            "--format".into(),
            format.into(),
        ]
    };
    let json_out = run(&args("json").iter().map(String::as_str).collect::<Vec<_>>());
    let csv_out = run(&args("csv").iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(code(&json_out), 0);
    assert_eq!(code(&csv_out), 0);

    let strategy: serde_json::Value = serde_json::from_str(&stdout(&json_out)).unwrap();
    let csv_text = stdout(&csv_out);
    let mut lines = csv_text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let column = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];

    assert_eq!(
        column("l_floor").parse::<f64>().unwrap(),
        strategy["l_floor"].as_f64().unwrap()
    );
    assert_eq!(
        column("lift").parse::<f64>().unwrap(),
        strategy["lift"].as_f64().unwrap()
    );
    assert_eq!(
        column("coverage").parse::<f64>().unwrap(),
        strategy["coverage"].as_f64().unwrap()
    );
    assert_eq!(column("active_mask"), "1");
    assert_eq!(
        column("expected_sales").parse::<f64>().unwrap(),
        strategy["metrics"]["expected_sales"].as_f64().unwrap()
    );
}

#[test]
fn sweep_produces_monotone_lifts_and_the_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_table1(dir.path());
    let matrix = dir.path().join("matrix.csv");
    let output = run(&[
        "sweep",
        "--data",
        data.to_str().unwrap(),
        "--grid-points",
        "3",
        "--matrix-out",
        matrix.to_str().unwrap(),
    ]);
    assert_eq!(code(&output), 0, "stderr: {}", stderr(&output));
    let sweep: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    let points = sweep["points"].as_array().unwrap();
    assert_eq!(points.len(), 3);
    let lifts: Vec<f64> = points.iter().map(|p| p["lift"].as_f64().unwrap()).collect();
    assert!(lifts.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{lifts:?}");

    let matrix_text = std::fs::read_to_string(&matrix).unwrap();
    let lines: Vec<&str> = matrix_text.trim_end().lines().collect();
    assert_eq!(lines.len(), 2); // header + one feature
    assert_eq!(lines[0], "feature,0,0.5,1");
    assert!(lines[1].starts_with("age,"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_table1(dir.path());
    let args = [
        "sweep",
        "--data",
        data.to_str().unwrap(),
        "--grid-points",
        "7",
        "--buy-rate",
        "0.02",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, second.stdout);

    let demo_args = ["gen-demo", "--seed", "11"];
    let demo_first = run(&demo_args);
    let demo_second = run(&demo_args);
    assert_eq!(code(&demo_first), 0);
    assert_eq!(demo_first.stdout, demo_second.stdout);
}

#[test]
fn grid_file_and_grid_points_conflict() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_table1(dir.path());
    let grid = dir.path().join("grid.txt");
    std::fs::write(&grid, "0\n0.25\n0.5\n").unwrap();

    let conflicted = run(&[
        "sweep",
        "--data",
        data.to_str().unwrap(),
        "--grid-points",
        "3",
        "--grid-file",
        grid.to_str().unwrap(),
    ]);
    assert_eq!(code(&conflicted), 1);

    let output = run(&[
        "sweep",
        "--data",
        data.to_str().unwrap(),
        "--grid-file",
        grid.to_str().unwrap(),
    ]);
    assert_eq!(code(&output), 0, "stderr: {}", stderr(&output));
    let sweep: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(sweep["grid"].as_array().unwrap().len(), 3);
}

#[test]
fn gen_demo_writes_the_appendix_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("demo.json");
    let output = run(&[
        "gen-demo",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&output), 0, "stderr: {}", stderr(&output));
    let dataset: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let features = dataset["features"].as_array().unwrap();
    assert_eq!(features.len(), 24);
    assert_eq!(features[10]["name"], "Feature interests");
    assert_eq!(features[10]["types"].as_array().unwrap().len(), 42);

    let custom = dir.path().join("schema.json");
    std::fs::write(&custom, r#"[["gender", 3], ["tier", 5]]"#).unwrap();
    let output = run(&["gen-demo", "--schema", custom.to_str().unwrap(), "--seed", "1"]);
    assert_eq!(code(&output), 0);
    let dataset: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(dataset["features"].as_array().unwrap().len(), 2);
}

#[test]
fn freq_reads_a_saved_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_table1(dir.path());
    let saved = dir.path().join("sweep.json");
    let sweep = run(&[
        "sweep",
        "--data",
        data.to_str().unwrap(),
        "--grid-points",
        "3",
        "--out",
        saved.to_str().unwrap(),
    ]);
    assert_eq!(code(&sweep), 0);

    let freq = run(&["freq", "--sweep", saved.to_str().unwrap()]);
    assert_eq!(code(&freq), 0, "stderr: {}", stderr(&freq));
    let text = stdout(&freq);
    let lines: Vec<&str> = text.trim_end().lines().collect();
    assert_eq!(lines[0], "feature,count");
    assert!(lines[1].starts_with("age,"), "{text}");
}

#[test]
fn groups_flag_adds_the_correlation_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("two.json");
    std::fs::write(
        &data,
        r#"{ "features": [
            { "name": "A", "types": [
                { "label": "a1", "q": 0.5, "p": 0.8 },
                { "label": "a2", "q": 0.5, "p": 0.2 } ] },
            { "name": "B", "types": [
                { "label": "b1", "q": 0.25, "p": 0.5 },
                { "label": "b2", "q": 0.75, "p": 0.5 } ] }
        ] }"#,
    )
    .unwrap();
    let groups = dir.path().join("groups.json");
    std::fs::write(&groups, r#"[["A", "B"]]"#).unwrap();

    let output = run(&[
        "sweep",
        "--data",
        data.to_str().unwrap(),
        "--grid-points",
        "3",
        "--groups",
        groups.to_str().unwrap(),
    ]);
    assert_eq!(code(&output), 0, "stderr: {}", stderr(&output));
    let sweep: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    let correlation = sweep["correlation"].as_array().unwrap();
    assert_eq!(correlation[0]["violation"], true);
    assert_eq!(correlation[0]["keep"], "A");
}

#[test]
fn dump_instance_writes_the_debug_format() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_table1(dir.path());
    let dump = dir.path().join("instance.json");
    let output = run(&[
        "optimize",
        "--data",
        data.to_str().unwrap(),
        "--L",
        "0.30",
        "--dump-instance",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(code(&output), 0);
    let text = std::fs::read_to_string(&dump).unwrap();
    assert!(text.starts_with("{\"capacity\": 1.20397"), "{text}");
    assert!(text.contains("\"k\": 6"));
}

#[test]
fn help_exits_zero() {
    let output = run(&["--help"]);
    assert_eq!(code(&output), 0);
    assert!(stdout(&output).contains("sweep"));
}
