use std::fs;
use std::process::{Command, Output};

use freeplane::fixtures;
use freeplane::io::{parse_structure, parse_trace, structure_to_string, ParseOptions};
use serde_json::Value;

fn freeplane(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freeplane"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn repeated_runs_are_byte_identical() {
    let runs: &[&[&str]] = &[
        &["extend", "fixture:quad", "--stages", "3"],
        &["core", "fixture:star"],
        &["lattice", "fixture:fano"],
        &["embed", "fixture:quad", "fixture:fano", "--kind", "incidence", "--all"],
        &["aut", "fixture:desargues", "--list"],
        &["harness", "spb", "--encoder", "broken", "--jobs", "3"],
        &["sample", "--count", "5", "--seed", "11"],
    ];
    for args in runs {
        let a = freeplane(args);
        let b = freeplane(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert!(!a.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn jobs_do_not_change_harness_output() {
    let one = freeplane(&["harness", "spb", "--encoder", "broken", "--jobs", "1"]);
    let four = freeplane(&["harness", "spb", "--encoder", "broken", "--jobs", "4"]);
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.status.code(), Some(1));
}

#[test]
fn trace_output_parses_back() {
    let o = freeplane(&["extend", "fixture:quad", "--stages", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let trace = parse_trace(&stdout(&o), ParseOptions::default()).unwrap();
    let sizes: Vec<_> = trace.stages.iter().map(|s| s.size()).collect();
    assert_eq!(sizes, [(4, 6), (7, 6), (7, 9), (13, 9), (13, 33)]);
}

#[test]
fn structure_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("desargues.json");
    let desargues = fixtures::desargues();
    fs::write(&input, structure_to_string(&desargues)).unwrap();
    let out = dir.path().join("core.json");
    let o = freeplane(&["core", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty(), "--out leaves stdout empty");
    let report: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["confined"], Value::Bool(true));
    let core = parse_structure(&report["core"].to_string(), ParseOptions::default()).unwrap();
    assert_eq!(core, desargues);
    assert_eq!(structure_to_string(&core), structure_to_string(&desargues));
}

#[test]
fn exit_codes() {
    assert_eq!(freeplane(&["validate", "fixture:fano"]).status.code(), Some(0));
    assert_eq!(freeplane(&["validate", "fixture:two_points"]).status.code(), Some(1));
    assert_eq!(
        freeplane(&["embed", "fixture:quad", "fixture:fano"]).status.code(),
        Some(1)
    );
    assert_eq!(
        freeplane(&["embed", "fixture:quad", "fixture:fano", "--kind", "incidence"]).status.code(),
        Some(0)
    );
    assert_eq!(
        freeplane(&["extend", "fixture:quad", "--stages", "6", "--budget", "30"]).status.code(),
        Some(2)
    );
    assert_eq!(
        freeplane(&["embed", "fixture:fano", "fixture:fano", "--all", "--node-cap", "10"]).status.code(),
        Some(2)
    );
    assert_eq!(freeplane(&["validate", "fixture:nope"]).status.code(), Some(3));
    assert_eq!(freeplane(&["frobnicate"]).status.code(), Some(3));
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\n\"points\": [\"a\",]\n}").unwrap();
    let o = freeplane(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("bad.json:2:"), "{err}");
}

#[test]
fn embedding_file_drives_extension() {
    let dir = tempfile::tempdir().unwrap();
    let found = json(&freeplane(&["embed", "fixture:quad", "fixture:quad", "--kind", "lattice", "--limit", "1"]));
    let file = dir.path().join("f.json");
    fs::write(&file, serde_json::to_string(&found["morphisms"][0]).unwrap()).unwrap();
    let o = freeplane(&[
        "harness",
        "extend",
        "--a",
        "fixture:quad",
        "--b",
        "fixture:quad",
        "--morphism",
        file.to_str().unwrap(),
        "--n",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["certificate"]["verified"], Value::Bool(true));
    assert_eq!(v["certificate"]["stage"], 3);
}

#[test]
fn plugin_encoder_over_stdio() {
    let o = freeplane(&["harness", "spb", "--encoder", "plugin:/bin/cat"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["passed"], Value::Bool(true));
    let missing = freeplane(&["harness", "spb", "--encoder", "plugin:/nonexistent/encoder"]);
    assert_ne!(missing.status.code(), Some(0));
}

#[test]
fn dot_formats() {
    let o = freeplane(&["lattice", "fixture:fano", "--format", "dot"]);
    assert!(stdout(&o).starts_with("digraph"));
    let o = freeplane(&["extend", "fixture:quad", "--stages", "2", "--format", "dot"]);
    assert_eq!(stdout(&o).matches("graph \"stage").count(), 3);
}

#[test]
fn core_flags() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("deletions.json");
    let o = freeplane(&["core", "fixture:star", "--require-plane-core", "--log", log.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "empty core is not a plane");
    let report = json(&o);
    assert_eq!(report["core_is_plane"], Value::Bool(false));
    let logged: Value = serde_json::from_str(&fs::read_to_string(&log).unwrap()).unwrap();
    assert_eq!(logged, report["deleted"]);
    let o = freeplane(&["core", "fixture:fano", "--require-plane-core"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["core_is_plane"], Value::Bool(true));
}

#[test]
fn side_files() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("stages.dot");
    let o = freeplane(&["extend", "fixture:quad", "--stages", "2", "--emit-dot", dot.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(parse_trace(&stdout(&o), ParseOptions::default()).is_ok());
    assert_eq!(fs::read_to_string(&dot).unwrap().matches("graph \"stage").count(), 3);

    let hasse = dir.path().join("hasse.dot");
    let o = freeplane(&["lattice", "fixture:fano", "--check", "--emit-hasse", hasse.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&hasse).unwrap().matches(" -> ").count(), 35);
    // two lines through the same two points: not a lattice of length 3
    let bad = dir.path().join("double.json");
    fs::write(
        &bad,
        r#"{"points": ["a", "b"], "lines": [{"name": "l", "points": ["a", "b"]}, {"name": "m", "points": ["a", "b"]}]}"#,
    )
    .unwrap();
    assert_eq!(freeplane(&["lattice", bad.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(freeplane(&["lattice", bad.to_str().unwrap(), "--check"]).status.code(), Some(1));
}
