use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn kanbar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kanbar")).args(args).output().expect("run kanbar")
}

fn write(name: &str, text: &str) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("report is JSON")
}

#[test]
fn dangling_reference_is_an_input_error() {
    let p = write(
        "dangling.json",
        r#"{"schema": "kanbar/1", "ring": {"kind": "Z"}, "objects": [
            {"name": "f", "kind": "map", "source": "ghost", "target": "ghost"}
        ]}"#,
    );
    let o = kanbar(&["validate", "--file", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("ReferenceError") && e.contains("`f`") && e.contains("`ghost`"), "{e}");
    assert!(o.stdout.is_empty());
}

#[test]
fn parse_error_reports_line_and_column() {
    let p = write("broken.json", "{\n  \"schema\": \"kanbar/1\",\n  \"ring\": {\"kind\": \"Z\"},,\n}\n");
    let o = kanbar(&["validate", "--file", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("ParseError at line 3"), "{e}");
    assert!(e.contains("column"), "{e}");
}

#[test]
fn empty_degree_range_gives_empty_tables() {
    let o = kanbar(&["homology", "--fixture", "complexes", "--object", "twice", "--degrees", "1..0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&o);
    assert_eq!(r["results"][0]["homology"], Value::Array(vec![]));
    assert_eq!(r["command"]["degrees"], serde_json::json!([1, 0]));
}

#[test]
fn failed_expectation_exits_one() {
    let p = write(
        "wrong.json",
        r#"{"schema": "kanbar/1", "ring": {"kind": "Z"},
            "objects": [{"name": "c", "kind": "complex", "gens": [["x", 0], ["y", 1]], "d": [["y", "x", 2]]}],
            "expect": [{"command": "homology", "object": "c", "groups": ["Z", "0"]}]}"#,
    );
    let o = kanbar(&["report", "--file", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&o);
    assert_eq!(r["ok"], Value::Bool(false));
    assert_eq!(r["expectations"][0]["pass"], Value::Bool(false));
}

#[test]
fn refused_computation_is_recorded_per_object() {
    let o = kanbar(&["homology", "--fixture", "complexes"]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&o);
    let results = r["results"].as_array().unwrap();
    let refused: Vec<&str> = results.iter().filter(|x| x.get("error").is_some()).filter_map(|x| x["object"].as_str()).collect();
    assert_eq!(refused, ["periodic"]);
    assert!(results.iter().any(|x| x["object"] == "twice" && x["groups"] == serde_json::json!(["Z/2", "0"])));
}

#[test]
fn usage_errors() {
    for args in [
        vec!["report", "--fixture", "nonexistent"],
        vec!["compare", "--fixture", "phi_free"],
        vec!["compare", "--fixture", "phi_free", "--scenario", "nonsense"],
        vec!["validate", "--fixture", "phi_free", "--object", "nobody"],
        vec!["kan", "--fixture", "phi_free", "--bounds", "depth=3"],
        vec!["validate"],
    ] {
        let o = kanbar(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).starts_with("error: "), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn bounds_override_changes_the_report() {
    let o = kanbar(&["compare", "--fixture", "phi_free", "--scenario", "phi", "--bounds", "n_max=4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = report(&o);
    assert_eq!(r["bounds"]["n_max"], 4);
    assert_eq!(r["results"][0]["holds"], Value::Bool(true));
}

#[test]
fn timing_is_opt_in() {
    let o = kanbar(&["validate", "--fixture", "complexes", "--timing"]);
    let r = report(&o);
    assert!(r["timing"]["total_ms"].is_u64());
    assert!(r["results"][0]["ms"].is_u64());
}

#[test]
fn fixtures_are_listed() {
    let o = kanbar(&["fixtures"]);
    let names: Vec<String> = String::from_utf8(o.stdout).unwrap().lines().map(str::to_string).collect();
    assert_eq!(names.len(), kanbar::FIXTURES.len());
    assert!(names.contains(&"z2_group_ring_cat".to_string()));
}
