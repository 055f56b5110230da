use std::path::PathBuf;
use std::process::Command;

use qtlab::normal_form::classify;
use qtlab::VectorMatrix;
use qtlab_cli::{run, run_with_stdin, CommandResult};
use serde_json::{json, Value};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn with_input(args: &[&str], input: &str) -> CommandResult {
    run_with_stdin(std::iter::once("qtlab").chain(args.iter().copied()), &mut input.as_bytes())
}

fn body(r: &CommandResult) -> Value {
    serde_json::from_str(&r.stdout).unwrap()
}

#[test]
fn file_and_stdin_agree() {
    let path = data("cylinder.json");
    let text = std::fs::read_to_string(&path).unwrap();
    for sub in ["validate", "classify", "betti", "cohomology"] {
        let from_file = run(["qtlab", sub, "--file", path.to_str().unwrap()]);
        let from_stdin = with_input(&[sub], &text);
        assert_eq!(from_file, from_stdin, "{sub}");
    }
}

#[test]
fn spec_examples() {
    let cyclic = std::fs::read_to_string(data("cyclic.json")).unwrap();
    let r = with_input(&["validate"], &cyclic);
    assert_eq!((r.code, r.stdout.trim()), (0, r#"{"valid":true}"#));
    let identity = r#"{"blocks":[[[1],[0]],[[0],[1]]],"mode":"int","shape":[1,1]}"#;
    assert_eq!(body(&with_input(&["classify"], identity))["status"], json!("unipotent"));
    let cylinder = std::fs::read_to_string(data("cylinder.json")).unwrap();
    assert_eq!(body(&with_input(&["betti"], &cylinder)), json!({ "ranks": [1, 2, 2, 1] }));
}

#[test]
fn exit_codes() {
    let invalid = std::fs::read_to_string(data("invalid.json")).unwrap();
    assert_eq!(with_input(&["validate"], &invalid).code, 1);
    assert_eq!(with_input(&["betti"], &invalid).code, 1);
    let signed = std::fs::read_to_string(data("signed.json")).unwrap();
    assert_eq!(with_input(&["classify"], &signed).code, 1);
    assert_eq!(with_input(&["frobnicate"], "").code, 2);
    assert_eq!(with_input(&["census"], "").code, 2);
    assert_eq!(with_input(&["restrict", "--factor", "3"], &signed).code, 2);
    let help = with_input(&["--help"], "");
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("census"));
}

#[test]
fn malformed_input_reports_position() {
    let text = std::fs::read_to_string(data("truncated.json")).unwrap();
    let r = with_input(&["validate"], &text);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 2 column"), "{}", r.stderr);
    let r = with_input(&["validate"], r#"{"blocks":[[[1]]],"mode":"gf2","shape":[1,1]}"#);
    assert_eq!(r.code, 2);
    let r = with_input(&["validate"], r#"{"blocks":[[[3]]],"mode":"gf2","shape":[1]}"#);
    assert_eq!(r.code, 2);
}

#[test]
fn normalize_round_trip() {
    let signed = std::fs::read_to_string(data("signed.json")).unwrap();
    let normalized = with_input(&["normalize"], &signed);
    assert_eq!(normalized.code, 0);
    assert_eq!(body(&normalized)["flips"], json!([[1, 1]]));
    for sub in ["classify", "betti", "cohomology", "product-search"] {
        let via_cli = with_input(&[sub], &normalized.stdout);
        assert_eq!(via_cli.code, 0, "{sub}");
    }
    let a = VectorMatrix::from_json_str(&signed).unwrap();
    let (b, _) = a.normalize_signs().unwrap();
    let in_process = classify(&b).unwrap().to_json();
    assert_eq!(body(&with_input(&["classify"], &normalized.stdout)), in_process);
}

#[test]
fn gf2_flag_reduces_input() {
    let cylinder = std::fs::read_to_string(data("cylinder.json")).unwrap();
    let r = with_input(&["classify", "--gf2"], &cylinder);
    assert_eq!(r.code, 0);
    assert_eq!(body(&r)["normal_form"]["mode"], json!("gf2"));
}

#[test]
fn census_writes_representatives() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reps");
    let r = with_input(&["census", "--shape", "1,1", "--bound", "2", "--out", out.to_str().unwrap()], "");
    assert_eq!(r.code, 0);
    let classes = body(&r)["classes"].as_u64().unwrap() as usize;
    let mut files: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert_eq!(files.len(), classes);
    for f in files {
        let a = VectorMatrix::from_json_str(&std::fs::read_to_string(f).unwrap()).unwrap();
        assert!(a.is_valid().valid);
    }
}

#[test]
fn census_jobs_do_not_change_output() {
    let one = with_input(&["census", "--shape", "1,1,1", "--bound", "1", "--dedupe"], "");
    let four = with_input(&["census", "--shape", "1,1,1", "--bound", "1", "--dedupe", "--jobs", "4"], "");
    assert_eq!(one, four);
}

#[test]
fn binary_honors_height_variable() {
    let exe = env!("CARGO_BIN_EXE_qtlab");
    let path = data("nonbott.json");
    let output = Command::new(exe)
        .args(["product-search", "--file", path.to_str().unwrap()])
        .env("QTLAB_HEIGHT", "2")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(v, json!({ "status": "none_up_to_bound", "height": 2 }));
    let explicit = Command::new(exe)
        .args(["product-search", "--height", "3", "--file", path.to_str().unwrap()])
        .env("QTLAB_HEIGHT", "2")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&explicit.stdout).unwrap();
    assert_eq!(v["height"], json!(3));
}

#[test]
fn binary_reads_stdin() {
    use std::io::Write;
    let exe = env!("CARGO_BIN_EXE_qtlab");
    let mut child = Command::new(exe)
        .arg("betti")
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(std::fs::read_to_string(data("cylinder.json")).unwrap().as_bytes())
        .unwrap();
    let output = child.wait_with_output().unwrap();
    assert_eq!(String::from_utf8(output.stdout).unwrap().trim(), r#"{"ranks":[1,2,2,1]}"#);
}
