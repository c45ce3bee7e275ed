use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use curvdec::io::TensorFile;
use curvdec::report::DecompositionReport;

fn curvdec(args: &[&str], tol_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_curvdec"));
    cmd.args(args).env_remove("CURVDEC_TOL");
    if let Some(t) = tol_env {
        cmd.env("CURVDEC_TOL", t);
    }
    cmd.output().expect("spawn curvdec")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8")
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut all = vec!["gen"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let out = curvdec(&all, None);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn gen_to_file_matches_gen_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--space", "R", "--geometry", "kahler", "--p", "1", "--q", "1", "--seed", "12"];
    let path = gen(dir.path(), "r.json", &args);
    let mut all = vec!["gen"];
    all.extend_from_slice(&args);
    let out = curvdec(&all, None);
    assert_eq!(std::fs::read(&path).unwrap(), out.stdout);
    let f = TensorFile::from_json(&stdout(&out)).unwrap();
    assert_eq!(f.to_json().unwrap(), stdout(&out));
}

#[test]
fn different_seeds_give_different_tensors() {
    let a = curvdec(&["gen", "--space", "P", "--q", "4", "--seed", "1"], None);
    let b = curvdec(&["gen", "--space", "P", "--q", "4", "--seed", "2"], None);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn decompose_report_round_trips_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen(dir.path(), "s.json", &["--space", "RNABLA", "--geometry", "kahler", "--q", "2", "--seed", "3"]);
    let report = dir.path().join("report.json");
    let out = curvdec(&["decompose", "--input", input.to_str().unwrap(), "--output", report.to_str().unwrap(), "--seed", "3"], None);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&report).unwrap();
    let parsed = DecompositionReport::from_json(&text).unwrap();
    assert!(parsed.passed());
    assert_eq!(parsed.seed, Some(3));
    assert!(parsed.component("q0").is_some());
    assert_eq!(parsed.to_json().unwrap(), text);
}

#[test]
fn each_input_kind_decomposes() {
    let dir = tempfile::tempdir().unwrap();
    for (i, args) in [
        ["--space", "R", "--geometry", "riemann", "--p", "2", "--q", "3"],
        ["--space", "P", "--geometry", "riemann", "--p", "1", "--q", "4"],
        ["--space", "P", "--geometry", "kahler", "--p", "1", "--q", "1"],
        ["--space", "RNABLA", "--geometry", "riemann", "--p", "0", "--q", "3"],
    ]
    .iter()
    .enumerate()
    {
        let mut a = args.to_vec();
        a.extend_from_slice(&["--seed", "9"]);
        let input = gen(dir.path(), &format!("in{i}.json"), &a);
        let out = curvdec(&["decompose", "--input", input.to_str().unwrap()], None);
        assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(DecompositionReport::from_json(&stdout(&out)).unwrap().passed());
    }
}

#[test]
fn geometry_flag_must_agree_with_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen(dir.path(), "r.json", &["--space", "R", "--q", "4", "--seed", "1"]);
    let p = input.to_str().unwrap();
    assert_eq!(code(&curvdec(&["verify", "--input", p, "--geometry", "riemann"], None)), 0);
    assert_eq!(code(&curvdec(&["verify", "--input", p, "--geometry", "kahler"], None)), 2);
}

#[test]
fn tolerance_comes_from_flag_or_environment() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen(dir.path(), "r.json", &["--space", "RNABLA", "--q", "4", "--seed", "5"]);
    let p = input.to_str().unwrap();
    assert_eq!(code(&curvdec(&["verify", "--input", p], Some("1e-9"))), 0);
    assert_eq!(code(&curvdec(&["verify", "--input", p], Some("0"))), 1);
    assert_eq!(code(&curvdec(&["--tol", "1e-9", "verify", "--input", p], Some("0"))), 0);
    assert_eq!(code(&curvdec(&["verify", "--input", p], Some("tight"))), 2);
}

#[test]
fn dims_prints_oracle_dimensions() {
    let one = curvdec(&["dims", "--space", "RNABLA", "--q", "4"], None);
    assert_eq!((code(&one), stdout(&one)), (0, "60\n".to_string()));
    let table = curvdec(&["dims", "--geometry", "kahler", "--q", "2"], None);
    assert_eq!(code(&table), 0);
    let text = stdout(&table);
    assert!(text.contains("R_U        9") && text.contains("RNABLA_U   24") && text.contains("P_U        12"), "{text}");
}

#[test]
fn usage_errors_exit_2_without_panicking() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "").unwrap();
    let huge = dir.path().join("huge.json");
    std::fs::write(&huge, r#"{"kind":"vector","geometry":"riemann","p":18446744073709551615,"q":1,"dims":[1],"data":[0]}"#).unwrap();
    for args in [
        vec![],
        vec!["gen", "--space", "R", "--q", "4"],
        vec!["gen", "--space", "Q", "--q", "4", "--seed", "1"],
        vec!["gen", "--space", "R", "--q", "1", "--seed", "1"],
        vec!["gen", "--space", "RNABLA", "--q", "40", "--seed", "1"],
        vec!["dims", "--space", "R", "--p", "0", "--q", "0"],
        vec!["decompose", "--input", empty.to_str().unwrap()],
        vec!["verify", "--input", huge.to_str().unwrap()],
        vec!["selftest", "--seed", "x"],
    ] {
        let out = curvdec(&args, None);
        assert_eq!(code(&out), 2, "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(!err.contains("panicked"), "{args:?}: {err}");
    }
    assert_eq!(code(&curvdec(&["--help"], None)), 0);
    assert_eq!(code(&curvdec(&["--version"], None)), 0);
}
