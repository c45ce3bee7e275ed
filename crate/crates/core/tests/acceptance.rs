//! One pass/fail line per acceptance criterion. Criteria 1-10 come from the
//! binary's `selftest` over seeds 1..20; criterion 11 drives the CLI end to end.

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_curvdec");

fn curvdec(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("CURVDEC_TOL").output().expect("spawn curvdec")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn check_exit(problems: &mut Vec<String>, what: &str, out: &Output, want: i32) {
    if code(out) != want {
        problems.push(format!("{what}: exit {} (want {want}) {}", code(out), String::from_utf8_lossy(&out.stderr).trim()));
    }
}

fn cli_contract(dir: &Path) -> Vec<String> {
    let mut problems = Vec::new();
    let path = |name: &str| dir.join(name).to_string_lossy().into_owned();

    let good = path("good.json");
    let out = curvdec(&["gen", "--space", "RNABLA", "--p", "1", "--q", "3", "--seed", "7", "--out", &good]);
    check_exit(&mut problems, "gen", &out, 0);
    let again = curvdec(&["gen", "--space", "RNABLA", "--p", "1", "--q", "3", "--seed", "7"]);
    if std::fs::read(&good).ok().as_deref() != Some(again.stdout.as_slice()) {
        problems.push("gen is not byte-identical across runs".to_string());
    }
    check_exit(&mut problems, "decompose clean file", &curvdec(&["decompose", "--input", &good, "--output", &path("report.json")]), 0);
    check_exit(&mut problems, "verify clean file", &curvdec(&["verify", "--input", &good]), 0);

    let text = std::fs::read_to_string(&good).unwrap_or_default();
    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap_or_default();
    if let Some(x) = value.get_mut("data").and_then(|d| d.get_mut(37)) {
        *x = serde_json::json!(x.as_f64().unwrap_or(0.0) * 1.1 + 0.1);
    }
    let bad = path("bad.json");
    std::fs::write(&bad, value.to_string()).expect("write corrupted file");
    check_exit(&mut problems, "decompose corrupted file", &curvdec(&["decompose", "--input", &bad]), 1);
    check_exit(&mut problems, "verify corrupted file", &curvdec(&["verify", "--input", &bad]), 1);

    let junk = path("junk.json");
    std::fs::write(&junk, "{\"kind\": \"curvature\", \"data\": [1, 2").expect("write junk");
    check_exit(&mut problems, "malformed file", &curvdec(&["decompose", "--input", &junk]), 2);
    check_exit(&mut problems, "missing file", &curvdec(&["verify", "--input", &path("absent.json")]), 2);
    check_exit(&mut problems, "unknown subcommand", &curvdec(&["frobnicate"]), 2);
    check_exit(&mut problems, "bad tolerance", &curvdec(&["--tol", "-1", "verify", "--input", &good]), 2);
    problems
}

fn main() {
    let selftest = curvdec(&["selftest"]);
    let stdout = String::from_utf8_lossy(&selftest.stdout).into_owned();
    let mut all_pass = true;

    for id in 1..=10 {
        let prefix = format!("criterion {id:>2} ");
        let line = stdout.lines().find(|l| l.starts_with(&prefix));
        match line {
            Some(l) => {
                let pass = l.contains(" PASS (");
                all_pass &= pass;
                println!("{l}");
                if !pass {
                    for detail in stdout.lines().skip_while(|x| *x != l).skip(1).take_while(|x| x.starts_with("    ")) {
                        println!("{detail}");
                    }
                }
            }
            None => {
                all_pass = false;
                println!("criterion {id:>2} FAIL (no result line from selftest)");
            }
        }
    }

    let dir = tempfile::tempdir().expect("temp dir");
    let mut problems = cli_contract(dir.path());
    if code(&selftest) != 0 {
        problems.insert(0, format!("selftest exit {}", code(&selftest)));
    }
    let pass = problems.is_empty();
    all_pass &= pass;
    println!("criterion 11 {:<34} {}", "command-line contract", if pass { "PASS" } else { "FAIL" });
    for p in &problems {
        println!("    {p}");
    }

    if !all_pass {
        std::process::exit(1);
    }
}
