use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "vpprod", "fixtures", name].iter().collect();
    p.display().to_string()
}

fn vpprod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vpprod")).args(args).output().unwrap()
}

fn fake_solver(dir: &std::path::Path, answer: &str) -> String {
    let p = dir.join(format!("solver-{answer}"));
    std::fs::write(&p, format!("#!/bin/sh\necho {answer}\n")).unwrap();
    std::fs::set_permissions(&p, std::os::unix::fs::PermissionsExt::from_mode(0o755)).unwrap();
    format!("fake={}", p.display())
}

#[test]
fn exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let div = fixture("div.rp");
    let prop = fixture("monotonicity.prop");
    for (answer, code) in [("sat", 0), ("unsat", 1), ("unknown", 2)] {
        let s = fake_solver(dir.path(), answer);
        let o = vpprod(&["run", &div, "--property", &prop, "--reduction", "(1,1)-lockstep(P1, P2)", "--solver", &s]);
        assert_eq!(o.status.code(), Some(code), "{}", String::from_utf8_lossy(&o.stderr));
        let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(report["solver"]["status"], answer);
    }
}

#[test]
fn usage_errors_exit_3() {
    let div = fixture("div.rp");
    let prop = fixture("monotonicity.prop");
    let o = vpprod(&["run", &div, "--property", &prop, "--reduction", "(1,1)-lockstep(P1,"]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("reduction error") && err.contains("parse error at 18"), "{err}");
    assert_eq!(vpprod(&["run", &div]).status.code(), Some(3));
    assert_eq!(vpprod(&["run", &div, "--property", &prop, "--mode", "fast"]).status.code(), Some(3));
    assert_eq!(vpprod(&["run", &div, "--property", &prop, "--solver", "nocommand"]).status.code(), Some(3));
    assert_eq!(vpprod(&["run", &div, "--property", &prop, "--solver", "gone=/nonexistent/solver"]).status.code(), Some(3));
    assert_eq!(vpprod(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(vpprod(&["--help"]).status.code(), Some(0));
}

#[test]
fn emits_artifacts_with_inline_property() {
    let dir = tempfile::tempdir().unwrap();
    let s = fake_solver(dir.path(), "sat");
    let out = dir.path().join("out");
    let o = vpprod(&[
        "run",
        &fixture("div.rp"),
        "--property",
        "copies: 2; pre: (and (<= n_1 n_2) (= d_1 d_2)); post: (<= q_1 q_2)",
        "--mode",
        "aut",
        "--entry",
        "div",
        "--solver",
        &s,
        "--timeout",
        "5",
        "--emit-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["product.txt", "problem.smt2", "report.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "verified");
    assert_eq!(report["mode"], "aut");
    assert_eq!(report["reduction"], "(1,1)-lockstep(P1, P2)");
    assert!(report["sizes"]["states"].as_u64().unwrap() > 0);
    assert!(report["products"].as_array().unwrap().iter().all(|p| p["within_bound"] == true));
}

#[test]
fn independence_and_enumeration() {
    let dir = tempfile::tempdir().unwrap();
    let deps = dir.path().join("deps");
    std::fs::write(&deps, "dep q := q + 1\ndep q := 0\n").unwrap();
    let o = vpprod(&["check-independence", &fixture("div.rp"), "--deps", deps.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["direction"], "head");
    assert_eq!(r["components"][0]["tail_independent"], false);
    std::fs::write(&deps, "dep nonsense\n").unwrap();
    let o = vpprod(&["check-independence", &fixture("div.rp"), "--deps", deps.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));

    let o = vpprod(&["debug", "enumerate", &fixture("div.rp"), "--copies", "2", "--max-len", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let lines: Vec<String> = String::from_utf8_lossy(&o.stdout).lines().map(str::to_string).collect();
    assert_eq!(lines.len(), 1);
    let shuffle = vpprod(&["debug", "enumerate", &fixture("div.rp"), "--copies", "2", "--max-len", "8", "--shuffle"]);
    let all: Vec<String> = String::from_utf8_lossy(&shuffle.stdout).lines().map(str::to_string).collect();
    assert!(all.contains(&lines[0]));
}
