//! End-to-end runs of the installed binary: exit codes, file outputs, and
//! the byte-identical determinism contract.

use serde_json::json;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wulfflab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_tension(path: &Path, dirs: &[[f64; 2]]) {
    let spec = json!({
        "dim": 2,
        "samples": dirs.iter().map(|d| json!({ "dir": [d[0], d[1]], "value": 1.0 }))
            .collect::<Vec<_>>(),
    });
    std::fs::write(path, spec.to_string()).unwrap();
}

#[test]
fn constant_tension_builds_the_disc() {
    let dir = tempfile::tempdir().unwrap();
    let tension = dir.path().join("t.json");
    let dirs: Vec<[f64; 2]> = (0..64)
        .map(|i| {
            let th = 2.0 * std::f64::consts::PI * i as f64 / 64.0;
            [th.cos(), th.sin()]
        })
        .collect();
    write_tension(&tension, &dirs);
    let out = dir.path().join("disc.json");
    let r = run(&["build-wulff", "--input", tension.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let file: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let vol = file["volume"].as_f64().unwrap();
    assert!((vol - std::f64::consts::PI).abs() <= 1e-3 * std::f64::consts::PI, "{vol}");
    assert_eq!(file["verts"].as_array().unwrap().len(), 64);
}

#[test]
fn four_directions_build_the_square() {
    let dir = tempfile::tempdir().unwrap();
    let tension = dir.path().join("t.json");
    write_tension(&tension, &[[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]);
    let out = dir.path().join("sq.json");
    let r = run(&["build-wulff", "--input", tension.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0));
    let file: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let verts = file["verts"].as_array().unwrap();
    assert_eq!(verts.len(), 4);
    // Normalized to unit-ball volume, so the half-width is sqrt(pi)/2.
    let hw = 0.5 * std::f64::consts::PI.sqrt();
    for v in verts {
        assert!((v[0].as_f64().unwrap().abs() - hw).abs() <= 1e-9);
        assert!((v[1].as_f64().unwrap().abs() - hw).abs() <= 1e-9);
    }
}

#[test]
fn two_directions_are_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let tension = dir.path().join("t.json");
    write_tension(&tension, &[[1.0, 0.0], [-1.0, 0.0]]);
    let r = run(&["build-wulff", "--input", tension.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("span"));
}

#[test]
fn unknown_suites_and_missing_files_are_input_errors() {
    assert_eq!(run(&["verify", "nosuch"]).status.code(), Some(2));
    assert_eq!(
        run(&["perimeter", "--input", "/nonexistent.json", "--shape", "body:disc"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["perimeter", "--input", "fixture:disc", "--shape", "body:nosuch"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn failing_verification_exits_one() {
    // The john suite carries the known-red growth clause.
    let r = run(&["verify", "john"]);
    assert_eq!(r.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&r.stdout);
    assert!(stdout.contains("FAIL"), "{stdout}");
}

#[test]
fn passing_verification_exits_zero_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let r = run(&["verify", "wulff", "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stdout));
    let stdout = String::from_utf8_lossy(&r.stdout);
    assert_eq!(stdout.matches("PASS").count(), 2);
    let items: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(items.as_array().unwrap().iter().all(|i| i["passed"].as_bool().unwrap()));
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let r = run(&[
            "select",
            "--input",
            "fixture:star",
            "--seed",
            "11",
            "--shape",
            "body:disc",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let s1 = run(&["whitney", "--input", "fixture:lshape", "--max-level", "6", "--format", "svg"]);
    let s2 = run(&["whitney", "--input", "fixture:lshape", "--max-level", "6", "--format", "svg"]);
    assert_eq!(s1.stdout, s2.stdout);
    assert!(!s1.stdout.is_empty());
}

#[test]
fn seeds_regenerate_fixtures() {
    let same: Vec<Output> = (0..2)
        .map(|_| run(&["asymmetry", "--input", "fixture:star", "--seed", "7", "--shape", "body:square"]))
        .collect();
    assert_eq!(same[0].stdout, same[1].stdout);
    let other = run(&["asymmetry", "--input", "fixture:star", "--seed", "8", "--shape", "body:square"]);
    assert_ne!(same[0].stdout, other.stdout);
}

#[test]
fn thread_cap_env_is_validated() {
    let ok = bin()
        .env("WULFFLAB_THREADS", "2")
        .args(["perimeter", "--input", "fixture:square", "--shape", "body:disc"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = bin()
        .env("WULFFLAB_THREADS", "zero")
        .args(["perimeter", "--input", "fixture:square", "--shape", "body:disc"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn plot_renders_every_report_kind() {
    let dir = tempfile::tempdir().unwrap();

    let wh = dir.path().join("wh.json");
    run(&["whitney", "--input", "fixture:cusp", "--max-level", "6", "--out", wh.to_str().unwrap()]);
    let svg = run(&["plot", "--input", wh.to_str().unwrap()]);
    assert_eq!(svg.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&svg.stdout).contains("<rect"));

    let jn = dir.path().join("jn.json");
    run(&["john", "--input", "fixture:square", "--max-level", "6", "--out", jn.to_str().unwrap()]);
    let svg = run(&["plot", "--input", jn.to_str().unwrap()]);
    assert_eq!(svg.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&svg.stdout).contains("J = "));

    let sweep = dir.path().join("sweep.csv");
    run(&["qwi-sweep", "--out", sweep.to_str().unwrap()]);
    let svg = run(&["plot", "--input", sweep.to_str().unwrap()]);
    assert_eq!(svg.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&svg.stdout).contains("<circle"));

    let junk = dir.path().join("junk.txt");
    std::fs::write(&junk, "not a report").unwrap();
    assert_eq!(run(&["plot", "--input", junk.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn euclidean_perimeter_falls_out_of_the_disc_body() {
    let r = run(&["perimeter", "--input", "fixture:square", "--shape", "body:disc"]);
    assert_eq!(r.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert!((v["perimeter"].as_f64().unwrap() - 4.0).abs() <= 1e-9);
}
