use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sl2morph")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn setup_writes_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let o = run(&["setup", "--p", "997", "--seed", "1", "--cache-dir", cache]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("setup p=997 seed=1"));
    assert!(dir.path().join("p997-seed1/setup.txt").exists());
}

#[test]
fn cached_and_fresh_runs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let fresh = run(&["map", "--p", "13", "--seed", "1", "1,1;0,1"]);
    let first = run(&["map", "--p", "13", "--seed", "1", "--cache-dir", cache, "1,1;0,1"]);
    let second = run(&["map", "--p", "13", "--seed", "1", "--cache-dir", cache, "1,1;0,1"]);
    assert_eq!(fresh.status.code(), Some(0));
    assert_eq!(stdout(&fresh), stdout(&first));
    assert_eq!(stdout(&first), stdout(&second));
    for f in ["setup.txt", "toolbox.txt", "basis.txt"] {
        assert!(dir.path().join("p13-seed1").join(f).exists(), "{f}");
    }
    let handle = stdout(&fresh);
    assert_eq!(handle.trim().len(), 72);
}

#[test]
fn toolbox_prints_twelve_items() {
    let o = run(&["toolbox", "--p", "13", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for name in [
        "setup_involution",
        "pgl2_gens",
        "plane_involutions",
        "order3",
        "unity_points",
        "centralizer_gens",
        "zero_point",
        "point_111",
        "eo ",
        "eo_bits",
        "order4",
        "identity",
    ] {
        assert!(out.lines().any(|l| l.starts_with(name)), "{name}");
    }
}

#[test]
fn basis_reports_progress() {
    let o = run(&["basis", "--p", "97", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("basis stage=frame attempt=1"));
    assert!(out.contains("basis stage=done"));
    let m = out.lines().find(|l| l.starts_with("M ")).unwrap();
    assert_eq!(m.split_whitespace().count(), 19);
}

#[test]
fn map_with_trace() {
    let o = run(&["map", "--p", "13", "--seed", "1", "--trace", "2,1;3,2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let first = out.lines().next().unwrap().to_string();
    let last = out.lines().last().unwrap();
    assert_eq!(last, format!("output {first}"));
    assert!(out.lines().any(|l| l.starts_with("y_involution 0 ")));
}

#[test]
fn verify_passes_and_is_deterministic() {
    let a = run(&["verify", "--p", "13", "--seed", "1", "--samples", "100"]);
    assert_eq!(a.status.code(), Some(0));
    let out = stdout(&a);
    assert!(out.contains("SUITE orders cases=100 failures=0 seed=1"));
    assert!(out.contains("SUITE homomorphism cases=100 failures=0 seed=1"));
    assert!(out.contains("SUITE steinberg cases=400 failures=0 seed=1"));
    let b = run(&["verify", "--p", "13", "--seed", "1", "--samples", "100", "--sequential"]);
    assert_eq!(stdout(&b), out);
    let one = run(&["verify", "--p", "97", "--suite", "orders", "--samples", "5"]);
    assert_eq!(stdout(&one).trim(), "SUITE orders cases=5 failures=0 seed=1");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["verify"],
        vec!["verify", "--p", "12"],
        vec!["verify", "--p", "11"],
        vec!["map", "--p", "13", "1,1;1,1"],
        vec!["map", "--p", "13", "nonsense"],
        vec!["verify", "--p", "13", "--suite", "bogus"],
        vec!["verify", "--p", "13", "--samples", "0"],
        vec!["frobnicate"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}
