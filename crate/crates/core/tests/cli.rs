use std::process::{Command, Output};

use asylum_match::bundled::EXAMPLE_NAMES;
use asylum_match::parse_instance;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asylum-match")).args(args).output().expect("binary runs")
}

fn last_line(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).lines().last().unwrap_or_default().to_string()
}

#[test]
fn reproduce_every_example() {
    for name in EXAMPLE_NAMES {
        let out = cli(&["reproduce", name]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stdout));
        assert_eq!(last_line(&out), "VERDICT: pass 0");
    }
}

#[test]
fn failing_audit_exits_nonzero_with_witness_count() {
    let out = cli(&["audit", "choice", "example1", "--state", "m", "--property", "sub"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(last_line(&out), "VERDICT: fail 1");
    let out = cli(&["audit", "choice", "example2", "--state", "m", "--property", "sub", "--variant", "completed"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(last_line(&out), "VERDICT: pass 0");
}

#[test]
fn structural_examples_only_load_for_choice_audits() {
    let out = cli(&["audit", "choice", "example3", "--state", "m", "--property", "pinned-sub"]);
    assert_eq!(out.status.code(), Some(1));
    let out = cli(&["solve", "example3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("aggregate quota"));
}

#[test]
fn stability_commands() {
    let out = cli(&["audit", "stability", "example5", "--enumerate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("stable allocations: 0"));
    let out = cli(&["audit", "stability", "example7", "--enumerate"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("stable allocations: 2"));
}

#[test]
fn solve_prints_the_outcome_and_trace() {
    let out = cli(&["solve", "example6", "--trace"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("outcome: {(a1,m1,1), (a2,m3,1), (a3,m2,1), (a4,m4,2)}"));
    assert!(text.lines().any(|l| l == "a2\t(a2,m3,1)"));
}

#[test]
fn manipulation_audits() {
    let out = cli(&["audit", "sp", "example6"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("manipulation by a2"));
    let out = cli(&["audit", "nom", "example6", "--others", "all:1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("not obvious"));
}

#[test]
fn generate_is_deterministic_and_solvable() {
    let args = ["generate", "--seed", "11", "--profile", "homogeneous", "--dims", "3x2x2"];
    let a = cli(&args);
    let b = cli(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let inst = parse_instance(&text).unwrap();
    assert!(inst.is_homogeneous());

    let path = std::env::temp_dir().join(format!("asylum-match-cli-{}.json", std::process::id()));
    std::fs::write(&path, &text).unwrap();
    let out = cli(&["solve", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(last_line(&out), "VERDICT: pass 0");
}

#[test]
fn trace_shows_the_step_table() {
    let out = cli(&["trace", "example1", "--state", "m", "--offer", "a1:1,a1:2,a2:2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("result: {(a1,m,1), (a2,m,2)}"));
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(cli(&["solve", "no-such-file.json"]).status.code(), Some(2));
    assert_eq!(cli(&["solve", "example1", "--order", "sideways"]).status.code(), Some(2));
}
