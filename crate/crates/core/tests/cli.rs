use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

fn gowers(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gowers")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn u4_of_constant_is_exactly_one() {
    let o = gowers(&["norm", "--input", &fixture("one.fn"), "--d", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("U4: ||f||^16 = 1 "), "{}", stdout(&o));
}

#[test]
fn eighth_cubic_norms() {
    let o = gowers(&["norm", "--input", &fixture("eighth_cubic.fn")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("U2: ||f||^4 = 3/4 "));
    assert!(out.contains("U3: ||f||^8 = 3/4 "));
    assert!(out.contains("U4: ||f||^16 = 1 "));
}

#[test]
fn random_norm_needs_space() {
    assert_eq!(gowers(&["norm"]).status.code(), Some(2));
    assert_eq!(gowers(&["norm", "--p", "4", "--n", "2"]).status.code(), Some(2));
    assert_eq!(gowers(&["norm", "--p", "5", "--n", "2", "--seed", "3"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(gowers(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(gowers(&["norm", "--input", "/definitely/missing"]).status.code(), Some(2));
    assert_eq!(gowers(&["pipeline", "--input", &fixture("one.fn"), "--strategy", "supplied"]).status.code(), Some(2));
    assert_eq!(gowers(&["integrate", "--input", &fixture("one.fn")]).status.code(), Some(2));
}

#[test]
fn rank_of_cubic_derivative() {
    let o = gowers(&["rank", "--input", &fixture("x1sq_x2_f3.form")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("bias = 7/27"), "{out}");
    assert!(out.contains("prank = 2"), "{out}");
}

#[test]
fn integrate_recovers_classical_cubic() {
    let o = gowers(&["integrate", "--input", &fixture("x1sq_x2_f3.form"), "--classical-only"]);
    assert_eq!(o.status.code(), Some(0));
    let want = std::fs::read_to_string(fixture("x1sq_x2_f3.poly")).unwrap();
    assert_eq!(stdout(&o), want);
}

#[test]
fn pipeline_on_eighth_cubic_reaches_full_correlation() {
    let o = gowers(&[
        "pipeline",
        "--input",
        &fixture("eighth_cubic.fn"),
        "--strategy",
        "guess",
        "--guess",
        &fixture("eighth_cubic.poly"),
        "--delta",
        "0.5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("final correlation^2 = 1 "), "{out}");
    assert!(out.contains("== machine-readable =="));
    assert!(out.contains("all_hold true"));
}

#[test]
fn pipeline_refuses_below_threshold() {
    let o = gowers(&["pipeline", "--input", &fixture("eighth_cubic.fn"), "--strategy", "guess", "--guess", &fixture("eighth_cubic.poly"), "--delta", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("refusing to run"));
}

#[test]
fn report_goes_to_file() {
    let dir = std::env::temp_dir().join(format!("gowers-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.txt");
    let o = gowers(&["pipeline", "--input", &fixture("x1sq_x2_f3.fn"), "--classical-only", "--seed", "1", "--report", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("inverse pipeline report"));
    assert!(text.contains("classical true"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn selftest_single_criterion() {
    let o = gowers(&["selftest", "--quick", "--only", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("[PASS]  1."));
    assert_eq!(gowers(&["selftest", "--only", "11"]).status.code(), Some(2));
}
