//! Drives the `isat` binary end to end.

use std::path::Path;
use std::process::{Command, Output};

use isat::format::{parse_assignment, read_formula_file};
use isat::verify;

fn isat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isat")).args(args).output().expect("spawn isat")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn gen(dir: &Path, n: &str, c: &str, k: &str, seed: &str) -> std::path::PathBuf {
    let path = dir.join(format!("f-{n}-{c}-{k}-{seed}.isat"));
    let o = isat(&["--seed", seed, "--out", path.to_str().unwrap(), "gen", "--n", n, "--c", c, "--k", k]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    path
}

#[test]
fn solve_prints_a_verified_assignment() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen(dir.path(), "2000", "1.5", "3", "5");
    let stats = dir.path().join("stats.json");
    let o = isat(&["solve", "--input", path.to_str().unwrap(), "--stats-out", stats.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let body = text.strip_prefix("SAT\n").expect("SAT header");
    let f = read_formula_file(&path).unwrap();
    let a = parse_assignment(body, f.num_vars).unwrap();
    assert!(verify(&f, &a).unwrap());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(stats).unwrap()).unwrap();
    assert!(json.get("outer_iterations").is_some());
}

#[test]
fn solve_gives_up_with_its_own_exit_code() {
    let o = isat(&["solve", "--n", "2000", "--c", "5"]);
    assert_eq!(o.status.code(), Some(10));
    assert!(stdout(&o).starts_with("GAVEUP"));
}

#[test]
fn solve_is_deterministic_in_the_seed() {
    let a = isat(&["--seed", "9", "solve", "--n", "500", "--c", "1.8"]);
    let b = isat(&["--seed", "9", "solve", "--n", "500", "--c", "1.8"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), b.status.code());
}

#[test]
fn oracle_and_decide2_agree_on_small_formulas() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..20 {
        let path = gen(dir.path(), "4", "2.5", "2", &seed.to_string());
        let p = path.to_str().unwrap();
        let oracle = stdout(&isat(&["oracle", "--input", p]));
        let decide = stdout(&isat(&["decide2", "--input", p]));
        assert_eq!(oracle.starts_with("SAT"), decide.starts_with("SAT"), "seed {seed}");
        if decide.starts_with("UNSAT") {
            assert!(decide.lines().nth(1).unwrap().starts_with("w "));
        }
    }
}

#[test]
fn missing_input_is_an_io_error_naming_the_path() {
    let o = isat(&["oracle", "--input", "/nonexistent/formula.isat"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/formula.isat"));
    let o = isat(&["run-all", "--config", "/nonexistent/run.ini"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/run.ini"));
}

#[test]
fn bad_arguments_are_rejected() {
    assert_eq!(isat(&["gen", "--n", "10", "--c=-1"]).status.code(), Some(2));
    assert!(!isat(&["no-such-command"]).status.success());
}

#[test]
fn tables_carry_a_provenance_line() {
    let o = isat(&["--seed", "3", "--no-timestamp", "probe", "--samples", "1000"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# isat "), "{text}");
    assert!(text.lines().next().unwrap().contains("seed=3"));
    assert!(!text.lines().next().unwrap().contains("timestamp"));
}

#[test]
fn threshold_lands_in_the_expected_window() {
    let o = isat(&["threshold"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let value: f64 = text
        .split(|ch: char| !(ch.is_ascii_digit() || ch == '.'))
        .filter_map(|t| t.parse().ok())
        .find(|v: &f64| *v > 2.0 && *v < 3.0)
        .unwrap_or_else(|| panic!("no threshold in {text}"));
    assert!((value - 2.33).abs() < 0.02, "{value}");
}
