//! The full acceptance suite: every criterion at its default size, run on
//! one and on eight worker threads. Prints one PASS/FAIL line per criterion.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;

use isat::harness::{run_all, Config};

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

fn line(passed: bool, id: u32, name: &str, detail: &str) -> String {
    format!("{} {id:>2} {name}: {detail}", if passed { "PASS" } else { "FAIL" })
}

fn main() -> ExitCode {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let one = run_all(&Config { threads: 1, ..Config::default() }, a.path(), false).unwrap();
    let eight = run_all(&Config { threads: 8, ..Config::default() }, b.path(), false).unwrap();

    let mut lines = Vec::new();
    let mut all = true;
    for (v, w) in one.criteria.iter().zip(&eight.criteria) {
        let passed = v.passed && w.passed;
        all &= passed;
        let detail = if v.detail == w.detail {
            format!("{} ({:.1} s)", v.detail, v.seconds)
        } else {
            format!("1 thread: {}; 8 threads: {}", v.detail, w.detail)
        };
        lines.push(line(passed, v.id, &v.name, &detail));
    }

    let (fa, fb) = (csv_files(a.path()), csv_files(b.path()));
    let differing: Vec<&String> = fa.keys().filter(|k| fa.get(*k) != fb.get(*k)).collect();
    let same = fa.len() == fb.len() && differing.is_empty() && !fa.is_empty();
    all &= same;
    let detail = if same {
        format!("{} CSV files byte-identical on 1 and 8 threads", fa.len())
    } else {
        format!("differing outputs: {differing:?} ({} vs {} files)", fa.len(), fb.len())
    };
    lines.push(line(same, 15, "reproducibility", &detail));

    for l in &lines {
        println!("{l}");
    }
    println!("acceptance: {}", if all { "all criteria passed" } else { "FAILED" });
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
