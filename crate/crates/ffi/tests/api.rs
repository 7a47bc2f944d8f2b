use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use isat_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(isat_last_error()) }.to_str().unwrap().to_owned()
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { isat_string_free(p) };
    s
}

#[test]
fn generate_solve_verify() {
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(isat_formula_generate(500, 1000, 3, 7, &mut f), IsatStatus::Ok);
        assert_eq!(isat_formula_num_vars(f), 500);
        assert_eq!(isat_formula_num_clauses(f), 1000);

        let mut r = ptr::null_mut();
        assert_eq!(isat_solve(f, 35.0 / 24.0, 1, &mut r), IsatStatus::Ok);
        assert!(isat_result_is_sat(r));
        let values: Vec<f64> = (0..500)
            .map(|v| {
                let mut x = f64::NAN;
                assert_eq!(isat_result_value(r, v, &mut x), IsatStatus::Ok);
                x
            })
            .collect();
        let mut ok = false;
        assert_eq!(isat_verify(f, values.as_ptr(), values.len(), &mut ok), IsatStatus::Ok);
        assert!(ok);

        let mut s = ptr::null_mut();
        assert_eq!(isat_result_outcome(r, &mut s), IsatStatus::Ok);
        assert_eq!(take_string(s), "Sat");
        assert_eq!(isat_result_stats_json(r, &mut s), IsatStatus::Ok);
        let stats: serde_json::Value = serde_json::from_str(&take_string(s)).unwrap();
        assert!(stats["outer_iterations"].as_u64().unwrap() > 0);

        isat_result_free(r);
        isat_formula_free(f);
    }
}

#[test]
fn parse_round_trip_and_decide2() {
    let text = CString::new("p isat 2 2\n1 0 0.4 2 0.6 1 0\n1 0.6 1 2 0 0.3 0\n").unwrap();
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(isat_formula_parse(text.as_ptr(), &mut f), IsatStatus::Ok, "{}", last_error());
        let mut s = ptr::null_mut();
        assert_eq!(isat_formula_to_string(f, &mut s), IsatStatus::Ok);
        let printed = CString::new(take_string(s)).unwrap();
        let mut g = ptr::null_mut();
        assert_eq!(isat_formula_parse(printed.as_ptr(), &mut g), IsatStatus::Ok);
        assert_eq!(isat_formula_num_clauses(g), 2);

        let mut r = ptr::null_mut();
        assert_eq!(isat_decide2(g, &mut r), IsatStatus::Ok);
        assert!(isat_result_is_sat(r));
        let mut x = 0.0;
        assert_eq!(isat_result_value(r, 1, &mut x), IsatStatus::Ok);
        assert_eq!(isat_result_stats_json(r, &mut s), IsatStatus::Ok);
        assert_eq!(take_string(s), "{}");
        isat_result_free(r);
        isat_formula_free(f);
        isat_formula_free(g);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut f = ptr::null_mut();
        let bad = CString::new("p isat 2 1\n1 0.5 0.2 0\n").unwrap();
        assert_eq!(isat_formula_parse(bad.as_ptr(), &mut f), IsatStatus::Parse);
        assert!(last_error().starts_with("line 2"), "{}", last_error());
        assert!(f.is_null());

        assert_eq!(isat_formula_generate(5, 3, 4, 1, &mut f), IsatStatus::InvalidParameter);
        assert_eq!(isat_formula_parse(ptr::null(), &mut f), IsatStatus::NullPointer);

        let path = CString::new("/nonexistent/formula.txt").unwrap();
        assert_eq!(isat_formula_read_file(path.as_ptr(), &mut f), IsatStatus::Io);
        assert!(last_error().contains("/nonexistent/formula.txt"));

        let mut c = 0.0;
        assert_eq!(isat_find_threshold(1e-3, 2.5, 4.0, 1e-2, &mut c), IsatStatus::Bracket);

        assert_eq!(isat_formula_generate(6, 4, 3, 2, &mut f), IsatStatus::Ok);
        let mut r = ptr::null_mut();
        assert_eq!(isat_decide2(f, &mut r), IsatStatus::InvalidParameter);
        let mut ok = false;
        assert_eq!(isat_verify(f, [0.5].as_ptr(), 1, &mut ok), IsatStatus::InvalidParameter);
        isat_formula_free(f);

        // null handles are tolerated by the query and free functions
        isat_formula_free(ptr::null_mut());
        isat_result_free(ptr::null_mut());
        assert!(!isat_result_is_sat(ptr::null()));
        assert_eq!(isat_formula_num_vars(ptr::null()), 0);
    }
}

#[test]
fn gave_up_result_has_no_values() {
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(isat_formula_generate(2000, 8000, 3, 3, &mut f), IsatStatus::Ok);
        let mut r = ptr::null_mut();
        assert_eq!(isat_solve(f, 35.0 / 24.0, 3, &mut r), IsatStatus::Ok);
        assert!(!isat_result_is_sat(r));
        let mut x = 0.0;
        assert_eq!(isat_result_value(r, 0, &mut x), IsatStatus::Domain);
        let mut s = ptr::null_mut();
        assert_eq!(isat_result_outcome(r, &mut s), IsatStatus::Ok);
        assert_ne!(take_string(s), "Sat");
        isat_result_free(r);
        isat_formula_free(f);
    }
}

#[test]
fn threshold_through_the_abi() {
    let mut c = 0.0;
    assert_eq!(unsafe { isat_find_threshold(1e-3, 1.0, 4.0, 1e-2, &mut c) }, IsatStatus::Ok);
    assert!((2.25..=2.35).contains(&c), "{c}");
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/isat.h")
}

#[test]
fn header_compiles_as_c_and_cpp() {
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let status = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(header())
            .status()
            .expect("a C compiler on PATH");
        assert!(status.success(), "{compiler} rejected the header");
    }
}

/// Links a C program against the static library and runs it.
#[test]
fn c_program_links_and_runs() {
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let lib = [deps.join("libisat_ffi.a"), deps.parent().unwrap().join("libisat_ffi.a")]
        .into_iter()
        .find(|p| p.exists())
        .expect("static library next to the test binary");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "isat.h"
int main(void) {
    IsatFormula *f = NULL;
    IsatResult *r = NULL;
    if (isat_formula_generate(300, 300, 3, 5, &f) != ISAT_STATUS_OK) return 1;
    if (isat_solve(f, 35.0 / 24.0, 9, &r) != ISAT_STATUS_OK) return 2;
    double x = -1.0;
    if (isat_result_is_sat(r) && isat_result_value(r, 0, &x) != ISAT_STATUS_OK) return 3;
    if (isat_formula_generate(3, 1, 4, 0, &f) != ISAT_STATUS_INVALID_PARAMETER) return 4;
    printf("%d %.3f %s\n", isat_result_is_sat(r), x, isat_last_error());
    isat_result_free(r);
    isat_formula_free(f);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("1 ") && stdout.contains("invalid parameter"), "{stdout}");
}
