//! Plain-text formula format.
//!
//! ```text
//! # comment
//! p isat <n> <m>
//! <var> <lo> <hi> [<var> <lo> <hi> ...] 0
//! ```
//!
//! Variables are 1-based on disk. Floats are written with Rust's shortest
//! round-trip representation, so reading a written formula reproduces every
//! endpoint bit for bit. Assignments are written as `v <var> <value>` lines.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::formula::{Assignment, Clause, Formula, Literal};
use crate::interval::Interval;

pub fn write_formula<W: Write>(formula: &Formula, mut out: W) -> io::Result<()> {
    writeln!(out, "p isat {} {}", formula.num_vars, formula.clauses.len())?;
    let mut line = String::new();
    for clause in &formula.clauses {
        line.clear();
        for lit in &clause.literals {
            use std::fmt::Write as _;
            let _ = write!(line, "{} {} {} ", lit.var + 1, lit.sign.lo(), lit.sign.hi());
        }
        line.push('0');
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn formula_to_string(formula: &Formula) -> String {
    let mut buf = Vec::new();
    write_formula(formula, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("formula text is ASCII")
}

pub fn write_formula_file(formula: &Formula, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = io::BufWriter::new(file);
    write_formula(formula, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_formula_file(path: impl AsRef<Path>) -> Result<Formula> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_formula(io::BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn parse_formula(text: &str) -> Result<Formula> {
    read_formula(text.as_bytes())
}

pub fn read_formula<R: BufRead>(input: R) -> Result<Formula> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut clauses = Vec::new();

    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io("<input>", e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(Error::parse(line_no, "duplicate header"));
            }
            let (n, m) = parse_header(&mut tokens).map_err(|msg| Error::parse(line_no, msg))?;
            header = Some((n, m, line_no));
            continue;
        }
        let Some((num_vars, _, _)) = header else {
            return Err(Error::parse(line_no, "clause before the `p isat` header"));
        };
        let clause = parse_clause(tokens, num_vars).map_err(|msg| Error::parse(line_no, msg))?;
        clauses.push(clause);
    }

    let Some((num_vars, m, header_line)) = header else {
        return Err(Error::parse(0, "missing `p isat <n> <m>` header"));
    };
    if clauses.len() != m {
        return Err(Error::parse(
            header_line,
            format!("header declares {m} clauses but {} were found", clauses.len()),
        ));
    }
    Ok(Formula { num_vars, clauses })
}

fn parse_header<'a>(tokens: &mut impl Iterator<Item = &'a str>) -> std::result::Result<(usize, usize), String> {
    let (Some("p"), Some("isat")) = (tokens.next(), tokens.next()) else {
        return Err("malformed header (expected `p isat <n> <m>`)".into());
    };
    let n = tokens
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or("malformed variable count in header")?;
    let m = tokens
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or("malformed clause count in header")?;
    if tokens.next().is_some() {
        return Err("trailing tokens after header".into());
    }
    Ok((n, m))
}

fn parse_clause<'a>(
    mut tokens: impl Iterator<Item = &'a str>,
    num_vars: usize,
) -> std::result::Result<Clause, String> {
    let mut literals: Vec<Literal> = Vec::new();
    loop {
        let Some(tok) = tokens.next() else {
            return Err("clause is not terminated by 0".into());
        };
        let var: usize = tok
            .parse()
            .map_err(|_| format!("bad variable id `{tok}`"))?;
        if var == 0 {
            break;
        }
        if var > num_vars {
            return Err(format!("variable {var} out of range 1..={num_vars}"));
        }
        let lo = parse_float(tokens.next(), "lower endpoint")?;
        let hi = parse_float(tokens.next(), "upper endpoint")?;
        if lo > hi {
            return Err(format!("interval [{lo}, {hi}] has lo > hi"));
        }
        let sign = Interval::new(lo, hi).map_err(|e| e.to_string())?;
        if literals.iter().any(|l| l.var == var - 1) {
            return Err(format!("variable {var} occurs twice in one clause"));
        }
        literals.push(Literal::new(var - 1, sign));
    }
    if let Some(extra) = tokens.next() {
        return Err(format!("unexpected token `{extra}` after terminating 0"));
    }
    if literals.len() > 3 {
        return Err(format!("clause has {} literals (at most 3)", literals.len()));
    }
    Ok(Clause::new(literals))
}

fn parse_float(tok: Option<&str>, what: &str) -> std::result::Result<f64, String> {
    let tok = tok.ok_or_else(|| format!("missing {what}"))?;
    tok.parse::<f64>()
        .map_err(|_| format!("bad {what} `{tok}`"))
}

/// Writes `v <var> <value>` lines for every assigned variable.
pub fn write_assignment<W: Write>(assignment: &Assignment, mut out: W) -> io::Result<()> {
    for (var, value) in assignment.iter() {
        writeln!(out, "v {} {}", var + 1, value)?;
    }
    Ok(())
}

/// Reads `v` lines back; other lines are ignored.
pub fn parse_assignment(text: &str, num_vars: usize) -> Result<Assignment> {
    let mut assignment = Assignment::new(num_vars);
    for (idx, line) in text.lines().enumerate() {
        let mut tokens = line.split_whitespace();
        if tokens.next() != Some("v") {
            continue;
        }
        let var: usize = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .filter(|&v| v >= 1 && v <= num_vars)
            .ok_or_else(|| Error::parse(idx + 1, "bad variable in `v` line"))?;
        let value: f64 = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .filter(|x: &f64| (0.0..=1.0).contains(x))
            .ok_or_else(|| Error::parse(idx + 1, "bad value in `v` line"))?;
        assignment.set_permanent(var - 1, value);
    }
    Ok(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::generate_formula;
    use proptest::prelude::*;

    #[test]
    fn parses_a_clause_line() {
        let f = parse_formula("p isat 3 1\n1 0.25 0.75 2 0.0 0.1 3 0.9 1.0 0\n").unwrap();
        let vars: Vec<_> = f.clauses[0].literals.iter().map(|l| l.var).collect();
        assert_eq!(vars, vec![0, 1, 2]);
        assert_eq!(f.clauses[0].literals[0].sign, Interval::new(0.25, 0.75).unwrap());
    }

    #[test]
    fn comments_and_blank_lines() {
        let f = parse_formula("# hi\n\np isat 2 1\n# mid\n1 0 1 0\n").unwrap();
        assert_eq!(f.clauses.len(), 1);
    }

    #[test]
    fn clause_count_mismatch() {
        let text = "p isat 5 2\n1 0 1 0\n2 0 1 0\n3 0 1 0\n";
        match parse_formula(text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 1);
                assert!(message.contains("2 clauses"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [
            ("p isat 2 1\n3 0 1 0\n", 2),
            ("p isat 2 1\n1 0.8 0.2 0\n", 2),
            ("p isat 2 1\n1 0.1 0.2 2 0.3 0.4\n", 2),
            ("p isat 2 1\n\n1 0.1 x 0\n", 3),
            ("p sat 2 1\n", 1),
            ("1 0 1 0\n", 1),
        ];
        for (text, want) in cases {
            match parse_formula(text) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("{text:?}: expected parse error, got {other:?}"),
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let f = generate_formula(40, 100, 3, 11).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.isat");
        write_formula_file(&f, &path).unwrap();
        assert_eq!(read_formula_file(&path).unwrap(), f);
        assert!(matches!(
            read_formula_file(dir.path().join("missing")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn assignment_lines() {
        let a = Assignment::from_values(&[0.5, 0.1, 1.0]);
        let mut buf = Vec::new();
        write_assignment(&a, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "v 1 0.5\nv 2 0.1\nv 3 1\n");
        assert_eq!(parse_assignment(&text, 3).unwrap(), a);
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(n in 3usize..30, m in 0usize..60, k in 2usize..=3, seed in any::<u64>()) {
            let f = generate_formula(n, m, k, seed).unwrap();
            let back = parse_formula(&formula_to_string(&f)).unwrap();
            for (a, b) in f.clauses.iter().zip(&back.clauses) {
                for (x, y) in a.literals.iter().zip(&b.literals) {
                    prop_assert_eq!(x.sign.bits(), y.sign.bits());
                }
            }
            prop_assert_eq!(back, f);
        }
    }
}
