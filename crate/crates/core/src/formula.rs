//! Interval-signed CNF formulas, assignments and the random generator.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::random_interval::sample_interval;
use crate::rng;

/// `var ∈ sign`, with a 0-based variable id.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub sign: Interval,
}

impl Literal {
    pub fn new(var: usize, sign: Interval) -> Self {
        Literal { var, sign }
    }

    #[inline]
    pub fn holds(&self, value: f64) -> bool {
        self.sign.contains(value)
    }
}

/// A disjunction of literals over distinct variables, kept in generation order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub literals: Vec<Literal>,
}

impl Clause {
    pub fn new(literals: Vec<Literal>) -> Self {
        Clause { literals }
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }
}

impl From<Vec<Literal>> for Clause {
    fn from(literals: Vec<Literal>) -> Self {
        Clause { literals }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Formula {
    pub num_vars: usize,
    pub clauses: Vec<Clause>,
}

/// Number of clauses of each length.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClauseCounts {
    pub empty: usize,
    pub unit: usize,
    pub binary: usize,
    pub ternary: usize,
}

impl Formula {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self> {
        let formula = Formula { num_vars, clauses };
        formula.validate()?;
        Ok(formula)
    }

    pub fn empty(num_vars: usize) -> Self {
        Formula {
            num_vars,
            clauses: Vec::new(),
        }
    }

    /// Checks variable ranges, clause lengths (at most 3) and that no clause
    /// mentions a variable twice.
    pub fn validate(&self) -> Result<()> {
        for (ci, clause) in self.clauses.iter().enumerate() {
            if clause.len() > 3 {
                return Err(Error::InvalidParameter(format!(
                    "clause {ci} has {} literals (at most 3 allowed)",
                    clause.len()
                )));
            }
            for (i, lit) in clause.literals.iter().enumerate() {
                if lit.var >= self.num_vars {
                    return Err(Error::InvalidParameter(format!(
                        "clause {ci} uses variable {} but the formula has {} variables",
                        lit.var + 1,
                        self.num_vars
                    )));
                }
                if clause.literals[..i].iter().any(|l| l.var == lit.var) {
                    return Err(Error::InvalidParameter(format!(
                        "clause {ci} mentions variable {} twice",
                        lit.var + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn counts(&self) -> ClauseCounts {
        let mut counts = ClauseCounts::default();
        for clause in &self.clauses {
            match clause.len() {
                0 => counts.empty += 1,
                1 => counts.unit += 1,
                2 => counts.binary += 1,
                _ => counts.ternary += 1,
            }
        }
        counts
    }

    /// Number of variables that occur in no clause.
    pub fn unused_vars(&self) -> usize {
        let mut seen = vec![false; self.num_vars];
        for lit in self.clauses.iter().flat_map(|c| &c.literals) {
            seen[lit.var] = true;
        }
        seen.iter().filter(|s| !**s).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValueStatus {
    Tentative,
    Permanent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub value: f64,
    pub status: ValueStatus,
}

/// Partial map from variables to values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    entries: Vec<Option<Entry>>,
}

impl Assignment {
    pub fn new(num_vars: usize) -> Self {
        Assignment {
            entries: vec![None; num_vars],
        }
    }

    /// Total assignment with every variable permanently set to `value`.
    pub fn constant(num_vars: usize, value: f64) -> Self {
        Assignment {
            entries: vec![
                Some(Entry {
                    value,
                    status: ValueStatus::Permanent
                });
                num_vars
            ],
        }
    }

    pub fn from_values(values: &[f64]) -> Self {
        Assignment {
            entries: values
                .iter()
                .map(|&value| {
                    Some(Entry {
                        value,
                        status: ValueStatus::Permanent,
                    })
                })
                .collect(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, var: usize) -> Option<f64> {
        self.entries.get(var).copied().flatten().map(|e| e.value)
    }

    pub fn entry(&self, var: usize) -> Option<Entry> {
        self.entries.get(var).copied().flatten()
    }

    pub fn set_tentative(&mut self, var: usize, value: f64) {
        debug_assert!(
            !matches!(self.entry(var), Some(Entry { status: ValueStatus::Permanent, .. })),
            "tentative write over a permanent value of variable {var}"
        );
        self.entries[var] = Some(Entry {
            value,
            status: ValueStatus::Tentative,
        });
    }

    pub fn set_permanent(&mut self, var: usize, value: f64) {
        self.entries[var] = Some(Entry {
            value,
            status: ValueStatus::Permanent,
        });
    }

    /// Overwrites a value regardless of its status. Only path repair may do this.
    pub(crate) fn overwrite(&mut self, var: usize, value: f64) {
        self.set_permanent(var, value);
    }

    pub fn clear(&mut self, var: usize) {
        self.entries[var] = None;
    }

    pub fn is_total(&self) -> bool {
        self.entries.iter().all(Option::is_some)
    }

    /// `(var, value)` pairs of all assigned variables in id order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(v, e)| e.map(|e| (v, e.value)))
    }
}

/// True iff every clause has a literal whose variable value lies in its sign.
///
/// Fails if a variable occurring in the formula has no value.
pub fn verify(formula: &Formula, assignment: &Assignment) -> Result<bool> {
    let mut all = true;
    for clause in &formula.clauses {
        let mut satisfied = false;
        for lit in &clause.literals {
            let value = assignment
                .get(lit.var)
                .ok_or(Error::IncompleteAssignment(lit.var))?;
            satisfied |= lit.holds(value);
        }
        all &= satisfied;
    }
    Ok(all)
}

/// Draws a formula with `m` clauses of `k` distinct variables each, uniformly
/// from all such formulas. Repeated clauses are allowed.
pub fn generate_formula(num_vars: usize, m: usize, k: usize, seed: u64) -> Result<Formula> {
    if !(2..=3).contains(&k) {
        return Err(Error::InvalidParameter(format!(
            "clause length k = {k} (expected 2 or 3)"
        )));
    }
    generate_mixed_formula(num_vars, &[(k, m)], seed)
}

/// Like [`generate_formula`] but with several blocks of `(length, count)`
/// clauses, e.g. the `(X, Y2, Y3)` state of an outer-loop iteration.
pub fn generate_mixed_formula(num_vars: usize, blocks: &[(usize, usize)], seed: u64) -> Result<Formula> {
    let mut rng = rng::stream(seed);
    let mut clauses = Vec::with_capacity(blocks.iter().map(|b| b.1).sum());
    for &(k, m) in blocks {
        if !(1..=3).contains(&k) {
            return Err(Error::InvalidParameter(format!(
                "clause length {k} (expected 1, 2 or 3)"
            )));
        }
        if m > 0 && num_vars < k {
            return Err(Error::InvalidParameter(format!(
                "{num_vars} variables cannot fill a clause of {k} distinct variables"
            )));
        }
        for _ in 0..m {
            clauses.push(random_clause(num_vars, k, &mut rng));
        }
    }
    Ok(Formula { num_vars, clauses })
}

fn random_clause<R: Rng + ?Sized>(num_vars: usize, k: usize, rng: &mut R) -> Clause {
    index::sample(rng, num_vars, k)
        .into_iter()
        .map(|var| Literal::new(var, sample_interval(rng)))
        .collect::<Vec<_>>()
        .into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn two_clause() -> Formula {
        Formula::new(
            2,
            vec![Clause::new(vec![
                Literal::new(0, iv(0.0, 0.4)),
                Literal::new(1, iv(0.6, 1.0)),
            ])],
        )
        .unwrap()
    }

    #[test]
    fn verify_examples() {
        let f = two_clause();
        assert!(verify(&f, &Assignment::from_values(&[0.2, 0.0])).unwrap());
        assert!(!verify(&f, &Assignment::from_values(&[0.5, 0.5])).unwrap());
    }

    #[test]
    fn empty_clause_is_never_satisfied() {
        let f = Formula::new(1, vec![Clause::default()]).unwrap();
        for v in [0.0, 0.5, 1.0] {
            assert!(!verify(&f, &Assignment::from_values(&[v])).unwrap());
        }
    }

    #[test]
    fn verify_reports_missing_variable() {
        let f = two_clause();
        let mut a = Assignment::new(2);
        a.set_permanent(0, 0.9);
        assert!(matches!(verify(&f, &a), Err(Error::IncompleteAssignment(1))));
    }

    #[test]
    fn generator_edge_cases() {
        let f = generate_formula(3, 0, 3, 1).unwrap();
        assert!(f.clauses.is_empty());
        assert_eq!(f.unused_vars(), 3);

        let f = generate_formula(3, 1, 3, 5).unwrap();
        let mut vars: Vec<_> = f.clauses[0].literals.iter().map(|l| l.var).collect();
        vars.sort_unstable();
        assert_eq!(vars, vec![0, 1, 2]);

        assert!(generate_formula(10, 5, 4, 1).is_err());
        assert!(generate_formula(2, 5, 3, 1).is_err());
    }

    #[test]
    fn generator_is_deterministic_and_valid() {
        let a = generate_formula(50, 200, 3, 99).unwrap();
        let b = generate_formula(50, 200, 3, 99).unwrap();
        assert_eq!(a, b);
        a.validate().unwrap();
        assert_eq!(a.counts().ternary, 200);
        assert_ne!(a, generate_formula(50, 200, 3, 100).unwrap());
    }

    #[test]
    fn generated_signs_contain_half_with_probability_half() {
        let f = generate_formula(1000, 333_334, 3, 2024).unwrap();
        let lits: Vec<_> = f.clauses.iter().flat_map(|c| &c.literals).collect();
        assert!(lits.len() >= 1_000_000);
        let hits = lits.iter().filter(|l| l.sign.contains(0.5)).count();
        let frac = hits as f64 / lits.len() as f64;
        assert!((frac - 0.5).abs() < 0.002, "fraction {frac}");
    }

    proptest! {
        #[test]
        fn removing_a_clause_never_falsifies(
            seed in any::<u64>(),
            values in proptest::collection::vec(0.0f64..=1.0, 6),
            drop in 0usize..8,
        ) {
            let f = generate_formula(6, 8, 2, seed).unwrap();
            let a = Assignment::from_values(&values);
            let mut g = f.clone();
            g.clauses.remove(drop);
            prop_assert!(!verify(&f, &a).unwrap() || verify(&g, &a).unwrap());
        }
    }
}
