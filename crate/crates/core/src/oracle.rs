//! Exhaustive satisfiability check for small formulas.
//!
//! Whether a literal holds depends only on where a value lies relative to the
//! endpoints of that variable's intervals. So it is enough to try every
//! endpoint, a midpoint of every gap between consecutive endpoints, and the
//! two ends of `[0, 1]`.

use crate::error::{Error, Result};
use crate::formula::{verify, Assignment, Formula};

/// Largest number of grid points (after reduction) the search may visit.
pub const MAX_GRID_PRODUCT: f64 = 1e8;

#[derive(Clone, Debug, PartialEq)]
pub enum OracleResult {
    Sat(Assignment),
    Unsat,
}

impl OracleResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, OracleResult::Sat(_))
    }
}

/// Sorted candidate values per variable.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateGrid {
    pub points: Vec<Vec<f64>>,
}

impl CandidateGrid {
    pub fn build(formula: &Formula) -> Self {
        let mut endpoints: Vec<Vec<f64>> = vec![Vec::new(); formula.num_vars];
        for lit in formula.clauses.iter().flat_map(|c| &c.literals) {
            endpoints[lit.var].push(lit.sign.lo());
            endpoints[lit.var].push(lit.sign.hi());
        }
        let points = endpoints
            .into_iter()
            .map(|mut ends| {
                ends.push(0.0);
                ends.push(1.0);
                sort_dedup(&mut ends);
                let mids: Vec<f64> = ends.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
                ends.extend(mids);
                sort_dedup(&mut ends);
                ends
            })
            .collect();
        CandidateGrid { points }
    }

    /// Adds extra candidate values for one variable.
    pub fn refine(&mut self, var: usize, extra: &[f64]) {
        let pts = &mut self.points[var];
        pts.extend(extra.iter().copied().filter(|x| (0.0..=1.0).contains(x)));
        sort_dedup(pts);
    }

    pub fn size_product(&self) -> f64 {
        self.points.iter().map(|p| p.len() as f64).product()
    }
}

fn sort_dedup(v: &mut Vec<f64>) {
    v.sort_by(f64::total_cmp);
    v.dedup();
}

pub fn brute_decide(formula: &Formula) -> Result<OracleResult> {
    decide_on_grid(formula, &CandidateGrid::build(formula))
}

/// Exhaustive search over `grid`.
///
/// Candidates of one variable are first reduced to those whose set of
/// satisfied literals is maximal under inclusion: a value that satisfies a
/// subset of what another value satisfies can never be the only way out.
/// The size guard applies to the reduced grid.
pub fn decide_on_grid(formula: &Formula, grid: &CandidateGrid) -> Result<OracleResult> {
    formula.validate()?;
    if formula.clauses.iter().any(|c| c.is_empty()) {
        return Ok(OracleResult::Unsat);
    }
    let n = formula.num_vars;

    // occurrences[v] = (clause, literal) pairs of v
    let mut occurrences: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (ci, clause) in formula.clauses.iter().enumerate() {
        for (li, lit) in clause.literals.iter().enumerate() {
            occurrences[lit.var].push((ci, li));
        }
    }

    let mut candidates: Vec<Vec<(f64, Vec<bool>)>> = Vec::with_capacity(n);
    for v in 0..n {
        let mut cands: Vec<(f64, Vec<bool>)> = Vec::new();
        for &x in &grid.points[v] {
            let pattern: Vec<bool> = occurrences[v]
                .iter()
                .map(|&(ci, li)| formula.clauses[ci].literals[li].holds(x))
                .collect();
            cands.push((x, pattern));
        }
        if cands.is_empty() {
            cands.push((0.5, vec![false; occurrences[v].len()]));
        }
        candidates.push(reduce_dominated(cands));
    }
    let product: f64 = candidates.iter().map(|c| c.len() as f64).product();
    if product > MAX_GRID_PRODUCT {
        return Err(Error::TooLarge(product));
    }

    // A clause is checked once its highest-numbered variable is assigned.
    let mut closing: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ci, clause) in formula.clauses.iter().enumerate() {
        let last = clause.literals.iter().map(|l| l.var).max().expect("non-empty");
        closing[last].push(ci);
    }

    let mut values = vec![0.0; n];
    let mut search = Search {
        formula,
        candidates: &candidates,
        closing: &closing,
        values: &mut values,
    };
    if search.assign(0) {
        let assignment = Assignment::from_values(&values);
        debug_assert!(verify(formula, &assignment)?);
        Ok(OracleResult::Sat(assignment))
    } else {
        Ok(OracleResult::Unsat)
    }
}

fn reduce_dominated(mut cands: Vec<(f64, Vec<bool>)>) -> Vec<(f64, Vec<bool>)> {
    let subset = |a: &[bool], b: &[bool]| a.iter().zip(b).all(|(x, y)| !*x || *y);
    let mut keep: Vec<(f64, Vec<bool>)> = Vec::new();
    // Prefer 1/2 among equivalent values, then grid order.
    cands.sort_by(|a, b| (a.0 - 0.5).abs().total_cmp(&(b.0 - 0.5).abs()));
    for (x, pattern) in cands {
        if keep.iter().any(|(_, k)| subset(&pattern, k)) {
            continue;
        }
        keep.retain(|(_, k)| !subset(k, &pattern));
        keep.push((x, pattern));
    }
    keep
}

struct Search<'a> {
    formula: &'a Formula,
    candidates: &'a [Vec<(f64, Vec<bool>)>],
    closing: &'a [Vec<usize>],
    values: &'a mut [f64],
}

impl Search<'_> {
    fn assign(&mut self, var: usize) -> bool {
        if var == self.values.len() {
            return true;
        }
        for &(x, _) in &self.candidates[var] {
            self.values[var] = x;
            let ok = self.closing[var].iter().all(|&ci| {
                self.formula.clauses[ci]
                    .literals
                    .iter()
                    .any(|l| l.holds(self.values[l.var]))
            });
            if ok && self.assign(var + 1) {
                return true;
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{generate_formula, Clause, Literal};
    use crate::interval::Interval;
    use crate::rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn lit(var: usize, lo: f64, hi: f64) -> Literal {
        Literal::new(var, iv(lo, hi))
    }

    #[test]
    fn empty_formula_is_sat() {
        assert!(brute_decide(&Formula::empty(3)).unwrap().is_sat());
    }

    #[test]
    fn single_literal() {
        let f = Formula::new(1, vec![Clause::new(vec![lit(0, 0.2, 0.3)])]).unwrap();
        match brute_decide(&f).unwrap() {
            OracleResult::Sat(a) => assert!(iv(0.2, 0.3).contains(a.get(0).unwrap())),
            OracleResult::Unsat => panic!("satisfiable"),
        }
    }

    #[test]
    fn crossed_pairs_are_unsat() {
        let (a, b, c, d) = ((0.0, 0.4), (0.6, 1.0), (0.0, 0.3), (0.7, 1.0));
        let clause = |x: (f64, f64), y: (f64, f64)| Clause::new(vec![lit(0, x.0, x.1), lit(1, y.0, y.1)]);
        let f = Formula::new(2, vec![clause(a, c), clause(a, d), clause(b, c), clause(b, d)]).unwrap();
        assert_eq!(brute_decide(&f).unwrap(), OracleResult::Unsat);
    }

    #[test]
    fn gap_needs_a_midpoint() {
        // x must avoid [0, 0.3] and [0.6, 1]: only the open gap works, and
        // that needs a literal on the gap itself to be satisfiable at all.
        let f = Formula::new(
            2,
            vec![
                Clause::new(vec![lit(0, 0.31, 0.59)]),
                Clause::new(vec![lit(0, 0.0, 0.3), lit(1, 0.5, 0.5)]),
            ],
        )
        .unwrap();
        assert!(brute_decide(&f).unwrap().is_sat());
    }

    #[test]
    fn size_guard() {
        let f = generate_formula(40, 200, 3, 1).unwrap();
        assert!(matches!(brute_decide(&f), Err(Error::TooLarge(_))));
    }

    #[test]
    fn grid_contains_ends_and_midpoints() {
        let f = Formula::new(1, vec![Clause::new(vec![lit(0, 0.2, 0.6)])]).unwrap();
        let g = CandidateGrid::build(&f);
        assert_eq!(g.points[0], vec![0.0, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0]);
    }

    proptest! {
        #[test]
        fn sat_answers_verify(n in 2usize..6, m in 0usize..12, k in 2usize..=3, seed in any::<u64>()) {
            let f = generate_formula(n.max(k), m, k, seed).unwrap();
            if let OracleResult::Sat(a) = brute_decide(&f).unwrap() {
                prop_assert!(verify(&f, &a).unwrap());
            }
        }

        #[test]
        fn refining_the_grid_never_turns_unsat_into_sat(seed in any::<u64>()) {
            let f = generate_formula(4, 14, 2, seed).unwrap();
            if brute_decide(&f).unwrap() == OracleResult::Unsat {
                let mut grid = CandidateGrid::build(&f);
                let mut rng = rng::stream(seed ^ 0x5555);
                for v in 0..f.num_vars {
                    let extra: Vec<f64> = (0..10).map(|_| rng.random::<f64>()).collect();
                    grid.refine(v, &extra);
                }
                prop_assert_eq!(decide_on_grid(&f, &grid).unwrap(), OracleResult::Unsat);
            }
        }
    }
}
