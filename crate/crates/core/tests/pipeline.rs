//! End-to-end properties across the file format, the solver and the
//! deciders.

use isat::format::{formula_to_string, parse_formula};
use isat::oracle::brute_decide;
use isat::solver::{solve, Outcome, SolverConfig};
use isat::two_isat::{self, Decision};
use isat::{generate_formula, verify};
use proptest::prelude::*;

#[test]
fn empty_clause_runs_always_went_zen() {
    let config = SolverConfig::default();
    let mut failures = 0;
    for seed in 0..300 {
        let f = generate_formula(400, 900, 3, seed).unwrap();
        let r = solve(&f, &config, seed).unwrap();
        assert_eq!(r.stats.unflagged_empty_clauses, 0, "seed {seed}");
        if r.stats.empty_clauses > 0 {
            failures += 1;
            assert!(r.stats.zen.total() > 0, "seed {seed}");
        }
    }
    assert!(failures > 0, "density 2.25 at n = 400 should fail sometimes");
}

#[test]
fn dense_formulas_give_up_instead_of_lying() {
    for seed in 0..20 {
        let f = generate_formula(300, 1500, 3, seed).unwrap();
        let r = solve(&f, &SolverConfig::default(), seed).unwrap();
        if let Outcome::Sat(a) = &r.outcome {
            assert!(verify(&f, a).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solving_a_reparsed_formula_is_identical(n in 10usize..300, c in 0.5f64..3.0, seed in any::<u64>()) {
        let f = generate_formula(n, (c * n as f64) as usize, 3, seed).unwrap();
        let g = parse_formula(&formula_to_string(&f)).unwrap();
        prop_assert_eq!(&f, &g);
        let config = SolverConfig::default();
        let a = solve(&f, &config, seed).unwrap();
        let b = solve(&g, &config, seed).unwrap();
        prop_assert_eq!(a.outcome, b.outcome);
        prop_assert_eq!(a.stats, b.stats);
    }

    #[test]
    fn decider_and_oracle_agree(n in 2usize..=6, m in 0usize..=12, seed in any::<u64>()) {
        let f = generate_formula(n, m, 2, seed).unwrap();
        let oracle = brute_decide(&f).unwrap();
        match two_isat::decide(&f).unwrap() {
            Decision::Sat(a) => {
                prop_assert!(verify(&f, &a).unwrap());
                prop_assert!(oracle.is_sat());
            }
            Decision::Unsat(_) => prop_assert!(!oracle.is_sat()),
        }
    }

    #[test]
    fn solver_sat_is_never_refuted(n in 3usize..=8, m in 0usize..=12, seed in any::<u64>()) {
        let f = generate_formula(n, m, 3, seed).unwrap();
        let r = solve(&f, &SolverConfig::default(), seed.rotate_left(7)).unwrap();
        if let Outcome::Sat(a) = r.outcome {
            prop_assert!(verify(&f, &a).unwrap());
            prop_assert!(brute_decide(&f).unwrap().is_sat());
        }
    }
}
