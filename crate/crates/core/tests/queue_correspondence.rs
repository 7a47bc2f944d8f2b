//! Red clauses created by the free variable follow Bin(Y2, 1/X).

use isat::solver::drift::initial_red_counts;
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete, DiscreteCDF};

fn chi_square_p_value(counts: &[usize], y2: u64, x: usize) -> f64 {
    let trials = counts.len() as f64;
    let law = Binomial::new(1.0 / x as f64, y2).unwrap();
    // Pool the upper tail so every bin expects at least five counts.
    let mut top = 0u64;
    while trials * (1.0 - law.cdf(top)) >= 5.0 {
        top += 1;
    }
    let mut observed = vec![0.0; top as usize + 1];
    for &c in counts {
        observed[(c as u64).min(top) as usize] += 1.0;
    }
    let stat: f64 = (0..=top)
        .map(|k| {
            let p = if k == top { 1.0 - law.cdf(top - 1) } else { law.pmf(k) };
            let e = trials * p;
            (observed[k as usize] - e).powi(2) / e
        })
        .sum();
    1.0 - ChiSquared::new(top as f64).unwrap().cdf(stat)
}

#[test]
fn initial_reds_fit_the_binomial() {
    let (x, y2, y3) = (1000, 1500, 2000);
    let counts = initial_red_counts(x, y2, y3, 10_000, 42).unwrap();
    let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
    assert!((mean - 1.5).abs() < 0.05, "mean {mean}");
    let p = chi_square_p_value(&counts, y2 as u64, x);
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn no_two_clauses_no_reds() {
    let counts = initial_red_counts(200, 0, 400, 200, 1).unwrap();
    assert!(counts.iter().all(|&c| c == 0));
}

#[test]
fn the_test_rejects_a_wrong_law() {
    // Counts drawn for density 1.5 tested against density 1.0.
    let counts = initial_red_counts(1000, 1500, 0, 10_000, 43).unwrap();
    assert!(chi_square_p_value(&counts, 1000, 1000) < 0.01);
}
