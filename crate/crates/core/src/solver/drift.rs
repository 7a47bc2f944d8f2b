//! Per-iteration drift of `(X, Y2, Y3)` measured against the scaled
//! differential-equation right-hand sides.

use rayon::prelude::*;
use serde::Serialize;

use super::{Solver, SolverConfig};
use crate::error::{Error, Result};
use crate::formula::generate_mixed_formula;
use crate::rng;

/// `(f, g2, g3)` at the scaled state `(x, y2, y3)`: expected per-iteration
/// changes of `X`, `Y2` and `Y3`.
pub fn drift_prediction(x: f64, y2: f64, y3: f64) -> (f64, f64, f64) {
    let f = -1.0 - 12.0 * y2 / (12.0 * x - 13.0 * y2);
    let g2 = -y3 / (8.0 * x) - 13.0 * f * y3 / (8.0 * x) + 2.0 * f * y2 / x;
    let g3 = f * 3.0 * y3 / x;
    (f, g2, g3)
}

/// `X > eps n` and `Y2 / X < (1 - eps) 12/13`.
pub fn eps_good(x: usize, y2: usize, n: usize, eps: f64) -> bool {
    x as f64 > eps * n as f64 && (y2 as f64) < (1.0 - eps) * 12.0 / 13.0 * x as f64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriftRow {
    pub quantity: &'static str,
    pub measured: f64,
    pub std_err: f64,
    pub predicted: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriftTable {
    pub n: usize,
    pub state: (f64, f64, f64),
    pub iterations: usize,
    /// Iterations dropped because their start state was not eps-good.
    pub rejected: usize,
    pub rows: Vec<DriftRow>,
}

impl DriftTable {
    pub fn max_relative_error(&self) -> f64 {
        self.rows.iter().map(|r| r.relative_error).fold(0.0, f64::max)
    }
}

#[derive(Default)]
struct Sums {
    measured: [f64; 3],
    measured_sq: [f64; 3],
    predicted: [f64; 3],
    count: usize,
    rejected: usize,
}

impl Sums {
    fn merge(mut self, other: Sums) -> Sums {
        for i in 0..3 {
            self.measured[i] += other.measured[i];
            self.measured_sq[i] += other.measured_sq[i];
            self.predicted[i] += other.predicted[i];
        }
        self.count += other.count;
        self.rejected += other.rejected;
        self
    }
}

/// Runs `window` outer iterations on each of `seeds` random formulas with
/// `x n` variables, `y2 n` 2-clauses and `y3 n` 3-clauses and pools the
/// changes of every iteration that starts from an eps-good state.
///
/// Predictions are evaluated at each iteration's own start state, so the
/// slow movement of the state over the window does not bias the comparison.
pub fn measure_drift(
    n: usize,
    (x, y2, y3): (f64, f64, f64),
    window: usize,
    seeds: u64,
    seed: u64,
    eps: f64,
) -> Result<DriftTable> {
    let vars = (x * n as f64).round() as usize;
    let m2 = (y2 * n as f64).round() as usize;
    let m3 = (y3 * n as f64).round() as usize;
    if !eps_good(vars, m2, n, eps) {
        return Err(Error::Domain(format!(
            "start state ({x}, {y2}) is not {eps}-good"
        )));
    }
    if window == 0 || seeds == 0 {
        return Err(Error::InvalidParameter("window and seeds must be positive".into()));
    }
    let config = SolverConfig {
        c_prime: 0.0,
        max_outer_iterations: Some(window),
        record_iterations: true,
        validate_colors: false,
    };
    let sums = (0..seeds)
        .into_par_iter()
        .map(|i| -> Result<Sums> {
            let s = rng::split(seed, i);
            let formula = generate_mixed_formula(vars, &[(2, m2), (3, m3)], rng::split(s, 0))?;
            let report = Solver::new(&formula, config.clone(), rng::split(s, 1))?.run(&formula);
            let mut sums = Sums::default();
            for rec in &report.stats.iterations {
                if !eps_good(rec.x, rec.y2, n, eps) {
                    sums.rejected += 1;
                    continue;
                }
                let scale = n as f64;
                let p = drift_prediction(rec.x as f64 / scale, rec.y2 as f64 / scale, rec.y3 as f64 / scale);
                let d = [rec.dx as f64, rec.dy2 as f64, rec.dy3 as f64];
                let p = [p.0, p.1, p.2];
                for k in 0..3 {
                    sums.measured[k] += d[k];
                    sums.measured_sq[k] += d[k] * d[k];
                    sums.predicted[k] += p[k];
                }
                sums.count += 1;
            }
            Ok(sums)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(Sums::default(), Sums::merge);

    let count = sums.count.max(1) as f64;
    let rows = ["dX", "dY2", "dY3"]
        .iter()
        .enumerate()
        .map(|(k, &quantity)| {
            let measured = sums.measured[k] / count;
            let var = (sums.measured_sq[k] / count - measured * measured).max(0.0);
            let predicted = sums.predicted[k] / count;
            DriftRow {
                quantity,
                measured,
                std_err: (var / count).sqrt(),
                predicted,
                relative_error: ((measured - predicted) / predicted).abs(),
            }
        })
        .collect();
    Ok(DriftTable {
        n,
        state: (x, y2, y3),
        iterations: sums.count,
        rejected: sums.rejected,
        rows,
    })
}

/// Red clauses created by setting a uniformly chosen free variable to 1/2,
/// one count per fresh formula with `x` variables and `y2`, `y3` clauses.
pub fn initial_red_counts(x: usize, y2: usize, y3: usize, trials: u64, seed: u64) -> Result<Vec<usize>> {
    if x < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 variables, got {x}")));
    }
    let config = SolverConfig {
        validate_colors: false,
        ..SolverConfig::default()
    };
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = rng::split(seed, t);
            let formula = generate_mixed_formula(x, &[(2, y2), (3, y3)], rng::split(s, 0))?;
            let mut solver = Solver::new(&formula, config.clone(), rng::split(s, 1))?;
            let free = (rng::split(s, 2) % x as u64) as usize;
            Ok(solver.inner_loop(free).initial_reds)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prediction_at_reference_state() {
        let (f, g2, g3) = drift_prediction(0.8, 0.2, 1.0);
        assert!((f + 9.4 / 7.0).abs() < 1e-12);
        assert!((g2 - 1.9).abs() < 1e-12);
        assert!((g3 - f * 3.75).abs() < 1e-12);
    }

    #[test]
    fn no_two_clauses_means_unit_step() {
        let (f, g2, g3) = drift_prediction(0.5, 0.0, 0.3);
        assert_eq!(f, -1.0);
        assert!((g2 - 0.3 * 12.0 / 4.0).abs() < 1e-12);
        assert!((g3 + 1.8).abs() < 1e-12);
    }

    #[test]
    fn goodness_line() {
        assert!(eps_good(100, 90, 1000, 0.01));
        assert!(!eps_good(100, 92, 1000, 0.01));
        assert!(!eps_good(5, 0, 1000, 0.01));
    }

    #[test]
    fn rejects_bad_start() {
        assert!(measure_drift(100, (1.0, 0.95, 1.0), 10, 2, 1, 0.01).is_err());
    }

    #[test]
    fn small_run_is_close() {
        let t = measure_drift(20_000, (0.8, 0.2, 1.0), 100, 16, 3, 0.01).unwrap();
        assert!(t.iterations > 1000);
        assert!(t.rows[0].relative_error < 0.1, "{t:?}");
        assert!(t.rows[2].relative_error < 0.1, "{t:?}");
    }
}
