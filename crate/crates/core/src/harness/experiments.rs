//! Seeded, trial-parallel experiments on the solver and the 2-clause decider.
//!
//! Trial `t` of grid point `i` draws its formula from `split(s, 0)` and its
//! solver stream from `split(s, 1)` with `s = split(split(seed, i), t)`.
//! Results are gathered by trial index, so they do not depend on the number
//! of threads.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{generate_formula, verify, Formula};
use crate::ode;
use crate::oracle::{brute_decide, OracleResult};
use crate::rng::split;
use crate::solver::{solve, Outcome, SolverConfig};
use crate::two_isat::{self, wilson_interval, Decision};

fn trial_seeds(seed: u64, point: usize, trial: usize) -> (u64, u64) {
    let s = split(split(seed, point as u64), trial as u64);
    (split(s, 0), split(s, 1))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuccessRow {
    pub c: f64,
    pub n: usize,
    pub trials: usize,
    pub success: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mean_repairs: f64,
    pub mean_zen: f64,
    pub mean_outer_iterations: f64,
}

struct TrialResult {
    sat: bool,
    repairs: usize,
    zen: usize,
    outer: usize,
}

/// Runs the solver on `trials` fresh formulas per density.
pub fn success_curve(n: usize, c_grid: &[f64], trials: usize, c_prime: f64, seed: u64) -> Result<Vec<SuccessRow>> {
    if n < 100 || trials == 0 {
        return Err(Error::InvalidParameter(format!(
            "success curve needs n >= 100 and trials >= 1, got n = {n}, trials = {trials}"
        )));
    }
    let config = SolverConfig { c_prime, validate_colors: false, ..SolverConfig::default() };
    c_grid
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let m = (c * n as f64).floor() as usize;
            let results: Vec<TrialResult> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let (fs, ss) = trial_seeds(seed, i, t);
                    let f = generate_formula(n, m, 3, fs)?;
                    let r = solve(&f, &config, ss)?;
                    let sat = match &r.outcome {
                        Outcome::Sat(a) => verify(&f, a)?,
                        Outcome::GaveUp(_) => false,
                    };
                    Ok(TrialResult {
                        sat,
                        repairs: r.stats.repairs,
                        zen: r.stats.zen.total(),
                        outer: r.stats.outer_iterations,
                    })
                })
                .collect::<Result<_>>()?;
            let k = trials as f64;
            let sat = results.iter().filter(|r| r.sat).count();
            let (ci_lo, ci_hi) = wilson_interval(sat, trials);
            Ok(SuccessRow {
                c,
                n,
                trials,
                success: sat as f64 / k,
                ci_lo,
                ci_hi,
                mean_repairs: results.iter().map(|r| r.repairs as f64).sum::<f64>() / k,
                mean_zen: results.iter().map(|r| r.zen as f64).sum::<f64>() / k,
                mean_outer_iterations: results.iter().map(|r| r.outer as f64).sum::<f64>() / k,
            })
        })
        .collect()
}

/// Invariant counters pooled over many solver runs.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SoundnessSummary {
    pub runs: usize,
    pub sat: usize,
    /// Sat results whose assignment failed verification.
    pub bad_assignments: usize,
    pub runs_with_empty_clause: usize,
    pub runs_with_zen: usize,
    /// Inner runs that created an empty clause without going Zen.
    pub unflagged_empty_clauses: usize,
    pub color_mismatches: usize,
    pub repeated_exposures: usize,
    pub unit_clauses_at_outer_start: usize,
}

impl SoundnessSummary {
    pub fn clean(&self) -> bool {
        self.bad_assignments == 0
            && self.unflagged_empty_clauses == 0
            && self.color_mismatches == 0
            && self.repeated_exposures == 0
            && self.unit_clauses_at_outer_start == 0
    }
}

pub fn soundness_runs(n: usize, c: f64, runs: usize, seed: u64) -> Result<SoundnessSummary> {
    let m = (c * n as f64).floor() as usize;
    let config = SolverConfig::default();
    let parts: Vec<SoundnessSummary> = (0..runs)
        .into_par_iter()
        .map(|t| {
            let (fs, ss) = trial_seeds(seed, 0, t);
            let f = generate_formula(n, m, 3, fs)?;
            let r = solve(&f, &config, ss)?;
            let st = &r.stats;
            let (sat, bad) = match &r.outcome {
                Outcome::Sat(a) => (1, usize::from(!verify(&f, a)?)),
                Outcome::GaveUp(_) => (0, 0),
            };
            Ok(SoundnessSummary {
                runs: 1,
                sat,
                bad_assignments: bad,
                runs_with_empty_clause: usize::from(st.empty_clauses > 0),
                runs_with_zen: usize::from(st.zen.total() > 0),
                unflagged_empty_clauses: st.unflagged_empty_clauses,
                color_mismatches: st.color_mismatches,
                repeated_exposures: st.repeated_exposures,
                unit_clauses_at_outer_start: st.unit_clauses_at_outer_start,
            })
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().fold(SoundnessSummary::default(), |a, b| SoundnessSummary {
        runs: a.runs + b.runs,
        sat: a.sat + b.sat,
        bad_assignments: a.bad_assignments + b.bad_assignments,
        runs_with_empty_clause: a.runs_with_empty_clause + b.runs_with_empty_clause,
        runs_with_zen: a.runs_with_zen + b.runs_with_zen,
        unflagged_empty_clauses: a.unflagged_empty_clauses + b.unflagged_empty_clauses,
        color_mismatches: a.color_mismatches + b.color_mismatches,
        repeated_exposures: a.repeated_exposures + b.repeated_exposures,
        unit_clauses_at_outer_start: a.unit_clauses_at_outer_start + b.unit_clauses_at_outer_start,
    }))
}

/// One small random instance checked against the brute-force oracle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleRow {
    pub instance: usize,
    pub n: usize,
    pub m: usize,
    pub oracle_sat: bool,
    pub tool_sat: bool,
    /// The tool's answer is consistent with the oracle and its assignment, if
    /// any, verifies.
    pub agrees: bool,
}

fn small_instance(seed: u64, index: usize, k: usize, max_vars: usize, max_clauses: usize) -> Result<Formula> {
    let s = split(seed, index as u64);
    let n = k + (split(s, 0) % (max_vars - k + 1) as u64) as usize;
    let m = (split(s, 1) % (max_clauses as u64 + 1)) as usize;
    generate_formula(n, m, k, split(s, 2))
}

/// The 2-clause decider against the oracle; they must agree exactly.
pub fn decider_vs_oracle(instances: usize, max_vars: usize, max_clauses: usize, seed: u64) -> Result<Vec<OracleRow>> {
    if max_vars < 2 {
        return Err(Error::InvalidParameter("max_vars must be at least 2".into()));
    }
    (0..instances)
        .into_par_iter()
        .map(|i| {
            let f = small_instance(seed, i, 2, max_vars, max_clauses)?;
            let oracle_sat = brute_decide(&f)?.is_sat();
            let (tool_sat, verified) = match two_isat::decide(&f)? {
                Decision::Sat(a) => (true, verify(&f, &a)?),
                Decision::Unsat(_) => (false, true),
            };
            Ok(OracleRow {
                instance: i,
                n: f.num_vars,
                m: f.clauses.len(),
                oracle_sat,
                tool_sat,
                agrees: oracle_sat == tool_sat && verified,
            })
        })
        .collect()
}

/// The solver against the oracle. The solver may give up on satisfiable
/// formulas; it may never report Sat on an unsatisfiable one.
pub fn solver_vs_oracle(instances: usize, max_vars: usize, max_clauses: usize, seed: u64) -> Result<Vec<OracleRow>> {
    if max_vars < 3 {
        return Err(Error::InvalidParameter("max_vars must be at least 3".into()));
    }
    let config = SolverConfig::default();
    (0..instances)
        .into_par_iter()
        .map(|i| {
            let f = small_instance(seed, i, 3, max_vars, max_clauses)?;
            let oracle = brute_decide(&f)?;
            let r = solve(&f, &config, split(seed ^ 0x5eed, i as u64))?;
            let (tool_sat, verified) = match &r.outcome {
                Outcome::Sat(a) => (true, verify(&f, a)?),
                Outcome::GaveUp(_) => (false, true),
            };
            let oracle_sat = matches!(oracle, OracleResult::Sat(_));
            Ok(OracleRow {
                instance: i,
                n: f.num_vars,
                m: f.clauses.len(),
                oracle_sat,
                tool_sat,
                agrees: verified && (oracle_sat || !tool_sat),
            })
        })
        .collect()
}

/// Scaled solver state against the differential equation at one `x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrackingRow {
    pub x_target: f64,
    pub x: f64,
    pub y2: f64,
    pub y3: f64,
    pub ode_y2: f64,
    pub ode_y3: f64,
    pub error_y2: f64,
    pub error_y3: f64,
}

/// One solver run at density `c` with instrumentation, compared with the
/// trajectory at the first outer iteration whose `X / n` is at most each
/// target. Targets the run never reaches produce no row.
pub fn tracking(n: usize, c: f64, c_prime: f64, targets: &[f64], step: f64, seed: u64) -> Result<Vec<TrackingRow>> {
    let f = generate_formula(n, (c * n as f64).floor() as usize, 3, split(seed, 0))?;
    let config = SolverConfig {
        c_prime,
        record_iterations: true,
        validate_colors: false,
        ..SolverConfig::default()
    };
    let report = solve(&f, &config, split(seed, 1))?;
    let lowest = targets.iter().copied().fold(1.0, f64::min);
    let sol = ode::integrate(c, (lowest - 0.05).clamp(1e-3, 0.999), step)?;
    let scale = n as f64;
    let mut rows = Vec::new();
    for &target in targets {
        let Some(it) = report.stats.iterations.iter().find(|it| it.x as f64 / scale <= target) else {
            continue;
        };
        let x = it.x as f64 / scale;
        let ode_y2 = sol
            .y_at(x)
            .ok_or_else(|| Error::Domain(format!("trajectory does not reach x = {x}")))?;
        let ode_y3 = c * x.powi(3);
        let (y2, y3) = (it.y2 as f64 / scale, it.y3 as f64 / scale);
        rows.push(TrackingRow {
            x_target: target,
            x,
            y2,
            y3,
            ode_y2,
            ode_y3,
            error_y2: (y2 - ode_y2).abs(),
            error_y3: (y3 - ode_y3).abs(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_formulas_always_succeed() {
        let rows = success_curve(1000, &[0.1], 20, crate::solver::DEFAULT_C_PRIME, 3).unwrap();
        assert_eq!(rows[0].success, 1.0);
        assert_eq!(rows[0].trials, 20);
    }

    #[test]
    fn success_curve_rejects_tiny_inputs() {
        assert!(success_curve(50, &[1.0], 5, 1.0, 0).is_err());
        assert!(success_curve(500, &[1.0], 0, 1.0, 0).is_err());
    }

    #[test]
    fn small_soundness_sample_is_clean() {
        let s = soundness_runs(300, 2.0, 40, 8).unwrap();
        assert_eq!(s.runs, 40);
        assert!(s.clean(), "{s:?}");
    }

    #[test]
    fn oracle_comparisons_agree() {
        assert!(decider_vs_oracle(60, 5, 10, 1).unwrap().iter().all(|r| r.agrees));
        assert!(solver_vs_oracle(60, 7, 12, 2).unwrap().iter().all(|r| r.agrees));
    }

    #[test]
    fn tracking_stays_close_at_moderate_size() {
        let rows = tracking(20_000, 2.0, 1.0, &[0.9, 0.7], 1e-4, 4).unwrap();
        assert_eq!(rows.len(), 2);
        for r in rows {
            assert!(r.error_y2 < 0.03 && r.error_y3 < 0.03, "{r:?}");
        }
    }
}
