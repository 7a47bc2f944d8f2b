//! The acceptance criteria, one function each.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use super::config::Config;
use super::experiments::{decider_vs_oracle, soundness_runs, solver_vs_oracle, success_curve, tracking};
use super::output::{write_csv, Provenance};
use crate::error::{Error, Result};
use crate::ode::{self, OdeStatus};
use crate::queue::{self, Arrival, QueueConfig};
use crate::random_interval;
use crate::rng::split;
use crate::solver::drift::measure_drift;
use crate::two_isat::phase_experiment;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

/// Where a criterion writes its tables.
pub struct Sink<'a> {
    pub dir: &'a Path,
    pub provenance: Provenance,
}

impl Sink<'_> {
    fn csv<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<()> {
        write_csv(&self.dir.join(format!("{name}.csv")), rows, &self.provenance)
    }
}

type Check = fn(&Config, u64, &Sink) -> Result<(bool, String)>;

pub const CRITERIA: [(u32, &str, Check); 14] = [
    (1, "interval laws", interval_laws),
    (2, "nearest-point cdf", nearest_cdf),
    (3, "queue mean", queue_mean),
    (4, "queue tail", queue_tail),
    (5, "exponent diagnostic", exponent),
    (6, "ivp barriers", ivp_barriers),
    (7, "threshold", threshold),
    (8, "handoff", handoff),
    (9, "2-clause decider vs oracle", decider_oracle),
    (10, "2-clause regime", two_clause_regime),
    (11, "solver soundness", soundness),
    (12, "solver success", success),
    (13, "ode tracking", ode_tracking),
    (14, "drift", drift),
];

/// Runs one criterion with its own seed stream and wall-clock timing. An
/// experiment error fails the criterion; only output errors propagate.
pub fn evaluate(id: u32, config: &Config, sink: &Sink) -> Result<Verdict> {
    let &(_, name, check) = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .unwrap_or_else(|| panic!("no criterion {id}"));
    let start = Instant::now();
    let (passed, detail) = match check(config, split(config.seed, id as u64), sink) {
        Ok(v) => v,
        Err(e @ Error::Io { .. }) => return Err(e),
        Err(e) => (false, format!("error: {e}")),
    };
    Ok(Verdict {
        id,
        name: name.to_string(),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let value = f()?;
    Ok((value, start.elapsed().as_secs_f64()))
}

fn over_budget(secs: f64, limit: f64) -> String {
    if secs < limit {
        String::new()
    } else {
        format!(", took {secs:.1} s (budget {limit} s)")
    }
}

fn interval_laws(cfg: &Config, seed: u64, sink: &Sink) -> Result<(bool, String)> {
    let (rows, secs) = timed(|| Ok(random_interval::probe(cfg.probe_samples, seed)))?;
    sink.csv("probe", &rows)?;
    let worst = rows
        .iter()
        .filter(|r| r.quantity != "nearest_fourth_moment")
        .map(|r| r.z_score().abs())
        .fold(0.0, f64::max);
    let passed = worst <= 3.0 && secs < cfg.probe_max_seconds;
    Ok((passed, format!("max |z| = {worst:.2} over {} samples{}", cfg.probe_samples, over_budget(secs, cfg.probe_max_seconds))))
}

#[derive(Serialize)]
struct CdfRow {
    samples: u64,
    sup_distance: f64,
    atom_mass: f64,
}

fn nearest_cdf(cfg: &Config, seed: u64, sink: &Sink) -> Result<(bool, String)> {
    let points = random_interval::sample_nearest_points(cfg.cdf_samples, seed);
    let distance = random_interval::nearest_half_cdf_distance(&points);
    let atom = points.iter().filter(|&&x| x == 0.5).count() as f64 / points.len().max(1) as f64;
    sink.csv("cdf", &[CdfRow { samples: cfg.cdf_samples, sup_distance: distance, atom_mass: atom }])?;
    Ok((
        distance <= cfg.cdf_tolerance,
        format!("sup distance {distance:.5}, mass {atom:.4} at 1/2"),
    ))
}

#[derive(Serialize)]
struct QueueMeanRow {
    a: u64,
    load: f64,
    m: u64,
    n: u64,
    runs: usize,
    mean: f64,
    std_err: f64,
    predicted: f64,
    relative_error: f64,
    non_extinct: usize,
}

fn arrival_slots(load: f64, n: u64) -> u64 {
    (load * 12.0 / 13.0 * n as f64).round() as u64
}

fn queue_mean(cfg: &Config, seed: u64, sink: &Sink) -> Result<(bool, String)> {
    let (rows, secs) = timed(|| {
        let mut rows = Vec::new();
        for (i, &a) in cfg.queue_a.iter().enumerate() {
            for (j, &load) in cfg.queue_load.iter().enumerate() {
                let m = arrival_slots(load, cfg.queue_n);
                let config = QueueConfig::new(a, Arrival::BinomialRandomP { m, n: cfg.queue_n });
                let stream = split(seed, (i * cfg.queue_load.len() + j) as u64);
                let stats = queue::summarize(&queue::sample_z(&config, cfg.queue_runs, stream)?);
                let predicted = queue::mean_z_random_p(a as f64, m as f64 / cfg.queue_n as f64)?;
                rows.push(QueueMeanRow {
                    a,
                    load,
                    m,
                    n: cfg.queue_n,
                    runs: cfg.queue_runs,
                    mean: stats.mean,
                    std_err: stats.std_err,
                    predicted,
                    relative_error: ((stats.mean - predicted) / predicted).abs(),
                    non_extinct: stats.non_extinct,
                });
            }
        }
        Ok(rows)
    })?;
    sink.csv("queue_mean", &rows)?;
    let worst = rows.iter().map(|r| r.relative_error).fold(0.0, f64::max);
    let passed = worst < cfg.queue_tolerance && rows.iter().all(|r| r.non_extinct == 0) && secs < cfg.queue_max_seconds;
    Ok((passed, format!("max relative error {:.2}% over {} settings{}", 100.0 * worst, rows.len(), over_budget(secs, cfg.queue_max_seconds))))
}

fn queue_tail(cfg: &Config, seed: u64, sink: &Sink) -> Result<(bool, String)> {
    let n = cfg.queue_n;
    let m = arrival_slots(cfg.tail_load, n);
    let grid: Vec<u64> = (1..=cfg.tail_alpha_max).collect();
    let tail = queue::tail_estimate(cfg.tail_a, m, n, &grid, cfg.tail_runs, seed, cfg.tail_min_count)?;
    sink.csv("queue_tail", &tail.rows)?;
    Ok((
        tail.slope < cfg.tail_max_slope,
        format!("slope {:.4} fitted on {} points", tail.slope, tail.fitted_points),
    ))
}

fn exponent(cfg: &Config, _seed: u64, sink: &Sink) -> Result<(bool, String)> {
    let k = cfg.exponent_points.max(2);
    let rows = (0..k)
        .map(|i| queue::exponent_diagnostic(0.5 + 0.45 * i as f64 / (k - 1) as f64, 0.0))
        .collect::<Result<Vec<_>>>()?;
    sink.csv("exponent", &rows)?;
    let worst = rows.iter().map(|d| d.delta).fold(f64::NEG_INFINITY, f64::max);
    Ok((worst < 0.0, format!("max delta {worst:.4} over {k} points")))
}

#[derive(Serialize)]
struct IvpRow {
    c: f64,
    step: f64,
    completed: bool,
    x_end: f64,
    barrier_violations: usize,
    halving_difference: f64,
}

fn ivp_barriers(cfg: &Config, _seed: u64, sink: &Sink) -> Result<(bool, String)> {
    let spot = ode::rhs(0.8, 4.8, 3.0)?;
    let mut rows = Vec::new();
    for &c in &cfg.ivp_c {
        let sol = ode::integrate(c, cfg.ivp_x_stop, cfg.ivp_step)?;
        let half = ode::integrate(c, cfg.ivp_x_stop, cfg.ivp_step / 2.0)?;
        let common = sol.y.len().min(half.y.len().div_ceil(2));
        let halving = (0..common)
            .map(|i| (sol.y[i] - half.y[2 * i]).abs())
            .fold(0.0, f64::max);
        rows.push(IvpRow {
            c,
            step: cfg.ivp_step,
            completed: matches!(sol.status, OdeStatus::Completed(_)),
            x_end: sol.x_end(),
            barrier_violations: ode::barrier_violations(&sol).len(),
            halving_difference: halving,
        });
    }
    sink.csv("ivp", &rows)?;
    let violations: usize = rows.iter().map(|r| r.barrier_violations).sum();
    let halving = rows.iter().map(|r| r.halving_difference).fold(0.0, f64::max);
    let passed = violations == 0 && (spot - 6.24).abs() <= 1e-12 && halving <= cfg.ivp_halving_tolerance;
    Ok((
        passed,
        format!("{violations} barrier violations, rhs spot value {spot}, step-halving difference {halving:.1e}"),
    ))
}

#[derive(Serialize)]
struct ThresholdRow {
    eps: f64,
    tol: f64,
    threshold: f64,
}

fn threshold(cfg: &Config, _seed: u64, sink: &Sink) -> Result<(bool, String)> {
    let (c, secs) = timed(|| ode::find_threshold(cfg.threshold_eps, cfg.threshold_lo, cfg.threshold_hi, cfg.threshold_tol))?;
    sink.csv("threshold", &[ThresholdRow { eps: cfg.threshold_eps, tol: cfg.threshold_tol, threshold: c }])?;
    let (lo, hi) = (cfg.threshold_range[0], cfg.threshold_range[1]);
    let passed = (lo..=hi).contains(&c) && secs < cfg.threshold_max_seconds;
    Ok((passed, format!("threshold {c:.4}{}", over_budget(secs, cfg.threshold_max_seconds))))
}

fn handoff(cfg: &Config, _seed: u64, sink: &Sink) -> Result<(bool, String)> {
    let r = ode::handoff_check(cfg.handoff_c, cfg.handoff_c_prime)?;
    sink.csv("handoff", std::slice::from_ref(&r))?;
    Ok((
        r.passes,
        format!(
            "clauses {:.4} vs bound {:.4}, 2-clause density {:.4}, residual density {:.4}",
            r.clauses, r.stop_bound, r.two_clause_density, r.residual_density
        ),
    ))
}

fn decider_oracle(cfg: &Config, seed: u64, sink: &Sink) -> Result<(bool, String)> {
    let (rows, secs) = timed(|| decider_vs_oracle(cfg.oracle_instances, cfg.oracle_max_vars, cfg.oracle_max_clauses, seed))?;
    sink.csv("decider_oracle", &rows)?;
    let bad = rows.iter().filter(|r| !r.agrees).count();
    let sat = rows.iter().filter(|r| r.oracle_sat).count();
    let passed = bad == 0 && secs < cfg.oracle_max_seconds;
    Ok((passed, format!("{bad} disagreements on {} instances ({sat} sat){}", rows.len(), over_budget(secs, cfg.oracle_max_seconds))))
}

fn two_clause_regime(cfg: &Config, seed: u64, sink: &Sink) -> Result<(bool, String)> {
    let rows = phase_experiment(cfg.phase2_n, &cfg.phase2_c, cfg.phase2_trials, seed)?;
    sink.csv("phase2", &rows)?;
    let worst = rows.iter().map(|r| r.sat_fraction).fold(1.0, f64::min);
    Ok((worst >= cfg.phase2_min_fraction, format!("lowest satisfiable fraction {worst:.3}")))
}

fn soundness(cfg: &Config, seed: u64, sink: &Sink) -> Result<(bool, String)> {
    let summary = soundness_runs(cfg.soundness_n, cfg.soundness_c, cfg.soundness_runs, split(seed, 0))?;
    let oracle = solver_vs_oracle(cfg.soundness_oracle_instances, 8, 12, split(seed, 1))?;
    sink.csv("soundness", std::slice::from_ref(&summary))?;
    sink.csv("solver_oracle", &oracle)?;
    let bad = oracle.iter().filter(|r| !r.agrees).count();
    let confirmed = oracle.iter().filter(|r| r.tool_sat).count();
    Ok((
        summary.clean() && bad == 0,
        format!(
            "{} runs, {} sat, {} with empty clauses, {} unflagged; {confirmed} solver sat results oracle-confirmed, {bad} refuted",
            summary.runs, summary.sat, summary.runs_with_empty_clause, summary.unflagged_empty_clauses
        ),
    ))
}

fn success(cfg: &Config, seed: u64, sink: &Sink) -> Result<(bool, String)> {
    let rows = success_curve(cfg.success_n, &cfg.success_c, cfg.success_trials, cfg.c_prime, seed)?;
    sink.csv("success_curve", &rows)?;
    let first = &rows[0];
    let others: Vec<String> = rows[1..]
        .iter()
        .map(|r| format!("c = {}: {:.2} [{:.2}, {:.2}]", r.c, r.success, r.ci_lo, r.ci_hi))
        .collect();
    let mut detail = format!("c = {}: {:.2} over {} runs", first.c, first.success, first.trials);
    if !others.is_empty() {
        detail.push_str(&format!("; {}", others.join("; ")));
    }
    Ok((first.success >= cfg.success_min_fraction, detail))
}

fn ode_tracking(cfg: &Config, seed: u64, sink: &Sink) -> Result<(bool, String)> {
    let (rows, secs) = timed(|| {
        tracking(cfg.tracking_n, cfg.tracking_c, cfg.tracking_c_prime, &cfg.tracking_x, ode::DEFAULT_STEP, seed)
    })?;
    sink.csv("tracking", &rows)?;
    let worst = rows.iter().map(|r| r.error_y2.max(r.error_y3)).fold(0.0, f64::max);
    let passed = rows.len() == cfg.tracking_x.len() && worst <= cfg.tracking_tolerance && secs < cfg.tracking_max_seconds;
    Ok((passed, format!("max deviation {worst:.4} at {} of {} points{}", rows.len(), cfg.tracking_x.len(), over_budget(secs, cfg.tracking_max_seconds))))
}

fn drift(cfg: &Config, seed: u64, sink: &Sink) -> Result<(bool, String)> {
    let s = &cfg.drift_state;
    let table = measure_drift(cfg.drift_n, (s[0], s[1], s[2]), cfg.drift_window, cfg.drift_seeds, seed, cfg.drift_eps)?;
    sink.csv("drift", &table.rows)?;
    let worst = table.max_relative_error();
    let passed = table.iterations >= cfg.drift_min_iterations && worst <= cfg.drift_tolerance;
    Ok((
        passed,
        format!("max relative error {:.2}% over {} iterations", 100.0 * worst, table.iterations),
    ))
}
