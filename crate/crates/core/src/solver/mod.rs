//! Unit-clause search with tentative values and one-shot path repair.
//!
//! The outer loop repeatedly picks a free variable uniformly among the
//! unused ones and runs the inner loop from it. The inner loop sets the free
//! variable to 1/2 and then services red clauses (clauses left with a single
//! unexposed literal, all other literals false) by setting the remaining
//! variable to the point of its interval nearest 1/2. Values stay tentative
//! until the run ends. If a serviced variable turns out to sit in a second
//! red clause, the decisions on the tree path that led there are rewritten
//! once (the repair); any further trouble is ridden out ("Zen") and may
//! leave empty clauses behind.
//!
//! Once `Y2 + Y3 <= c' X`, one random literal is dropped from every 3-clause
//! and the remaining 2-clause formula goes to [`crate::two_isat::decide`].

mod inner;
mod state;

pub mod drift;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{verify, Assignment, Formula};
use crate::rng::{self, StreamRng};
use crate::two_isat::{self, Decision};

pub use inner::{InnerReport, ZenCause};
pub use state::Color;

use state::Work;

pub const DEFAULT_C_PRIME: f64 = 35.0 / 24.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// The outer loop runs while `Y2 + Y3 > c_prime * X`.
    pub c_prime: f64,
    /// Stop with [`GiveUpCause::IterationLimit`] after this many outer
    /// iterations. Only useful for instrumentation.
    pub max_outer_iterations: Option<usize>,
    /// Keep one [`IterationRecord`] per outer iteration.
    pub record_iterations: bool,
    /// Recompute the color of every touched clause after each inner
    /// iteration and count disagreements.
    pub validate_colors: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            c_prime: DEFAULT_C_PRIME,
            max_outer_iterations: None,
            record_iterations: false,
            validate_colors: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GiveUpCause {
    EmptyClause,
    FinalUnsat,
    IterationLimit,
    /// The merged assignment failed verification. Never expected.
    VerificationFailed,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Sat(Assignment),
    GaveUp(GiveUpCause),
}

impl Outcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, Outcome::Sat(_))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZenCounts {
    pub colored_ternary: usize,
    pub cycle: usize,
    pub blue_clause: usize,
    pub triple_hit: usize,
    pub phase_two: usize,
}

impl ZenCounts {
    pub fn total(&self) -> usize {
        self.colored_ternary + self.cycle + self.blue_clause + self.triple_hit + self.phase_two
    }

    fn record(&mut self, cause: ZenCause) {
        match cause {
            ZenCause::ColoredTernary => self.colored_ternary += 1,
            ZenCause::Cycle => self.cycle += 1,
            ZenCause::BlueClause => self.blue_clause += 1,
            ZenCause::TripleHit => self.triple_hit += 1,
            ZenCause::PhaseTwoCollision => self.phase_two += 1,
        }
    }
}

/// State before one outer iteration and its changes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub x: usize,
    pub y2: usize,
    pub y3: usize,
    pub dx: i64,
    pub dy2: i64,
    pub dy3: i64,
    /// Red clauses right after the free variable was set to 1/2.
    pub initial_reds: usize,
    pub services: usize,
    pub repaired: bool,
    pub zen: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub outer_iterations: usize,
    pub phase_one_services: usize,
    pub phase_two_services: usize,
    pub fatalities: usize,
    pub repairs: usize,
    pub zen: ZenCounts,
    pub empty_clauses: usize,
    /// Inner runs that created an empty clause without going Zen.
    pub unflagged_empty_clauses: usize,
    pub color_mismatches: usize,
    /// Literals exposed twice within one run.
    pub repeated_exposures: usize,
    /// Outer iterations that started with a 1-clause present.
    pub unit_clauses_at_outer_start: usize,
    /// `(X, Y2, Y3)` when the outer loop stopped.
    pub final_counts: (usize, usize, usize),
    pub iterations: Vec<IterationRecord>,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub outcome: Outcome,
    pub stats: RunStats,
}

/// A solver run in progress. [`solve`] drives it to completion; the
/// methods are public so single inner-loop runs can be inspected.
pub struct Solver {
    work: Work,
    rng: StreamRng,
    config: SolverConfig,
    stats: RunStats,
    run: inner::RunState,
}

impl Solver {
    pub fn new(formula: &Formula, config: SolverConfig, seed: u64) -> Result<Self> {
        formula.validate()?;
        if let Some(c) = formula.clauses.iter().find(|c| c.len() < 2) {
            return Err(Error::InvalidParameter(format!(
                "the solver expects 2- and 3-clauses, found a clause of length {}",
                c.len()
            )));
        }
        if !(config.c_prime >= 0.0) {
            return Err(Error::InvalidParameter(format!("c' = {} must be >= 0", config.c_prime)));
        }
        Ok(Solver {
            work: Work::new(formula),
            rng: rng::stream(seed),
            config,
            stats: RunStats::default(),
            run: inner::RunState::default(),
        })
    }

    /// `(X, Y2, Y3)`: unused variables and live 2- and 3-clauses.
    pub fn counts(&self) -> (usize, usize, usize) {
        (self.work.unused_count(), self.work.by_len[2], self.work.by_len[3])
    }

    pub fn unit_clauses(&self) -> usize {
        self.work.by_len[1]
    }

    pub fn assignment(&self) -> &Assignment {
        &self.work.values
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    pub fn residual_formula(&self) -> Formula {
        self.work.residual_formula()
    }

    fn should_continue(&self) -> bool {
        let (x, y2, y3) = self.counts();
        (y2 + y3) as f64 > self.config.c_prime * x as f64
    }

    /// One outer iteration from a uniformly chosen unused variable.
    fn outer_step(&mut self) -> InnerReport {
        let (x, y2, y3) = self.counts();
        if self.unit_clauses() > 0 {
            self.stats.unit_clauses_at_outer_start += 1;
        }
        let free = self.work.unused_at(self.rng.random_range(0..x));
        let report = self.inner_loop(free);
        self.stats.outer_iterations += 1;
        if self.config.record_iterations {
            let (x1, y21, y31) = self.counts();
            self.stats.iterations.push(IterationRecord {
                x,
                y2,
                y3,
                dx: x1 as i64 - x as i64,
                dy2: y21 as i64 - y2 as i64,
                dy3: y31 as i64 - y3 as i64,
                initial_reds: report.initial_reds,
                services: report.services,
                repaired: report.repair_path.is_some(),
                zen: report.zen.is_some(),
            });
        }
        report
    }

    pub fn run(mut self, original: &Formula) -> SolveReport {
        let outcome = self.run_to_end(original);
        self.stats.final_counts = self.counts();
        SolveReport { outcome, stats: self.stats }
    }

    fn run_to_end(&mut self, original: &Formula) -> Outcome {
        while self.should_continue() {
            if self
                .config
                .max_outer_iterations
                .is_some_and(|cap| self.stats.outer_iterations >= cap)
            {
                return Outcome::GaveUp(GiveUpCause::IterationLimit);
            }
            self.outer_step();
            if self.work.by_len[0] > 0 {
                return Outcome::GaveUp(GiveUpCause::EmptyClause);
            }
        }
        self.stats.final_counts = self.counts();

        // Shorten every 3-clause by one random literal.
        for ci in 0..self.work.clauses.len() {
            let clause = &mut self.work.clauses[ci];
            if clause.alive && clause.len == 3 {
                let drop = self.rng.random_range(0..3);
                clause.lits.swap(drop, 2);
                clause.len = 2;
                self.work.by_len[3] -= 1;
                self.work.by_len[2] += 1;
            }
        }
        let residual = self.work.residual_formula();
        let decided = match two_isat::decide(&residual) {
            Ok(Decision::Sat(a)) => a,
            Ok(Decision::Unsat(_)) => return Outcome::GaveUp(GiveUpCause::FinalUnsat),
            Err(_) => return Outcome::GaveUp(GiveUpCause::VerificationFailed),
        };
        let values: Vec<f64> = (0..self.work.num_vars)
            .map(|v| match self.work.values.get(v) {
                Some(x) => x,
                None => decided.get(v).unwrap_or(0.5),
            })
            .collect();
        let assignment = Assignment::from_values(&values);
        match verify(original, &assignment) {
            Ok(true) => Outcome::Sat(assignment),
            _ => Outcome::GaveUp(GiveUpCause::VerificationFailed),
        }
    }
}

pub fn solve(formula: &Formula, config: &SolverConfig, seed: u64) -> Result<SolveReport> {
    Ok(Solver::new(formula, config.clone(), seed)?.run(formula))
}
