//! Unit-clause search with path repair for random interval-signed 3-SAT.
//!
//! Formulas are conjunctions of clauses whose literals assert `x ∈ [lo, hi]`
//! for variables ranging over `[0, 1]`. Besides the solver this crate holds
//! the tools used to check its analysis: random-interval laws, an exact
//! 2-clause decider, the branching-queue model of the inner loop, the
//! threshold differential equation and a brute-force oracle.

pub mod error;
pub mod format;
pub mod harness;
pub mod formula;
pub mod interval;
pub mod ode;
pub mod oracle;
pub mod queue;
pub mod random_interval;
pub mod rng;
pub mod solver;
pub mod two_isat;

pub use error::{Error, Result};
pub use formula::{generate_formula, verify, Assignment, Clause, Formula, Literal};
pub use interval::Interval;
