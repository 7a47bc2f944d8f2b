//! Experiment orchestration: the acceptance suite, its configuration and
//! its CSV/JSON output.

pub mod config;
pub mod criteria;
pub mod experiments;
pub mod output;

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
pub use config::Config;
pub use criteria::Verdict;
use criteria::{Sink, CRITERIA};
use output::{write_json, Provenance};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub seed: u64,
    pub threads: usize,
    pub passed: bool,
    pub criteria: Vec<Verdict>,
}

impl Summary {
    pub fn failures(&self) -> impl Iterator<Item = &Verdict> {
        self.criteria.iter().filter(|v| !v.passed)
    }
}

/// Runs `f` on a pool of `threads` workers, or on the global pool for 0.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Evaluates every criterion, writing one CSV per experiment plus
/// `config.ini` and `summary.json` into `out_dir`.
pub fn run_all(config: &Config, out_dir: &Path, with_timestamp: bool) -> Result<Summary> {
    run_selected(config, out_dir, with_timestamp, &[])
}

/// Like [`run_all`] restricted to the listed criterion ids (all if empty).
pub fn run_selected(config: &Config, out_dir: &Path, with_timestamp: bool, ids: &[u32]) -> Result<Summary> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let config_path = out_dir.join("config.ini");
    std::fs::write(&config_path, config.to_ini()).map_err(|e| Error::io(&config_path, e))?;
    let sink = Sink { dir: out_dir, provenance: Provenance::new(config.seed, with_timestamp) };
    let verdicts = with_threads(config.threads, || {
        CRITERIA
            .iter()
            .filter(|c| ids.is_empty() || ids.contains(&c.0))
            .map(|c| criteria::evaluate(c.0, config, &sink))
            .collect::<Result<Vec<_>>>()
    })??;
    let summary = Summary {
        seed: config.seed,
        threads: config.threads,
        passed: verdicts.iter().all(|v| v.passed),
        criteria: verdicts,
    };
    write_json(&out_dir.join("summary.json"), &summary)?;
    Ok(summary)
}
