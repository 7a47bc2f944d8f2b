//! Flat `key = value` configuration for `run-all`.
//!
//! Every key is optional; missing keys take the values of
//! [`Config::default`]. Lists are comma-separated.

use std::path::Path;

use ini::Ini;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub threads: usize,

    pub probe_samples: u64,
    pub probe_max_seconds: f64,
    pub cdf_samples: u64,
    pub cdf_tolerance: f64,

    #[serde(deserialize_with = "one_or_many")]
    pub queue_a: Vec<u64>,
    #[serde(deserialize_with = "one_or_many")]
    pub queue_load: Vec<f64>,
    /// `n` of the `Bin(m, 2P/n)` arrivals; `m = load * 12/13 * n`.
    pub queue_n: u64,
    pub queue_runs: usize,
    pub queue_tolerance: f64,
    pub queue_max_seconds: f64,
    pub tail_load: f64,
    pub tail_a: u64,
    pub tail_runs: usize,
    pub tail_alpha_max: u64,
    pub tail_min_count: usize,
    pub tail_max_slope: f64,
    pub exponent_points: usize,

    #[serde(deserialize_with = "one_or_many")]
    pub ivp_c: Vec<f64>,
    pub ivp_step: f64,
    pub ivp_x_stop: f64,
    pub ivp_halving_tolerance: f64,
    pub threshold_eps: f64,
    pub threshold_tol: f64,
    pub threshold_lo: f64,
    pub threshold_hi: f64,
    #[serde(deserialize_with = "one_or_many")]
    pub threshold_range: Vec<f64>,
    pub threshold_max_seconds: f64,
    pub handoff_c: f64,
    pub handoff_c_prime: f64,

    pub oracle_instances: usize,
    pub oracle_max_vars: usize,
    pub oracle_max_clauses: usize,
    pub oracle_max_seconds: f64,
    pub phase2_n: usize,
    #[serde(deserialize_with = "one_or_many")]
    pub phase2_c: Vec<f64>,
    pub phase2_trials: usize,
    pub phase2_min_fraction: f64,

    pub soundness_runs: usize,
    pub soundness_n: usize,
    pub soundness_c: f64,
    pub soundness_oracle_instances: usize,
    pub success_n: usize,
    #[serde(deserialize_with = "one_or_many")]
    pub success_c: Vec<f64>,
    pub success_trials: usize,
    pub success_min_fraction: f64,
    pub c_prime: f64,
    pub tracking_n: usize,
    pub tracking_c: f64,
    pub tracking_c_prime: f64,
    #[serde(deserialize_with = "one_or_many")]
    pub tracking_x: Vec<f64>,
    pub tracking_tolerance: f64,
    pub tracking_max_seconds: f64,
    pub drift_n: usize,
    #[serde(deserialize_with = "one_or_many")]
    pub drift_state: Vec<f64>,
    pub drift_window: usize,
    pub drift_seeds: u64,
    pub drift_eps: f64,
    pub drift_tolerance: f64,
    pub drift_min_iterations: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 20240601,
            threads: 0,
            probe_samples: 1_000_000,
            probe_max_seconds: 10.0,
            cdf_samples: 1_000_000,
            cdf_tolerance: 0.005,
            queue_a: vec![1, 2, 5],
            queue_load: vec![0.3, 0.6, 0.8],
            queue_n: 13_000,
            queue_runs: 100_000,
            queue_tolerance: 0.05,
            queue_max_seconds: 60.0,
            tail_load: 0.5,
            tail_a: 1,
            tail_runs: 1_000_000,
            tail_alpha_max: 40,
            tail_min_count: 100,
            tail_max_slope: -0.01,
            exponent_points: 20,
            ivp_c: vec![0.5, 1.0, 2.0, 3.0],
            ivp_step: 1e-5,
            ivp_x_stop: 1e-3,
            ivp_halving_tolerance: 1e-8,
            threshold_eps: 1e-3,
            threshold_tol: 1e-3,
            threshold_lo: 1.0,
            threshold_hi: 4.0,
            threshold_range: vec![2.25, 2.35],
            threshold_max_seconds: 60.0,
            handoff_c: 2.3,
            handoff_c_prime: 35.0 / 24.0,
            oracle_instances: 500,
            oracle_max_vars: 6,
            oracle_max_clauses: 12,
            oracle_max_seconds: 30.0,
            phase2_n: 10_000,
            phase2_c: vec![1.2],
            phase2_trials: 100,
            phase2_min_fraction: 0.95,
            soundness_runs: 10_000,
            soundness_n: 1000,
            soundness_c: 2.0,
            soundness_oracle_instances: 500,
            success_n: 10_000,
            success_c: vec![2.0, 2.2],
            success_trials: 50,
            success_min_fraction: 0.9,
            c_prime: 35.0 / 24.0,
            tracking_n: 100_000,
            tracking_c: 2.0,
            tracking_c_prime: 1.0,
            tracking_x: vec![0.9, 0.7, 0.5],
            tracking_tolerance: 0.02,
            tracking_max_seconds: 120.0,
            drift_n: 100_000,
            drift_state: vec![0.8, 0.2, 1.0],
            drift_window: 500,
            drift_seeds: 24,
            drift_eps: 1e-3,
            drift_tolerance: 0.05,
            drift_min_iterations: 10_000,
        }
    }
}

impl Config {
    /// A small configuration that exercises every experiment in seconds.
    /// Its verdicts are not meaningful.
    pub fn smoke() -> Self {
        Config {
            probe_samples: 20_000,
            cdf_samples: 20_000,
            cdf_tolerance: 0.02,
            queue_runs: 2_000,
            queue_tolerance: 0.2,
            tail_runs: 20_000,
            tail_min_count: 20,
            ivp_c: vec![1.0, 2.0],
            ivp_step: 1e-3,
            ivp_halving_tolerance: 1e-6,
            threshold_tol: 0.05,
            oracle_instances: 50,
            phase2_n: 500,
            phase2_trials: 20,
            soundness_runs: 100,
            soundness_n: 300,
            soundness_oracle_instances: 50,
            success_n: 1000,
            success_trials: 10,
            tracking_n: 10_000,
            tracking_tolerance: 0.05,
            drift_n: 10_000,
            drift_window: 100,
            drift_seeds: 4,
            drift_tolerance: 0.3,
            drift_min_iterations: 100,
            ..Config::default()
        }
    }

    pub fn from_ini_str(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::parse(e.line, e.msg.to_string()))?;
        let mut map = Map::new();
        for (section, props) in ini.iter() {
            if let Some(name) = section {
                return Err(Error::InvalidParameter(format!(
                    "sections are not supported, found [{name}]"
                )));
            }
            for (key, value) in props.iter() {
                map.insert(key.to_string(), parse_value(value));
            }
        }
        let config: Config = serde_json::from_value(Value::Object(map))
            .map_err(|e| Error::InvalidParameter(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Config::from_ini_str(&text)
    }

    pub fn to_ini(&self) -> String {
        let Value::Object(map) = serde_json::to_value(self).expect("config serializes") else {
            unreachable!("config is a struct");
        };
        let mut out = String::new();
        for (key, value) in map {
            let text = match value {
                Value::Array(items) => items.iter().map(Value::to_string).collect::<Vec<_>>().join(", "),
                other => other.to_string(),
            };
            out.push_str(&format!("{key} = {text}\n"));
        }
        out
    }

    fn validate(&self) -> Result<()> {
        if self.drift_state.len() != 3 {
            return Err(Error::InvalidParameter("drift_state needs three values x, y2, y3".into()));
        }
        if self.threshold_range.len() != 2 {
            return Err(Error::InvalidParameter("threshold_range needs two values".into()));
        }
        Ok(())
    }
}

fn one_or_many<'de, D, T>(d: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: serde::Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

/// Numbers and lists of numbers become JSON values; anything else stays text.
fn parse_value(raw: &str) -> Value {
    let raw = raw.trim();
    if let Ok(v) = serde_json::from_str::<Value>(raw) {
        return v;
    }
    if raw.contains(',') {
        let items: Vec<Value> = raw.split(',').map(|s| parse_value(s)).collect();
        return Value::Array(items);
    }
    Value::String(raw.to_string())
}
