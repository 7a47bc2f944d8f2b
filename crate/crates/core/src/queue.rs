//! The discrete queue that models one inner-loop run.
//!
//! `Q(1) = a` and `Q(j + 1) = Q(j) - 1 + B(j + 1)` while `Q(j) > 0`; once the
//! queue empties it stays empty (only the first busy period matters). The
//! total population is `Z = inf { j > 0 : Q(j) = 0 } - 1`.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::random_interval::{sample_p, P_MEAN, P_SECOND_MOMENT};
use crate::rng::{self, StreamRng};

pub const DEFAULT_STEP_CAP: u64 = 100_000_000;

/// `12^3 / (5 * 13^2)`, the quadratic coefficient of the tail exponent.
pub const EXPONENT_K: f64 = 1728.0 / 845.0;

/// Law of the arrivals `B(j)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Arrival {
    Deterministic(u64),
    BinomialFixedP { m: u64, p: f64 },
    /// `Bin(m, 2P/n)` with a fresh `P = 1 - 2X(1 - X)` each step.
    BinomialRandomP { m: u64, n: u64 },
}

impl Arrival {
    pub fn mean(&self) -> f64 {
        match *self {
            Arrival::Deterministic(b) => b as f64,
            Arrival::BinomialFixedP { m, p } => m as f64 * p,
            Arrival::BinomialRandomP { m, n } => 2.0 * P_MEAN * m as f64 / n as f64,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Arrival::Deterministic(_) => Ok(()),
            Arrival::BinomialFixedP { p, .. } if (0.0..=1.0).contains(&p) => Ok(()),
            Arrival::BinomialFixedP { p, .. } => {
                Err(Error::InvalidParameter(format!("arrival probability {p} outside [0, 1]")))
            }
            Arrival::BinomialRandomP { n, .. } if n >= 2 => Ok(()),
            Arrival::BinomialRandomP { .. } => {
                Err(Error::InvalidParameter("random-P arrivals need n >= 2".into()))
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match *self {
            Arrival::Deterministic(b) => b,
            Arrival::BinomialFixedP { m, p } => binomial(m, p, rng),
            Arrival::BinomialRandomP { m, n } => {
                let p = 2.0 * sample_p(rng) / n as f64;
                binomial(m, p.min(1.0), rng)
            }
        }
    }
}

fn binomial<R: Rng + ?Sized>(m: u64, p: f64, rng: &mut R) -> u64 {
    if m == 0 || p <= 0.0 {
        return 0;
    }
    Binomial::new(m, p).expect("p checked").sample(rng)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QueueConfig {
    pub a: u64,
    pub arrival: Arrival,
    pub step_cap: u64,
}

impl QueueConfig {
    pub fn new(a: u64, arrival: Arrival) -> Self {
        QueueConfig { a, arrival, step_cap: DEFAULT_STEP_CAP }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum QueueOutcome {
    /// The busy period ended; `trace` holds `Q(1), ..., Q(z + 1)` if requested.
    Extinct { z: u64, trace: Option<Vec<u64>> },
    /// The queue was still busy after `steps` services.
    NonExtinct { steps: u64 },
}

impl QueueOutcome {
    pub fn z(&self) -> Option<u64> {
        match self {
            QueueOutcome::Extinct { z, .. } => Some(*z),
            QueueOutcome::NonExtinct { .. } => None,
        }
    }
}

pub fn simulate(config: &QueueConfig, seed: u64, keep_trace: bool) -> Result<QueueOutcome> {
    config.arrival.validate()?;
    let mut rng = rng::stream(seed);
    Ok(run(config, &mut rng, keep_trace))
}

fn run(config: &QueueConfig, rng: &mut StreamRng, keep_trace: bool) -> QueueOutcome {
    let mut trace = keep_trace.then(|| vec![config.a]);
    let mut q = config.a;
    let mut served = 0u64;
    while q > 0 {
        if served >= config.step_cap {
            return QueueOutcome::NonExtinct { steps: served };
        }
        q = q - 1 + config.arrival.sample(rng);
        served += 1;
        if let Some(t) = trace.as_mut() {
            t.push(q);
        }
    }
    QueueOutcome::Extinct { z: served, trace }
}

/// Replays the update rule on a trace with the arrivals it implies. True iff
/// the trace starts at `a`, every step is `Q - 1 + B` with `B >= 0`, the
/// last entry is the only zero, and `z` equals its length minus one.
pub fn trace_is_consistent(a: u64, z: u64, trace: &[u64]) -> bool {
    if trace.first() != Some(&a) || trace.len() as u64 != z + 1 {
        return false;
    }
    let (last, body) = trace.split_last().expect("non-empty");
    *last == 0
        && body.iter().all(|&q| q > 0)
        && trace.windows(2).all(|w| w[1] + 1 >= w[0])
}

/// `a / (1 - lambda_b)`, the mean total population.
pub fn mean_z(a: f64, lambda_b: f64) -> Result<f64> {
    if !(lambda_b < 1.0) || lambda_b < 0.0 {
        return Err(Error::Domain(format!("mean arrival rate {lambda_b} must lie in [0, 1)")));
    }
    Ok(a / (1.0 - lambda_b))
}

/// Mean of `Z` for random-P arrivals with density `lambda = m / n`.
pub fn mean_z_random_p(a: f64, lambda: f64) -> Result<f64> {
    mean_z(a, 2.0 * P_MEAN * lambda)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleStats {
    pub runs: usize,
    pub mean: f64,
    pub std_err: f64,
    pub non_extinct: usize,
}

/// Simulates `runs` independent queues; run `i` uses stream `split(seed, i)`.
pub fn sample_z(config: &QueueConfig, runs: usize, seed: u64) -> Result<Vec<Option<u64>>> {
    config.arrival.validate()?;
    Ok((0..runs)
        .into_par_iter()
        .map(|i| run(config, &mut rng::substream(seed, i as u64), false).z())
        .collect())
}

pub fn summarize(samples: &[Option<u64>]) -> SampleStats {
    let done: Vec<f64> = samples.iter().flatten().map(|&z| z as f64).collect();
    let k = done.len() as f64;
    let mean = done.iter().sum::<f64>() / k.max(1.0);
    let var = done.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
    SampleStats {
        runs: samples.len(),
        mean,
        std_err: (var / k.max(1.0)).sqrt(),
        non_extinct: samples.len() - done.len(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailRow {
    pub alpha: u64,
    pub exceed: usize,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailEstimate {
    pub rows: Vec<TailRow>,
    /// Least-squares slope of `ln Pr[Z >= alpha]` against `alpha`, fitted on
    /// rows with at least `min_count` exceedances.
    pub slope: f64,
    pub fitted_points: usize,
}

pub fn tail_estimate(
    a: u64,
    m: u64,
    n: u64,
    alpha_grid: &[u64],
    runs: usize,
    seed: u64,
    min_count: usize,
) -> Result<TailEstimate> {
    let config = QueueConfig::new(a, Arrival::BinomialRandomP { m, n });
    let samples = sample_z(&config, runs, seed)?;
    Ok(tail_from_samples(&samples, alpha_grid, min_count))
}

pub fn tail_from_samples(samples: &[Option<u64>], alpha_grid: &[u64], min_count: usize) -> TailEstimate {
    let runs = samples.len().max(1) as f64;
    let rows: Vec<TailRow> = alpha_grid
        .iter()
        .map(|&alpha| {
            // a run that never died out exceeds every alpha
            let exceed = samples.iter().filter(|z| z.is_none_or(|z| z >= alpha)).count();
            TailRow { alpha, exceed, probability: exceed as f64 / runs }
        })
        .collect();
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.exceed >= min_count.max(1))
        .map(|r| (r.alpha as f64, r.probability.ln()))
        .collect();
    TailEstimate { slope: least_squares_slope(&points), fitted_points: points.len(), rows }
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return f64::NAN;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Upper bound on the generating function `E[y^B]` of random-P arrivals.
pub fn pgf_bound(y: f64, lambda: f64) -> Result<f64> {
    if lambda * (y - 1.0) > 0.5 {
        return Err(Error::Domain(format!(
            "lambda * (y - 1) = {} exceeds 1/2",
            lambda * (y - 1.0)
        )));
    }
    let u = lambda * (y - 1.0);
    Ok((2.0 * P_MEAN * u + 4.0 * P_SECOND_MOMENT * u * u).exp())
}

/// Monte-Carlo estimate of `E[y^B]` for `B ~ Bin(m, 2P/n)`.
pub fn pgf_monte_carlo(y: f64, m: u64, n: u64, samples: u64, seed: u64) -> Result<crate::random_interval::Estimate> {
    let arrival = Arrival::BinomialRandomP { m, n };
    arrival.validate()?;
    Ok(crate::random_interval::monte_carlo(samples, seed, move |rng| {
        y.powi(arrival.sample(rng) as i32)
    }))
}

/// The larger root `u_r` of the stationarity condition of the tail exponent
/// and the exponent `delta_r(u_r)` itself.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentDiagnostic {
    pub r: f64,
    pub a_over_alpha: f64,
    pub u: f64,
    pub delta: f64,
}

pub fn exponent_delta(r: f64, u: f64) -> f64 {
    r * u + 0.5 * EXPONENT_K * r * r * u * u - u.ln_1p()
}

pub fn exponent_diagnostic(r: f64, a_over_alpha: f64) -> Result<ExponentDiagnostic> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("r = {r} must lie in (0, 1)")));
    }
    let k = EXPONENT_K;
    let b = 1.0 + k * r;
    let disc = b * b + 4.0 * k * (1.0 - r - a_over_alpha);
    if disc < 0.0 {
        return Err(Error::Domain(format!("no real root for r = {r}, a/alpha = {a_over_alpha}")));
    }
    let u = (-b + disc.sqrt()) / (2.0 * k * r);
    Ok(ExponentDiagnostic { r, a_over_alpha, u, delta: exponent_delta(r, u) })
}

/// Pointwise-coupled runs with `m_lo <= m_hi` arrival slots: both queues see
/// the same `P(j)` and the same uniforms `U(j, i)`, the smaller one only the
/// first `m_lo` of them. Returns `(Z_lo, Z_hi)`.
pub fn simulate_coupled(a: u64, m_lo: u64, m_hi: u64, n: u64, seed: u64, step_cap: u64) -> (Option<u64>, Option<u64>) {
    assert!(m_lo <= m_hi && n >= 2);
    let mut rng = rng::stream(seed);
    let (mut q_lo, mut q_hi) = (a, a);
    let (mut z_lo, mut z_hi) = (None, None);
    if a == 0 {
        return (Some(0), Some(0));
    }
    let mut j = 0u64;
    while z_hi.is_none() && j < step_cap {
        let p = 2.0 * sample_p(&mut rng) / n as f64;
        let mut b_lo = 0;
        let mut b_hi = 0;
        for i in 0..m_hi {
            if rng.random::<f64>() <= p {
                b_hi += 1;
                if i < m_lo {
                    b_lo += 1;
                }
            }
        }
        j += 1;
        if q_lo > 0 {
            q_lo = q_lo - 1 + b_lo;
            if q_lo == 0 {
                z_lo = Some(j);
            }
        }
        q_hi = q_hi - 1 + b_hi;
        if q_hi == 0 {
            z_hi = Some(j);
        }
    }
    (z_lo, z_hi)
}

/// Queue whose arrival slots `M(j)` drift uniformly in `[m_lo, m_hi]`.
pub fn simulate_drifting(a: u64, m_lo: u64, m_hi: u64, n: u64, seed: u64, step_cap: u64) -> Option<u64> {
    assert!(m_lo <= m_hi && n >= 2);
    let mut rng = rng::stream(seed);
    let mut q = a;
    let mut j = 0;
    while q > 0 {
        if j >= step_cap {
            return None;
        }
        let m = rng.random_range(m_lo..=m_hi);
        let p = 2.0 * sample_p(&mut rng) / n as f64;
        q = q - 1 + binomial(m, p, &mut rng);
        j += 1;
    }
    Some(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn trivial_queues() {
        let none = QueueConfig::new(0, Arrival::Deterministic(0));
        assert_eq!(simulate(&none, 1, false).unwrap().z(), Some(0));

        let death = QueueConfig::new(3, Arrival::Deterministic(0));
        let out = simulate(&death, 1, true).unwrap();
        assert_eq!(out, QueueOutcome::Extinct { z: 3, trace: Some(vec![3, 2, 1, 0]) });

        let mut stuck = QueueConfig::new(1, Arrival::Deterministic(1));
        stuck.step_cap = 1000;
        assert_eq!(simulate(&stuck, 1, false).unwrap(), QueueOutcome::NonExtinct { steps: 1000 });
    }

    #[test]
    fn closed_form_mean() {
        assert_eq!(mean_z(1.0, 0.0).unwrap(), 1.0);
        assert!((mean_z_random_p(2.0, 6.0 / 13.0).unwrap() - 4.0).abs() < 1e-12);
        assert!(mean_z(1.0, 1.0).is_err());
    }

    #[test]
    fn simulated_mean_matches() {
        let config = QueueConfig::new(2, Arrival::BinomialRandomP { m: 6000, n: 13000 });
        let stats = summarize(&sample_z(&config, 100_000, 5).unwrap());
        assert_eq!(stats.non_extinct, 0);
        assert!((stats.mean - 4.0).abs() < 0.2, "mean {}", stats.mean);
    }

    #[test]
    fn pgf_bound_values() {
        assert_eq!(pgf_bound(1.0, 0.7).unwrap(), 1.0);
        let b = pgf_bound(1.2, 0.5).unwrap();
        assert!((b - (13.0 / 120.0 + 0.012f64).exp()).abs() < 1e-12);
        assert!((b - 1.1279).abs() < 1e-4);
        assert!(pgf_bound(3.0, 0.5).is_err());
    }

    #[test]
    fn exponent_is_negative_at_the_root() {
        for i in 0..20 {
            let r = 0.5 + 0.45 * i as f64 / 19.0;
            let d = exponent_diagnostic(r, 0.0).unwrap();
            assert!(d.u > 0.0 && d.u < (1.0 - r) / r);
            assert!(d.delta < 0.0, "r = {r}: {d:?}");
            // stationary point of the exponent
            let h = 1e-6;
            let slope = (exponent_delta(r, d.u + h) - exponent_delta(r, d.u - h)) / (2.0 * h);
            assert!(slope.abs() < 1e-6);
        }
    }

    #[test]
    fn no_arrivals_tail() {
        let samples = sample_z(&QueueConfig::new(4, Arrival::BinomialRandomP { m: 0, n: 10 }), 100, 1).unwrap();
        let t = tail_from_samples(&samples, &[4, 5], 1);
        assert_eq!(t.rows[0].probability, 1.0);
        assert_eq!(t.rows[1].probability, 0.0);
    }

    proptest! {
        #[test]
        fn traces_replay(a in 0u64..20, m in 0u64..400, seed in any::<u64>()) {
            let config = QueueConfig::new(a, Arrival::BinomialRandomP { m, n: 500 });
            if let QueueOutcome::Extinct { z, trace: Some(trace) } = simulate(&config, seed, true).unwrap() {
                prop_assert!(trace_is_consistent(a, z, &trace));
                prop_assert!(a == 0 || z >= a);
            }
        }

        #[test]
        fn coupling_is_monotone(a in 1u64..5, m_lo in 0u64..60, extra in 0u64..30, seed in any::<u64>()) {
            let (lo, hi) = simulate_coupled(a, m_lo, m_lo + extra, 100, seed, 1_000_000);
            let (lo, hi) = (lo.unwrap(), hi.unwrap());
            prop_assert!(hi >= lo);
        }
    }
}
