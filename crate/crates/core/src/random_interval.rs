//! Random sub-intervals of `[0, 1]` and the quantities derived from them.
//!
//! A random interval is spanned by two iid uniform endpoints, which gives
//! `Pr[x ∈ I] = 2x(1-x)`. Its point nearest 1/2 has the CDF
//! [`nearest_half_cdf`], with an atom of mass 1/2 at 1/2. The variable
//! `P = 1 - 2X(1-X)` with `X` the nearest point is the probability that a
//! fresh random interval misses `X`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::interval::Interval;
use crate::rng;

pub const P_MEAN: f64 = 13.0 / 24.0;
pub const P_SECOND_MOMENT: f64 = 3.0 / 10.0;
/// `Pr[x̄(I) ∈ J]` for independent random intervals.
pub const NEAREST_IN_OTHER: f64 = 11.0 / 24.0;
pub const DISJOINT_PROBABILITY: f64 = 1.0 / 3.0;
/// `E[X²(1-X)²]` for the nearest-to-half point `X`.
pub const NEAREST_FOURTH_MOMENT: f64 = 13.0 / 240.0;

pub fn sample_interval<R: Rng + ?Sized>(rng: &mut R) -> Interval {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    Interval::from_endpoints(u, v)
}

/// `Pr[x ∈ I]` for a random interval `I`.
pub fn containment_probability(x: f64) -> f64 {
    if (0.0..=1.0).contains(&x) {
        2.0 * x * (1.0 - x)
    } else {
        0.0
    }
}

/// CDF of the point of a random interval nearest to 1/2.
pub fn nearest_half_cdf(t: f64) -> f64 {
    if t < 0.0 {
        0.0
    } else if t < 0.5 {
        t * t
    } else if t < 1.0 {
        1.0 - (1.0 - t) * (1.0 - t)
    } else {
        1.0
    }
}

/// Left limit of [`nearest_half_cdf`]; differs from the CDF only at the atom.
pub fn nearest_half_cdf_left(t: f64) -> f64 {
    if t == 0.5 {
        0.25
    } else {
        nearest_half_cdf(t)
    }
}

/// `(E P, E P²)`.
pub fn p_moments() -> (f64, f64) {
    (P_MEAN, P_SECOND_MOMENT)
}

pub fn prob_nearest_in_other() -> f64 {
    NEAREST_IN_OTHER
}

#[inline]
pub fn p_of(nearest: f64) -> f64 {
    1.0 - 2.0 * nearest * (1.0 - nearest)
}

/// Draws `P = 1 - 2X(1-X)` via a fresh random interval. Always in `[1/2, 1]`.
pub fn sample_p<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    p_of(sample_interval(rng).nearest_to_half())
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: u64,
}

impl Estimate {
    pub fn from_sums(sum: f64, sum_sq: f64, samples: u64) -> Self {
        let n = samples as f64;
        let mean = sum / n;
        let var = if samples > 1 {
            ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate {
            mean,
            std_err: (var / n).sqrt(),
            samples,
        }
    }

    /// Distance from `target` in units of standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        if self.std_err == 0.0 {
            if self.mean == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - target).abs() / self.std_err
        }
    }
}

const CHUNK: u64 = 1 << 16;

/// Monte Carlo mean of `f` over `samples` draws. Work is split into fixed
/// chunks with their own streams, so the result does not depend on the
/// number of threads.
pub fn monte_carlo<F>(samples: u64, seed: u64, f: F) -> Estimate
where
    F: Fn(&mut rng::StreamRng) -> f64 + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::substream(seed, c);
            let len = CHUNK.min(samples - c * CHUNK);
            let mut s = 0.0;
            let mut s2 = 0.0;
            for _ in 0..len {
                let x = f(&mut rng);
                s += x;
                s2 += x * x;
            }
            (s, s2)
        })
        .collect();
    let (sum, sum_sq) = partial
        .iter()
        .fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    Estimate::from_sums(sum, sum_sq, samples)
}

/// Draws `samples` nearest-to-half points, deterministically per seed.
pub fn sample_nearest_points(samples: u64, seed: u64) -> Vec<f64> {
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::substream(seed, c);
            let len = CHUNK.min(samples - c * CHUNK);
            (0..len)
                .map(|_| sample_interval(&mut rng).nearest_to_half())
                .collect()
        })
        .collect();
    parts.concat()
}

/// Sup-distance between the empirical CDF of `points` and
/// [`nearest_half_cdf`], taking both one-sided limits at every jump.
pub fn nearest_half_cdf_distance(points: &[f64]) -> f64 {
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == t {
            j += 1;
        }
        let below = i as f64 / n;
        let at = j as f64 / n;
        worst = worst
            .max((below - nearest_half_cdf_left(t)).abs())
            .max((at - nearest_half_cdf(t)).abs());
        i = j;
    }
    // The atom may carry no sample at all when `points` is tiny.
    let below_half = sorted.partition_point(|&x| x < 0.5) as f64 / n;
    let upto_half = sorted.partition_point(|&x| x <= 0.5) as f64 / n;
    worst
        .max((below_half - 0.25).abs())
        .max((upto_half - 0.75).abs())
}

/// One row of the `probe` table.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeRow {
    pub quantity: String,
    pub closed_form: f64,
    pub estimate: f64,
    pub std_err: f64,
    pub samples: u64,
}

impl ProbeRow {
    pub fn z_score(&self) -> f64 {
        Estimate {
            mean: self.estimate,
            std_err: self.std_err,
            samples: self.samples,
        }
        .z_score(self.closed_form)
    }
}

/// Closed forms against Monte Carlo estimates for every random-interval law.
pub fn probe(samples: u64, seed: u64) -> Vec<ProbeRow> {
    let mut rows = Vec::new();
    let mut stream = 0u64;
    let mut push = |quantity: String, closed_form: f64, est: Estimate| {
        rows.push(ProbeRow {
            quantity,
            closed_form,
            estimate: est.mean,
            std_err: est.std_err,
            samples: est.samples,
        });
    };
    let mut next_seed = || {
        stream += 1;
        rng::split(seed, stream)
    };

    for tenth in 1..=9 {
        let x = tenth as f64 / 10.0;
        let est = monte_carlo(samples, next_seed(), |r| {
            f64::from(u8::from(sample_interval(r).contains(x)))
        });
        push(format!("contains({x})"), containment_probability(x), est);
    }
    push(
        "mean_p".into(),
        P_MEAN,
        monte_carlo(samples, next_seed(), |r| sample_p(r)),
    );
    push(
        "second_moment_p".into(),
        P_SECOND_MOMENT,
        monte_carlo(samples, next_seed(), |r| sample_p(r).powi(2)),
    );
    push(
        "nearest_in_other".into(),
        NEAREST_IN_OTHER,
        monte_carlo(samples, next_seed(), |r| {
            let x = sample_interval(r).nearest_to_half();
            f64::from(u8::from(sample_interval(r).contains(x)))
        }),
    );
    push(
        "disjoint".into(),
        DISJOINT_PROBABILITY,
        monte_carlo(samples, next_seed(), |r| {
            let a = sample_interval(r);
            let b = sample_interval(r);
            f64::from(u8::from(a.is_disjoint(&b)))
        }),
    );
    push(
        "nearest_fourth_moment".into(),
        NEAREST_FOURTH_MOMENT,
        monte_carlo(samples, next_seed(), |r| {
            let x = sample_interval(r).nearest_to_half();
            (x * (1.0 - x)).powi(2)
        }),
    );
    rows
}
