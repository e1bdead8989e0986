//! Small Monte Carlo helpers: integer histograms, total variation against an
//! exact pmf, Wilson intervals and per-trial RNG streams.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::scalar::Real;

/// 97.5% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Independent deterministic stream `stream` derived from `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Empirical distribution of integer outcomes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Histogram {
    counts: BTreeMap<i64, u64>,
    total: u64,
}

impl Histogram {
    pub fn new() -> Histogram {
        Histogram::default()
    }

    pub fn record(&mut self, value: i64) {
        *self.counts.entry(value).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (&v, &c) in &other.counts {
            *self.counts.entry(v).or_insert(0) += c;
        }
        self.total += other.total;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, value: i64) -> u64 {
        self.counts.get(&value).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.counts.iter().map(|(&v, &c)| (v, c))
    }

    pub fn mean<F: Real>(&self) -> F {
        let n = F::from_count(self.total);
        self.iter().fold(F::zero(), |acc, (v, c)| {
            acc + F::from_i64(v).unwrap() * F::from_count(c) / n
        })
    }

    /// Population variance.
    pub fn variance<F: Real>(&self) -> F {
        let mean: F = self.mean();
        let n = F::from_count(self.total);
        self.iter().fold(F::zero(), |acc, (v, c)| {
            let dev = F::from_i64(v).unwrap() - mean;
            acc + dev * dev * F::from_count(c) / n
        })
    }

    /// Total variation distance to `pmf`, whose mass outside the observed
    /// values is taken as `1 - Σ_observed pmf`.
    pub fn tv_distance<F: Real>(&self, pmf: impl Fn(i64) -> F) -> F {
        let n = F::from_count(self.total);
        let mut seen_mass = F::zero();
        let mut gap = F::zero();
        for (v, c) in self.iter() {
            let p = pmf(v);
            seen_mass += p;
            gap += (F::from_count(c) / n - p).abs();
        }
        (gap + (F::one() - seen_mass).max(F::zero())) / F::lit(2.0)
    }

    /// Total variation distance between two empirical distributions.
    pub fn tv_between<F: Real>(&self, other: &Histogram) -> F {
        let (na, nb) = (F::from_count(self.total), F::from_count(other.total));
        let mut keys: Vec<i64> = self.counts.keys().chain(other.counts.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        let gap = keys.into_iter().fold(F::zero(), |acc, k| {
            acc + (F::from_count(self.count(k)) / na - F::from_count(other.count(k)) / nb).abs()
        });
        gap / F::lit(2.0)
    }
}

impl FromIterator<i64> for Histogram {
    fn from_iter<I: IntoIterator<Item = i64>>(iter: I) -> Histogram {
        let mut h = Histogram::new();
        for v in iter {
            h.record(v);
        }
        h
    }
}

/// A success count with its Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateEstimate {
    pub successes: u64,
    pub trials: u64,
    pub rate: f64,
    pub low: f64,
    pub high: f64,
}

impl RateEstimate {
    pub fn new(successes: u64, trials: u64) -> RateEstimate {
        let (low, high) = wilson_interval(successes, trials, Z_95);
        RateEstimate {
            successes,
            trials,
            rate: if trials == 0 {
                0.0
            } else {
                successes as f64 / trials as f64
            },
            low,
            high,
        }
    }

    /// Larger of the two distances from the point estimate to the bounds.
    pub fn half_width(&self) -> f64 {
        (self.rate - self.low).max(self.high - self.rate)
    }

    /// Combines counts from disjoint batches.
    pub fn merge(&self, other: &RateEstimate) -> RateEstimate {
        RateEstimate::new(self.successes + other.successes, self.trials + other.trials)
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let spread = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - spread).max(0.0), (center + spread).min(1.0))
}
