//! Seeded, parallel Monte Carlo.
//!
//! Trials are grouped into fixed chunks of [`CHUNK`] consecutive indices.
//! Each chunk folds its samples into a [`MomentAccumulator`] and chunks are
//! merged in index order, so every reported number is identical for any
//! thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::RandomStream;

/// Trials per work unit.
pub const CHUNK: u64 = 1024;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "FAULTSEARCH_THREADS";

/// One-pass mean and centered second moment (Welford; merged with Chan's
/// pairwise update).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MomentAccumulator {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl MomentAccumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &MomentAccumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for MomentAccumulator {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = MomentAccumulator::default();
        iter.into_iter().for_each(|x| acc.push(x));
        acc
    }
}

/// Summary of a Monte Carlo run. Truncated trials are counted but left out
/// of the moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub n_trials: u64,
    pub n_truncated: u64,
    pub master_seed: u64,
}

impl Estimate {
    pub fn from_moments(
        acc: &MomentAccumulator,
        n_trials: u64,
        n_truncated: u64,
        master_seed: u64,
    ) -> Self {
        let se = acc.stderr();
        Self {
            mean: acc.mean,
            stderr: se,
            ci95: (acc.mean - 1.96 * se, acc.mean + 1.96 * se),
            n_trials,
            n_truncated,
            master_seed,
        }
    }

    /// `|mean - reference|` in standard errors.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.mean - reference).abs() / self.stderr
    }
}

/// Worker count: explicit argument first, then [`THREADS_ENV`], else rayon's
/// default.
pub fn resolve_threads(parallelism: Option<usize>) -> Option<usize> {
    parallelism.filter(|&n| n > 0).or_else(|| {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
    })
}

fn with_pool<R: Send>(parallelism: Option<usize>, job: impl FnOnce() -> R + Send) -> R {
    match resolve_threads(parallelism) {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(job),
        None => job(),
    }
}

fn chunk_bounds(trials: u64) -> impl IndexedParallelIterator<Item = (u64, u64)> {
    let chunks = trials.div_ceil(CHUNK) as usize;
    (0..chunks)
        .into_par_iter()
        .map(move |c| (c as u64 * CHUNK, ((c as u64 + 1) * CHUNK).min(trials)))
}

/// Runs `trials` trials; trial `i` gets `RandomStream::for_trial(seed, i)`.
/// `trial` returns the sample and whether the trial was truncated.
pub fn run_trials<F>(
    trials: u64,
    master_seed: u64,
    parallelism: Option<usize>,
    trial: F,
) -> Estimate
where
    F: Fn(&mut RandomStream) -> (f64, bool) + Sync,
{
    let parts: Vec<(MomentAccumulator, u64)> = with_pool(parallelism, || {
        chunk_bounds(trials)
            .map(|(lo, hi)| {
                let mut acc = MomentAccumulator::default();
                let mut cut = 0;
                for i in lo..hi {
                    let mut rng = RandomStream::for_trial(master_seed, i);
                    let (x, truncated) = trial(&mut rng);
                    if truncated {
                        cut += 1;
                    } else {
                        acc.push(x);
                    }
                }
                (acc, cut)
            })
            .collect()
    });
    let mut total = MomentAccumulator::default();
    let mut cut = 0;
    for (acc, c) in &parts {
        total.merge(acc);
        cut += c;
    }
    Estimate::from_moments(&total, trials, cut, master_seed)
}

/// Per-trial results in trial order.
pub fn map_trials<T, F>(
    trials: u64,
    master_seed: u64,
    parallelism: Option<usize>,
    trial: F,
) -> Vec<T>
where
    T: Send,
    F: Fn(&mut RandomStream) -> T + Sync,
{
    with_pool(parallelism, || {
        (0..trials as usize)
            .into_par_iter()
            .map(|i| trial(&mut RandomStream::for_trial(master_seed, i as u64)))
            .collect()
    })
}

/// Linear-interpolated empirical quantile of `xs` (sorted in place).
pub fn quantile(xs: &mut [f64], q: f64) -> f64 {
    assert!(!xs.is_empty());
    xs.sort_by(f64::total_cmp);
    let h = q.clamp(0.0, 1.0) * (xs.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    xs[lo] + (h - lo as f64) * (xs[hi] - xs[lo])
}
