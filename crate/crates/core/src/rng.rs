//! Reproducible randomness.
//!
//! Every trial owns a [`RandomStream`]: a ChaCha8 generator seeded from a
//! 64-bit value through `SeedableRng::seed_from_u64`. Per-trial seeds come
//! from [`derive_trial_seed`], a SplitMix64 mix of the master seed and the
//! trial index, so a trial's draws depend only on `(master_seed, index)` and
//! never on which thread ran it or in what order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer (Steele, Lea and Flood). Bijective on `u64`.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `trial_index` under `master_seed`.
///
/// For a fixed master seed the map is a bijection of the index, so distinct
/// trials never share a seed.
pub fn derive_trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    splitmix64(splitmix64(master_seed) ^ trial_index.wrapping_mul(GOLDEN_GAMMA))
}

/// A seeded stream of uniform and Bernoulli draws, confined to one trial.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    draws: u64,
    inner: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            draws: 0,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream for trial `index` of a run seeded with `master_seed`.
    pub fn for_trial(master_seed: u64, index: u64) -> Self {
        Self::new(derive_trial_seed(master_seed, index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of variates drawn so far.
    pub fn position(&self) -> u64 {
        self.draws
    }

    /// Uniform draw on `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        self.draws += 1;
        self.inner.random::<f64>()
    }

    /// `true` with probability `q`. `q <= 0` never fires, `q >= 1` always does.
    pub fn bernoulli(&mut self, q: f64) -> bool {
        self.uniform() < q
    }
}
