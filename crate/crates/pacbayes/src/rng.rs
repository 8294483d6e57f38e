//! Seeded, splittable random streams.
//!
//! Reproducibility is a hard requirement here: coverage experiments must be
//! bit-identical across runs, platforms, and worker counts. The crate
//! therefore pins a single named generator, `splitmix64-counter`, instead of
//! deferring to a platform RNG:
//!
//! - each stream is a SplitMix64 sequence (Steele, Lea & Flood's 64-bit
//!   finalizer over a Weyl sequence);
//! - the stream for trial `t` of a run with master seed `m` is seeded with
//!   `mix64(mix64(m) + (t + 1) · 0x9E3779B97F4A7C15)`, so workers own
//!   disjoint streams indexed by the trial counter alone.
//!
//! Run configurations record the generator by name so that outputs stay
//! reproducible even if a future default changes.

/// Name of the pinned seed-derivation scheme, recorded in resolved configs.
pub const SEED_SCHEME: &str = "splitmix64-counter";

const GOLDEN_GAMMA: u64 = 0x9E3779B97F4A7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Seed for the per-trial stream of `trial` under `master_seed`.
#[inline]
pub fn trial_seed(master_seed: u64, trial: u64) -> u64 {
    mix64(mix64(master_seed).wrapping_add(trial.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// A SplitMix64 stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform draw in the half-open interval `(0, 1]`.
    ///
    /// The open lower end keeps inverse-CDF transforms of unbounded models
    /// finite: `u = 0` would map a Pareto quantile to +∞.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 1.0) * (1.0 / 9007199254740992.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let mut a = SplitMix64::new(42);
        let mut b = SplitMix64::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn uniform_is_in_open_closed_unit_interval() {
        let mut rng = SplitMix64::new(7);
        for _ in 0..100_000 {
            let u = rng.next_uniform();
            assert!(u > 0.0 && u <= 1.0);
        }
    }

    #[test]
    fn trial_seeds_are_distinct() {
        let seeds: Vec<u64> = (0..1000).map(|t| trial_seed(123, t)).collect();
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), seeds.len());
    }

    #[test]
    fn trial_seed_ignores_trial_order() {
        // Stream for trial 5 is the same whether or not trials 0..4 ran.
        assert_eq!(trial_seed(9, 5), trial_seed(9, 5));
        assert_ne!(trial_seed(9, 5), trial_seed(9, 6));
        assert_ne!(trial_seed(9, 5), trial_seed(10, 5));
    }
}
