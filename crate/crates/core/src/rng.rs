//! Reproducible random number streams.
//!
//! Every Monte Carlo trial draws from a ChaCha12 stream selected by
//! (master seed, trial index). ChaCha is counter based, so trial i's
//! stream is a pure function of the pair and is independent of scheduling.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Stream for trial `index` under `seed`. Distinct indices give distinct,
/// non-overlapping streams.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
