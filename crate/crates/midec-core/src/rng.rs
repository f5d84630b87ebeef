//! Seeded random-number streams for reproducible Monte Carlo.
//!
//! Each chain gets its own ChaCha stream determined only by `(seed, chain
//! index)`, so per-chain trajectories are identical no matter how chains are
//! scheduled across threads. Rejection sampling consumes a variable number of
//! draws, which is fine: streams never interleave across chains.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// RNG for one chain, a pure function of `(seed, chain_index)`.
pub fn chain_rng(seed: u64, chain_index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(chain_index);
    rng
}

/// RNG for auxiliary randomness (bootstrap resampling, shuffles) that must
/// not collide with chain streams; uses the stream space above 2^63.
pub fn aux_rng(seed: u64, salt: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream((1u64 << 63) | salt);
    rng
}

/// A d-dimensional standard normal draw.
pub fn standard_normal_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(d, |_, _| rng.sample(StandardNormal))
}
