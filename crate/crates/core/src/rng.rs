//! Deterministic RNG stream derivation.
//!
//! Every random quantity in a simulation is drawn from a ChaCha stream keyed
//! by `(master seed, replicate index, purpose)`. Replicates can therefore be
//! generated in any order (or in parallel) with identical results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Each purpose gets its own stream so that e.g.
/// the coefficient draw of replicate `n` never consumes noise variates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamKind {
    /// White-noise grid of one autoregressive replicate.
    Noise = 0,
    /// Random AR coefficient of one replicate.
    Theta = 1,
    /// Complex spectrum of a limit-field synthesis.
    Spectrum = 2,
}

/// RNG for `(seed, replicate, kind)`. ChaCha's 2^64 stream space is split as
/// `replicate * 4 + kind`, leaving room for future purposes.
pub fn stream_rng(seed: u64, replicate: u64, kind: StreamKind) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate.wrapping_mul(4).wrapping_add(kind as u64));
    rng
}
