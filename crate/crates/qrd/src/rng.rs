//! Reproducible random streams.
//!
//! All randomness in the crate derives from a single 64-bit master seed.
//! Parallel Monte Carlo blocks draw from non-overlapping ChaCha streams
//! selected by block index, so results are bit-identical for a given seed
//! regardless of thread count or scheduling.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream handle type used throughout the crate.
pub type Stream = ChaCha8Rng;

/// The master stream for a seed (stream index 0).
pub fn master_stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// An independent substream for a (seed, stream index) pair.
pub fn substream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives a fresh 64-bit seed for a child experiment row (splitmix64).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn substreams_are_independent_and_reproducible() {
        let a: Vec<u64> = (0..8).map(|_| substream(42, 1).next_u64()).collect();
        assert!(a.iter().all(|&v| v == a[0]));
        let s0 = substream(42, 0).next_u64();
        let s1 = substream(42, 1).next_u64();
        assert_ne!(s0, s1);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(7, 0), derive_seed(7, 1));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }
}
