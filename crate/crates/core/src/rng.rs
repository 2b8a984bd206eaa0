//! The single seedable generator used everywhere randomness enters the crate.
//!
//! Map initialization, training sample draws, Poisson noise, dot placement
//! and phantom synthesis all go through [`seeded`]. Golden tests pin the
//! stream, so swapping the generator changes every reproducible output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// ChaCha with 8 rounds, seeded from a `u64`.
pub type SomRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SomRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform index in `0..n`. `n` must be non-zero.
#[inline]
pub fn index(rng: &mut SomRng, n: usize) -> usize {
    rng.random_range(0..n)
}

/// Uniform real in `[0, 1)`.
#[inline]
pub fn unit(rng: &mut SomRng) -> f64 {
    rng.random::<f64>()
}

/// Derives an independent stream seed from a base seed and a lane number.
///
/// SplitMix64 finalizer; used to give each image or repeat its own seed
/// without the lanes sharing a prefix of the stream.
pub fn derive(seed: u64, lane: u64) -> u64 {
    let mut z = seed ^ lane.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn stream_is_pinned() {
        let mut rng = seeded(42);
        let first: Vec<u64> = (0..3).map(|_| rng.next_u64()).collect();
        let mut again = seeded(42);
        let second: Vec<u64> = (0..3).map(|_| again.next_u64()).collect();
        assert_eq!(first, second);
        assert_eq!(first, GOLDEN_SEED_42);
    }

    #[test]
    fn index_stays_in_range() {
        let mut rng = seeded(1);
        for n in 1..50 {
            for _ in 0..20 {
                assert!(index(&mut rng, n) < n);
            }
        }
    }

    #[test]
    fn derived_lanes_differ() {
        assert_ne!(derive(7, 0), derive(7, 1));
        assert_eq!(derive(7, 3), derive(7, 3));
    }

    const GOLDEN_SEED_42: [u64; 3] = [12578764544318200737, 17529487244874322312, 7886285670807131020];
}
