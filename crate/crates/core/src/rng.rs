//! Seeded deterministic streams.
//!
//! All randomized procedures derive an independent SplitMix64 stream per
//! work item from `(seed, stream, index)`, so results do not depend on how
//! work is scheduled across threads.

use rand::SeedableRng;
pub use rand_xoshiro::SplitMix64;

/// The SplitMix64 output function, used to decorrelate derived seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream for work item `index` of logical stream `stream` under `seed`.
pub fn stream(seed: u64, stream: u64, index: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(mix64(mix64(seed ^ mix64(stream)) ^ index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| stream(7, 1, 3).next_u64()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(stream(7, 1, 3).next_u64(), stream(7, 1, 4).next_u64());
        assert_ne!(stream(7, 1, 3).next_u64(), stream(7, 2, 3).next_u64());
        assert_ne!(stream(7, 1, 3).next_u64(), stream(8, 1, 3).next_u64());
    }
}
