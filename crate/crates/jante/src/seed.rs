//! Per-run random streams derived from one master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// SplitMix64 hash of `(master, run_index)`.
pub fn derive_seed(master: u64, run_index: u64) -> u64 {
    mix(mix(master.wrapping_add(GOLDEN)) ^ run_index.wrapping_add(1).wrapping_mul(GOLDEN))
}

pub fn run_rng(master: u64, run_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, run_index))
}
