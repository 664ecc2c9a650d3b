//! Seed derivation shared by the samplers and trainers.
//!
//! Every stochastic step draws from a ChaCha stream keyed by a sub-seed that
//! depends only on the master seed and a stable stream index (class id, tree
//! number, ...). Results therefore do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, stream: u64) -> u64 {
    mix(mix(master) ^ stream.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

pub fn stream_rng(master: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, stream))
}
