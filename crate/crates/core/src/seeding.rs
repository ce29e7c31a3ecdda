//! Deterministic seed derivation.
//!
//! Every randomized step (ensemble member, repetition, split) draws from its
//! own generator seeded by `derive_seed(master, index, stream)`, so results
//! do not depend on execution order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Streams used inside the crate. Callers may use any other value.
pub const STREAM_CENTROIDS: u64 = 0;
pub const STREAM_CLUSTER_COUNT: u64 = 1;
pub const STREAM_DATA: u64 = 2;
pub const STREAM_SPLIT: u64 = 3;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed, an item index and a stream id into a child seed.
pub fn derive_seed(seed: u64, index: u64, stream: u64) -> u64 {
    let a = splitmix64(seed);
    let b = splitmix64(a ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93));
    splitmix64(b ^ stream.wrapping_mul(0xA076_1D64_78BD_642F))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
