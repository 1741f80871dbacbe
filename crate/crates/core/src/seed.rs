//! Seed derivation and RNG construction.
//!
//! Every randomized stage draws from its own ChaCha8 stream whose seed is a
//! fixed hash of the master seed and a stage label, so one master seed pins an
//! entire run while stages stay independent of each other's consumption.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG used throughout the toolkit.
pub type Rng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a stage seed from `master` and a stage label.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut h = FNV_OFFSET;
    for byte in master.to_le_bytes().iter().chain(label.as_bytes()) {
        h ^= u64::from(*byte);
        h = h.wrapping_mul(FNV_PRIME);
    }
    splitmix64(h)
}

/// RNG for `seed`, positioned on stream `stream`.
pub fn rng(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
