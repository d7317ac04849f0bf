//! Deterministic per-sample random streams.
//!
//! Each sample index gets its own ChaCha8 stream derived from the campaign
//! seed, so results are independent of evaluation order and worker count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; good avalanche for seed derivation.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Stream for sample `index` of the campaign identified by `(seed, domain)`.
pub fn sample_rng(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let a = splitmix64(seed ^ splitmix64(domain));
    let b = splitmix64(a ^ index);
    let c = splitmix64(b ^ 0xd1b54a32d192ed03);
    let d = splitmix64(c ^ 0x8cb92ba72f3d8dd7);
    key[0..8].copy_from_slice(&a.to_le_bytes());
    key[8..16].copy_from_slice(&b.to_le_bytes());
    key[16..24].copy_from_slice(&c.to_le_bytes());
    key[24..32].copy_from_slice(&d.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}
