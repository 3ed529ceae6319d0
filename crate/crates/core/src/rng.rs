//! Seed plumbing. Every random decision in the crate is keyed by an explicit
//! seed plus a stream or counter, so results never depend on call order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A ChaCha stream dedicated to `stream` under `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based hash of a key tuple.
#[inline]
pub fn hash3(seed: u64, a: u64, b: u64) -> u64 {
    mix64(mix64(mix64(seed) ^ a) ^ b.rotate_left(29))
}

/// Maps a 64-bit hash to `[0, 1)` using its top 53 bits.
#[inline]
pub fn unit_f64(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Keyed Bernoulli(p) coin for the unordered pair `{u, v}`.
#[inline]
pub fn pair_coin(seed: u64, u: usize, v: usize, p: f64) -> bool {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    unit_f64(hash3(seed, a as u64, b as u64)) < p
}
