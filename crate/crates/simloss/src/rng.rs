//! Portable random streams.
//!
//! Every random draw in the crate goes through [`Stream`], a ChaCha8 stream
//! cipher generator (`rand_chacha::ChaCha8Rng`). Its output is fully specified
//! by the seed and identical on every platform. Gaussian draws use the
//! Box-Muller transform so they do not depend on a sampler implementation
//! that may change between `rand` releases.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer, used to derive independent child seeds.
pub fn mix_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One standard normal draw via Box-Muller (cosine branch only).
pub fn standard_normal(rng: &mut Stream) -> f64 {
    // u1 in (0, 1] so ln(u1) is finite
    let u1 = 1.0 - rng.gen::<f64>();
    let u2 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn normal(rng: &mut Stream, mean: f64, sigma: f64) -> f64 {
    mean + sigma * standard_normal(rng)
}
