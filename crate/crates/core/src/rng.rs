//! Random number streams.
//!
//! Every random draw in the crate comes from [`ChaCha8Rng`], a counter-based
//! generator with 2^64 independent streams per seed. Simulation `i` under base
//! seed `s` always reads stream `i` of seed `s`, which makes results
//! independent of thread scheduling and gives common random numbers across
//! allocations evaluated with the same base seed.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// Salt separating the stage-latent stream from the candidate-latent stream.
pub const STAGE_LATENT_SALT: u64 = 0x5354_4147_455f_4c41;

/// Mixes `seed` and `salt` into a new 64-bit seed (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for stream `stream` of `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
