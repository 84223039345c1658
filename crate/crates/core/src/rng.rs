//! Seeded random streams.
//!
//! Every consumer of randomness draws from its own ChaCha stream keyed by
//! `(seed, stream)`, so adding a new consumer never shifts existing draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub const STREAM_LATENT: u64 = 1;
pub const STREAM_MEASUREMENT: u64 = 2;
pub const STREAM_MASK: u64 = 3;
pub const STREAM_SAMPLE: u64 = 4;
pub const STREAM_DATASET: u64 = 5;

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn standard_normal_vec<R: rand::Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

/// The shared noise-end draw `z0 ~ N(0, I)` for a restoration seed.
pub fn latent_noise(dim: usize, seed: u64) -> Vec<f64> {
    standard_normal_vec(&mut stream(seed, STREAM_LATENT), dim)
}
