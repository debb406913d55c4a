//! Seeded, counter-based random streams.
//!
//! Every stochastic routine takes an explicit `u64` seed. Work item `i` of a
//! batch draws from its own ChaCha stream `(seed, i)`, so batches can be
//! generated in any order, or in parallel, and still be bit-identical.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::Scalar;

pub type StreamRng = ChaCha8Rng;

/// RNG for work item `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derives an independent seed for a named sub-experiment.
pub fn derive(seed: u64, tag: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn normal<T: Scalar, R: rand::Rng + ?Sized>(rng: &mut R) -> T {
    let z: f64 = StandardNormal.sample(rng);
    T::lit(z)
}

pub fn normal_vec<T: Scalar, R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> nalgebra::DVector<T> {
    nalgebra::DVector::from_fn(n, |_, _| normal(rng))
}
