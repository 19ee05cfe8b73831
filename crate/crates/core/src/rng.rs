//! Seed derivation.
//!
//! Every random draw comes from a `ChaCha8Rng` whose seed is a splitmix64
//! hash of `(master_seed, domain, ids...)`. Streams therefore depend only on
//! what they are for, never on the order in which they are created, which
//! keeps results independent of thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream domains. The numeric values are part of the reproducibility contract.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    CommonSupport = 1,
    IndividualSupport = 2,
    Signal = 3,
    Matrix = 4,
    Noise = 5,
    Topology = 6,
    GridPoint = 7,
    Trial = 8,
}

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds `ids` into `seed` one word at a time.
pub fn derive_seed(seed: u64, domain: Domain, ids: &[u64]) -> u64 {
    let mut h = splitmix64(seed ^ splitmix64(domain as u64));
    for &id in ids {
        h = splitmix64(h ^ splitmix64(id.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    h
}

pub fn stream(seed: u64, domain: Domain, ids: &[u64]) -> Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, domain, ids))
}
