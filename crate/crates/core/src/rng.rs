//! Seeded random streams.
//!
//! Every consumer of randomness derives its own ChaCha stream from the master
//! seed plus a domain tag and up to two coordinates (for walks: iteration and
//! start node). Streams never depend on scheduling, so any number of workers
//! reproduces the same output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Domain tags keep streams for different stages disjoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Shuffle = 1,
    Walk = 2,
    Init = 3,
    Train = 4,
    Louvain = 5,
    Split = 6,
    Classify = 7,
    LinkPred = 8,
    Synth = 9,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hashes `(seed, domain, a, b)` into a 64-bit stream key.
pub fn derive_seed(seed: u64, domain: Domain, a: u64, b: u64) -> u64 {
    let mut h = splitmix64(seed ^ 0x6a09_e667_f3bc_c908);
    h = splitmix64(h ^ domain as u64);
    h = splitmix64(h ^ a);
    splitmix64(h ^ b.rotate_left(17))
}

pub fn stream(seed: u64, domain: Domain, a: u64, b: u64) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(seed, domain, a, b))
}
