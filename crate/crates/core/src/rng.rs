//! Seed-stream derivation.
//!
//! Every random draw in the crate comes from a ChaCha8 generator whose seed is
//! derived from a base seed and a path of stream identifiers, e.g.
//! `(base, SUBJECT, s)` for subject `s` or `(base, PERMUTATION, k)` for
//! permutation `k`. A stream never depends on how many values other streams
//! consumed, so results are independent of evaluation order and thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags. Distinct tags keep unrelated consumers from colliding.
pub mod tag {
    pub const SUBJECT: u64 = 0x5355_424a;
    pub const NODE: u64 = 0x4e4f_4445;
    pub const WEIGHT: u64 = 0x5745_4947;
    pub const PERMUTATION: u64 = 0x5045_524d;
    pub const MONTE_CARLO: u64 = 0x4d43_4b53;
    pub const TREE: u64 = 0x5452_4545;
    pub const FOLD: u64 = 0x464f_4c44;
    pub const FOLD_ASSIGN: u64 = 0x4153_474e;
    pub const FEATURE: u64 = 0x4645_4154;
    pub const ENCODING: u64 = 0x454e_4344;
    pub const DECODING: u64 = 0x4445_4344;
    pub const AGGREGATE: u64 = 0x4147_4752;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a path of stream identifiers into a single 64-bit seed.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |acc, &id| splitmix64(acc ^ splitmix64(id)))
}

/// Generator for the stream `(base, path...)`.
pub fn stream(base: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, path))
}

/// Stable 64-bit FNV-1a hash, used to key per-node streams by name.
pub fn name_id(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}
