//! Per-replication random streams.
//!
//! Every replication draws from its own ChaCha8 stream addressed by
//! `(master seed, substream, replicate index)`. ChaCha is counter based, so a
//! stream is a pure function of its address and results do not depend on
//! which worker ran the replication or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent purposes a replication may need randomness for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Substream {
    Observations,
    Prior,
    /// Fresh suffix draws used by measurability and conditional checks.
    Resample,
}

impl Substream {
    fn tag(self) -> u64 {
        match self {
            Substream::Observations => 0x6f62_7365_7276_6174,
            Substream::Prior => 0x7072_696f_7200_0001,
            Substream::Resample => 0x7265_7361_6d70_6c65,
        }
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The RNG for one replication.
pub fn replicate_rng(seed: u64, substream: Substream, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix64(seed ^ substream.tag()));
    rng.set_stream(replicate);
    rng
}

/// Seed for the `index`-th member of a family of experiments (grid points,
/// horizons). Index 0 maps to `seed` itself.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    if index == 0 {
        seed
    } else {
        mix64(seed.wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
    }
}
