//! Named, independent random streams derived from one master seed.
//!
//! Every consumer of randomness asks for its own stream by name (and an
//! optional index, e.g. the episode number), so adding episodes or changing
//! the training length never shifts the draws seen by anything else.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used everywhere in the simulator.
pub type SimRng = ChaCha8Rng;

/// Stream names used by the simulator.
pub mod stream {
    pub const SHADOWING: &str = "shadowing";
    pub const TRAINING_WALK: &str = "training-walk";
    pub const EVAL_WALK: &str = "eval-walk";
    pub const AGENT_EXPLORATION: &str = "agent-exploration";
    pub const POLICY: &str = "policy";
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Derive the seed of stream `label`/`index` from `master`.
pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    mix64(mix64(master ^ fnv1a(label)) ^ mix64(index.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Build the generator for stream `label`/`index`.
pub fn stream_rng(master: u64, label: &str, index: u64) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, label, index))
}
