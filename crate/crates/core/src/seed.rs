//! Deterministic sub-seed derivation.
//!
//! Every randomized stage draws from its own stream derived from one master
//! seed and a stable label, so stages can be rerun or reordered without
//! perturbing each other. Labels are part of the on-disk manifest.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stage labels, fixed so manifests stay comparable across versions.
pub const STAGE_GEN: &str = "gen";
pub const STAGE_DR: &str = "dr";
pub const STAGE_SUBSAMPLE: &str = "subsample";
pub const STAGE_NOISE: &str = "noise";

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8], mut hash: u64) -> u64 {
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Derives the sub-seed for `(master, label, index)`.
pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    let mut h = fnv1a(&master.to_le_bytes(), FNV_OFFSET);
    h = fnv1a(label.as_bytes(), h);
    fnv1a(&index.to_le_bytes(), h)
}

/// RNG for a named stage. `index` distinguishes repeated uses of the same
/// stage, e.g. one stream per net or per boosting iteration.
pub fn stage_rng(master: u64, label: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, label, index))
}
