//! Seed policy: one master seed, counter-addressed sub-streams.
//!
//! Every trial draws from its own ChaCha8 stream keyed by `(seed, trial_id)`,
//! so a trial can be regenerated in isolation and trials can be evaluated in
//! any order or in parallel without changing results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

pub fn trial_stream(seed: u64, trial_id: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_id);
    rng
}

/// SplitMix64 finalizer, used to derive independent seeds for sub-runs
/// (sweep points, scan points, service sessions).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
