//! Shared benchmark inputs.

use authattr_core::corpus::{default_profiles, generate_sample};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A deterministic batch of synthetic sources, one per persona cycle.
pub fn sample_sources(count: usize) -> Vec<String> {
    let profiles = default_profiles(count.min(8).max(2));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    (0..count)
        .map(|i| generate_sample(&profiles[i % profiles.len()], &mut rng))
        .collect()
}
