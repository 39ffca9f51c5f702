//! Counter-based seeding.
//!
//! Every random stream is keyed by `(global seed, trial index, stream tag)`,
//! so a trial draws the same numbers whether trials run serially or on a
//! thread pool, and adding draws to one stream never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random streams used inside one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Codebook = 1,
    Arrivals = 2,
    Noise = 3,
    Fallback = 4,
    Message = 5,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Builds the 32-byte ChaCha key for a `(seed, trial, tag)` triple.
pub fn derive_key(seed: u64, trial: u64, tag: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut state = splitmix64(seed ^ splitmix64(trial ^ splitmix64(tag)));
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    key
}

/// RNG for one stream of one trial.
pub fn trial_rng(seed: u64, trial: u64, stream: Stream) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(derive_key(seed, trial, stream as u64))
}

/// RNG for a standalone draw keyed only by a seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(derive_key(seed, 0, 0))
}
