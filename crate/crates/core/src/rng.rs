//! Counter-based randomness.
//!
//! Every random draw in a simulation is addressed by `(seed, round, stream)`.
//! Agent sampling, the two signal noises, the benefit noise and exploration
//! therefore never share a generator, and any single round can be replayed
//! without touching the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Stream {
    Agent = 1,
    SignalX = 2,
    SignalXTilde = 3,
    Benefit = 4,
    Exploration = 5,
    Probe = 6,
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for one `(seed, round, stream)` cell.
pub fn round_rng(seed: u64, round: u64, stream: Stream) -> ChaCha8Rng {
    let s = stream as u64;
    let a = splitmix64(seed);
    let b = splitmix64(a ^ round);
    let c = splitmix64(b ^ s.rotate_left(32));
    let d = splitmix64(c ^ 0xA076_1D64_78BD_642F);
    let mut key = [0u8; 32];
    for (chunk, word) in key.chunks_exact_mut(8).zip([a, b, c, d]) {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
