//! Seed derivation and RNG construction.
//!
//! Every stochastic operation takes an explicit seed and builds its generator
//! through [`derive_rng`], so a run is a pure function of `(config, master
//! seed)`. Realization `i` of an experiment uses the stream
//! `derive_rng(master_seed, i)`, which makes results independent of how
//! realizations are distributed over worker threads.

use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

/// SplitMix64 finalizer; used to expand and decorrelate seed material.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash `(master_seed, stream)` into a full 256-bit ChaCha seed.
///
/// Distinct `(master_seed, stream)` pairs yield statistically independent
/// generators; equal pairs yield bit-identical ones.
pub fn derive_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut state = master_seed ^ stream.rotate_left(32) ^ 0x6a09_e667_f3bc_c908;
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Hash `(master_seed, stream)` into a derived 64-bit seed, for handing to
/// components that take seeds rather than generators.
pub fn derive_seed(master_seed: u64, stream: u64) -> u64 {
    let mut state = master_seed ^ stream.rotate_left(32) ^ 0x9b05_688c_2b3e_6c1f;
    let first = splitmix64(&mut state);
    first ^ splitmix64(&mut state).rotate_left(17)
}
