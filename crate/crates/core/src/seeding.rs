//! Deterministic hierarchical seed derivation.
//!
//! Every stochastic component takes an explicit `u64` seed. Experiments fan
//! out into arms, iterations, measurement groups, grid points, and so on;
//! each child context derives its own seed with [`derive_seed`] so that
//!
//! * the same (seed, path) always yields the same stream,
//! * sibling contexts get statistically independent streams, and
//! * parallel and serial execution orders produce identical results.
//!
//! Derivation chains a SplitMix64 step per path component, which is cheap and
//! has full 64-bit avalanche, so nearby indices do not produce nearby seeds.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `base` and a path of context indices.
///
/// `derive_seed(s, &[a, b])` equals `derive_seed(derive_seed(s, &[a]), &[b])`,
/// so callers can derive incrementally as they descend.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    let mut state = base;
    for &component in path {
        state = splitmix64(state ^ splitmix64(component));
    }
    state
}

/// Seeded RNG used everywhere sampling is needed.
///
/// ChaCha's output is platform-independent, which keeps experiment outputs
/// byte-identical across machines for a fixed seed.
pub fn rng_from_seed(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}
