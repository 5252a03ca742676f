//! Seed derivation for reproducible parallel Monte Carlo: one master seed
//! expands into independent substream seeds via splitmix64.

/// Advance the state and return the next derived seed.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Derive the `index`-th substream seed of `master` without shared state.
pub fn derive(master: u64, index: u64) -> u64 {
    let mut state = master ^ index.wrapping_mul(0xA24BAED4963EE407);
    splitmix64(&mut state)
}
