//! Seeded, portable randomness.
//!
//! Every random decision comes from a PCG-XSH-RR 64/32 generator (64-bit
//! state, selectable stream). A run is keyed by one `u64` seed; separate
//! concerns draw from separate streams so adding draws in one place does not
//! shift another.

use rand_pcg::Pcg32;

/// Stream ids. Fixed so that recorded runs stay reproducible.
pub mod streams {
    pub const SEALER: u64 = 1;
    pub const FREQUENCIES: u64 = 2;
    pub const ARRIVALS: u64 = 3;
    pub const SERVICE: u64 = 4;
    pub const NETWORK: u64 = 5;
    pub const ROUTING: u64 = 6;
}

/// SplitMix64 finalizer, used to spread small seeds over the state space.
pub const fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream(seed: u64, stream_id: u64) -> Pcg32 {
    Pcg32::new(mix64(seed), stream_id)
}

/// Maps 64 random bits onto `[0, 1)` with 53 bits of precision.
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
