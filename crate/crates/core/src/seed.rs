//! Seed derivation for the independent random streams of a round.

/// Stream labels. Each stream of a round draws from its own generator so
/// that, for example, planning never perturbs the deployed epidemic.
pub mod stream {
    pub const EVALUATION: u64 = 1;
    pub const PLANNER: u64 = 2;
    pub const POOL: u64 = 3;
}

/// SplitMix64 finaliser over `base` and `stream`.
pub fn derive(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
