//! Deterministic seed derivation.

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent child seed from `base` and a tag.
pub fn derive_seed(base: u64, tag: u64) -> u64 {
    mix(base.wrapping_add(mix(tag.wrapping_add(0x9e37_79b9_7f4a_7c15))))
}

/// Tags used to split a master seed into per-purpose seeds.
pub mod tag {
    pub const TOPOLOGY: u64 = 1;
    pub const ENSEMBLE: u64 = 2;
    pub const MONTE_CARLO: u64 = 3;
    pub const VARIANCES: u64 = 10;
    pub const SIGNAL: u64 = 11;
}
