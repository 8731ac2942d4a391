//! Seed derivation shared by every randomized operation.

/// Derives a child seed from a parent seed and a stream index (SplitMix64
/// finalizer over the combined words). Stable across platforms and releases.
pub fn derive(parent: u64, stream: u64) -> u64 {
    let mut z = parent
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed derived from a textual key, e.g. a corpus name.
pub fn derive_str(parent: u64, key: &str) -> u64 {
    key.bytes()
        .fold(derive(parent, key.len() as u64), |acc, b| derive(acc, b as u64))
}
