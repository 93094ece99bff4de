//! Deterministic sub-seed derivation.
//!
//! Every randomized step (fold shuffling, target sampling, per-seller item
//! draws, …) seeds its own generator from the single run seed plus a stable
//! label path. That keeps each step reproducible in isolation, independent of
//! thread scheduling and of whatever other steps ran before it.
//!
//! Derivation scheme: fold the run seed and each path component through a
//! SplitMix64 step (the finalizer from Steele et al.'s "Fast splittable
//! pseudorandom number generators"). String components are first reduced with
//! FNV-1a. Both are fixed algorithms, so derived seeds are stable across
//! platforms and releases.

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a hash of a string, for mixing identifiers into a seed path.
pub fn label(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derives a sub-seed from the run seed and a path of components.
pub fn mix(seed: u64, parts: &[u64]) -> u64 {
    let mut z = splitmix64(seed);
    for p in parts {
        z = splitmix64(z ^ p);
    }
    z
}
