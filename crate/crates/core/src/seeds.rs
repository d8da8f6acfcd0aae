//! Seed derivation. Every random consumer gets its own ChaCha8 stream, so a
//! node shuffle and a train/test split drawn from one user seed are not the
//! same permutation.

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Seed for the stream named `purpose` under `seed`.
pub fn derive_seed(seed: u64, purpose: &str) -> u64 {
    seed ^ fnv1a(purpose.as_bytes())
}
