//! Seeded random streams.
//!
//! All randomized operations in this crate draw from a 64-bit
//! permuted-congruential generator ([`rand_pcg::Pcg64`], PCG XSL RR 128/64)
//! seeded through the splitmix64 mixer below. A `(seed, index)` pair yields
//! an independent stream, so work that is logically parallel (trees of a
//! forest, epochs of a training run) produces the same result regardless of
//! evaluation order.

use rand::SeedableRng;
use rand_pcg::Pcg64;

/// splitmix64 finalizer; constants from the reference implementation.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The stream for `seed` itself.
pub fn stream(seed: u64) -> Pcg64 {
    Pcg64::seed_from_u64(seed)
}

/// An independent stream for substream `index` of `seed`.
pub fn substream(seed: u64, index: u64) -> Pcg64 {
    Pcg64::seed_from_u64(splitmix64(seed ^ splitmix64(index)))
}

/// Two-level variant for nested loops (e.g. epoch, batch).
pub fn substream2(seed: u64, outer: u64, inner: u64) -> Pcg64 {
    Pcg64::seed_from_u64(splitmix64(
        seed ^ splitmix64(outer) ^ splitmix64(inner.wrapping_add(0x5151_5151)),
    ))
}

/// Folds a tag path into a child seed, for callers that need a plain `u64`
/// rather than a generator.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut out = splitmix64(seed);
    for &tag in tags {
        out = splitmix64(out ^ splitmix64(tag));
    }
    out
}
