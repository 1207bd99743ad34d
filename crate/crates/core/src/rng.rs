//! Counter-style seed derivation.
//!
//! Every replicate owns a generator seeded from `(master, label, index)`
//! through a SplitMix64 finalizer, so streams never need coordination and
//! results do not depend on the order replicates are scheduled in.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

/// Generator used by every simulation in the crate.
pub type WalkRng = Xoshiro256PlusPlus;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over the label bytes; only used to turn stream names into integers.
fn label_hash(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Seed for replicate `index` of stream `label` under `master`.
pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    let a = splitmix64(master ^ 0x5851_F42D_4C95_7F2D);
    let b = splitmix64(a ^ label_hash(label));
    splitmix64(b ^ splitmix64(index.wrapping_add(0x2545_F491_4F6C_DD1D)))
}

pub fn rng_from_seed(seed: u64) -> WalkRng {
    WalkRng::seed_from_u64(seed)
}

pub fn stream_rng(master: u64, label: &str, index: u64) -> WalkRng {
    rng_from_seed(derive_seed(master, label, index))
}

/// Uniform draw in `[0, 1)` with 53 bits of resolution.
#[inline]
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform integer in `0..n` (Lemire's multiply-shift, with rejection).
#[inline]
pub fn below<R: RngCore + ?Sized>(rng: &mut R, n: u64) -> u64 {
    debug_assert!(n > 0);
    let threshold = n.wrapping_neg() % n;
    loop {
        let m = u128::from(rng.next_u64()) * u128::from(n);
        if (m as u64) >= threshold {
            return (m >> 64) as u64;
        }
    }
}
