//! Keyed pseudo-random function shared by every processor.
//!
//! All randomness that must agree across processors (filter rows, subsampling
//! priorities, bucket placement, CountMin placement) is a pure function of a
//! 64-bit key and a small tuple of integers. Changing anything in this module
//! changes every survival set, so the construction is versioned.

use std::hash::Hasher;

use siphasher::sip::SipHasher13;

/// Bumped whenever the output of [`prf`] changes for any input.
pub const PRF_VERSION: u32 = 1;

/// Domain-separation tags. Each consumer of the PRF uses its own tag so that
/// streams never alias.
pub mod tag {
    pub const ITERATION: u64 = 0x6974_6572;
    pub const ROW: u64 = 0x0072_6f77;
    pub const PRIORITY: u64 = 0x7072_696f;
    pub const DITHER: u64 = 0x6469_7468;
    pub const NAIVE: u64 = 0x6e61_6976;
    pub const ASSIGN: u64 = 0x6173_7367;
    pub const GRID: u64 = 0x6772_6964;
    pub const SKETCH: u64 = 0x736b_6574;
    pub const GENERATOR: u64 = 0x0067_656e;
    pub const SAMPLE: u64 = 0x7361_6d70;
}

const KEY_HI: u64 = 0x4c53_465f_4a4f_494e;

/// SipHash-1-3 keyed by `key`, evaluated on `(tag, a, b)`.
#[inline]
pub fn prf(key: u64, tag: u64, a: u64, b: u64) -> u64 {
    let mut h = SipHasher13::new_with_keys(key, KEY_HI);
    h.write_u64(tag);
    h.write_u64(a);
    h.write_u64(b);
    h.finish()
}

/// Maps a PRF output to a uniform value in `[0, 1)` using its top 53 bits.
#[inline]
pub fn unit_f64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Unbiased-enough reduction of a PRF output into `[0, n)` (Lemire's
/// multiply-shift; bias is below 2^-32 for `n < 2^32`).
#[inline]
pub fn below(x: u64, n: u64) -> u64 {
    ((x as u128 * n as u128) >> 64) as u64
}

/// Derives an independent sub-seed, e.g. one per iteration or per subsystem.
#[inline]
pub fn subseed(key: u64, tag: u64, index: u64) -> u64 {
    prf(key, tag, index, 0)
}
